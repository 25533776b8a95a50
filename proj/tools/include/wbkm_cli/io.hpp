#pragma once

#include <cstddef>
#include <string>

#include "wbkm/assignment.hpp"
#include "wbkm/dataset.hpp"
#include "wbkm/geometry.hpp"

namespace wbkm::cli {

/// Reads a delimiter-separated points file: d coordinate columns followed by
/// a weight column, '#' comments, one optional header line. Errors cite the
/// 1-based file line.
WeightedDataset ingest(const std::string& path);

/// Writes a dataset in the ingest format with round-trip-exact precision.
void serialize_dataset(const WeightedDataset& data, const std::string& path);

/// Numeric table without a weight column (e.g. a sites file). All rows must
/// agree on the column count; `expected_cols` of 0 accepts any width.
Matrix read_matrix(const std::string& path, std::size_t expected_cols = 0);

/// Sparse assignment triplets `cluster,point,value`, nonzero entries only.
void write_assignment(const Assignment& assignment, const std::string& path,
                      double zero_tol = kZeroTol);
Assignment read_assignment(const std::string& path, std::size_t clusters, std::size_t points);

/// Shortest exact decimal form of a double (round-trips bit-exactly).
std::string format_double(double v);

}  // namespace wbkm::cli
