#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "wbkm/dataset.hpp"
#include "wbkm/geometry.hpp"
#include "wbkm/sites.hpp"

namespace wbkm {

/// Partial-membership assignment: a k x n matrix of fractions in [0,1] whose
/// columns sum to 1. Rows are clusters (or merged cluster groups).
class Assignment {
public:
    /// Validates column sums to 1 within 1e-9 and entries within
    /// [-1e-9, 1+1e-9], then clamps entries into [0,1].
    Assignment(Matrix fractions);

    std::size_t clusters() const { return y_.rows(); }
    std::size_t points() const { return y_.cols(); }

    double operator()(std::size_t i, std::size_t j) const { return y_(i, j); }
    std::span<const double> row(std::size_t i) const { return y_.row(i); }
    const Matrix& fractions() const { return y_; }

    /// Index pairs (i,j) with tau < y_ij < 1-tau.
    std::vector<std::pair<std::size_t, std::size_t>> fractional_entries(double tau = kZeroTol) const;
    std::size_t fractional_count(double tau = kZeroTol) const;

    /// Points j with y_ij > tau.
    std::vector<std::size_t> support(std::size_t i, double tau = kZeroTol) const;

    /// Clusters i with y_ij > tau (the fractional point's label set).
    std::vector<std::size_t> clusters_of(std::size_t j, double tau = kZeroTol) const;

    bool integral(double tau = kZeroTol) const { return fractional_count(tau) == 0; }

private:
    Matrix y_;
};

/// Cluster sizes |C_i| = sum_j y_ij w_j.
Vec shape(const Assignment& assignment, const WeightedDataset& data);

/// Center of gravity of cluster i; throws on an (numerically) empty cluster.
Vec centroid(const Assignment& assignment, const WeightedDataset& data, std::size_t cluster);

/// All centers of gravity, one row per cluster.
Matrix centroids(const Assignment& assignment, const WeightedDataset& data);

/// Theta(C,S) = sum_ij y_ij w_j (s_i.s_i - 2 x_j.s_i), the simplified
/// least-squares objective. Rows of `assignment` correspond to site groups.
double objective_theta(const Assignment& assignment, const WeightedDataset& data,
                       const SiteSet& sites);

/// sum_ij y_ij w_j ||x_j - s_i||^2; equals objective_theta plus the
/// assignment-independent constant sum_j w_j x_j.x_j.
double squared_error(const Assignment& assignment, const WeightedDataset& data,
                     const SiteSet& sites);

}  // namespace wbkm
