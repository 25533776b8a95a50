#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "wbkm/assignment.hpp"
#include "wbkm/dataset.hpp"

namespace wbkm {

/// Disjoint groups of point indices that must share identical assignment
/// fractions; the transitive closure of pairwise must-link declarations.
struct MustLinkGroups {
    std::vector<std::vector<std::size_t>> groups;  // each sorted, size >= 2

    static MustLinkGroups from_pairs(std::size_t n,
                                     std::span<const std::pair<std::size_t, std::size_t>> pairs);
    void validate(std::size_t n) const;
    bool empty() const { return groups.empty(); }
};

struct MergedDataset {
    WeightedDataset data;                 // reduced instance
    std::vector<std::size_t> index_map;   // original index -> reduced index
    std::vector<bool> merged;             // reduced points produced by merging
    double dispersion = 0.0;              // sum_j w_j ||x_j - x_map(j)||^2, constant in the clustering
};

/// Replaces every must-link group by its convex combination x_I with weight
/// w_I = sum w_i. A merged point colliding exactly with another point is
/// merged further, summing weights.
MergedDataset merge_must_link(const WeightedDataset& data, const MustLinkGroups& groups);

/// Throws when a merged point is too heavy for every cluster's upper bound.
void require_group_capacity(const MergedDataset& merged, const ClusterBounds& bounds);

/// Copies each reduced column onto all of its original points, so linked
/// points carry bit-identical fractions.
Assignment expand_assignment(const Assignment& reduced,
                             const std::vector<std::size_t>& index_map);

}  // namespace wbkm
