#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wbkm/dataset.hpp"
#include "wbkm/geometry.hpp"

namespace wbkm {

/// k sites, partitioned into groups of coincident sites. Clusters whose sites
/// coincide are treated as one merged cluster with summed bounds; each group
/// is represented by the mean of its member sites.
class SiteSet {
public:
    /// Groups `raw_sites` (k x d) by the transitive closure of pairwise
    /// distance <= merge_tol. Groups are ordered by their smallest member.
    static SiteSet group(Matrix raw_sites, double merge_tol = kSiteMergeTol);

    /// All k raw sites distinct beyond merge_tol: k singleton groups.
    static SiteSet distinct(Matrix raw_sites, double merge_tol = kSiteMergeTol);

    std::size_t k() const { return raw_sites_.rows(); }
    std::size_t dim() const { return raw_sites_.cols(); }
    std::size_t group_count() const { return groups_.size(); }
    bool merged() const { return groups_.size() < raw_sites_.rows(); }

    const std::vector<std::vector<std::size_t>>& groups() const { return groups_; }
    std::size_t group_of(std::size_t site) const { return group_of_[site]; }

    std::span<const double> group_site(std::size_t g) const { return group_sites_.row(g); }
    const Matrix& group_sites() const { return group_sites_; }
    const Matrix& raw_sites() const { return raw_sites_; }

    /// Summed kappa bounds per group (the merged-cluster bounds).
    ClusterBounds grouped_bounds(const ClusterBounds& per_cluster) const;

private:
    SiteSet() = default;

    Matrix raw_sites_;
    Matrix group_sites_;
    std::vector<std::vector<std::size_t>> groups_;
    std::vector<std::size_t> group_of_;
};

}  // namespace wbkm
