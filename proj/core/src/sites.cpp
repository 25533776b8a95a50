#include "wbkm/sites.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "wbkm/detail/disjoint_set.hpp"

namespace wbkm {

SiteSet SiteSet::group(Matrix raw_sites, double merge_tol) {
    const std::size_t k = raw_sites.rows();
    if (k == 0 || raw_sites.cols() == 0)
        throw std::invalid_argument("sites: need at least one site with dimension >= 1");

    detail::DisjointSet dsu(k);
    const double tol_sq = merge_tol * merge_tol;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            if (squared_distance(raw_sites.row(i), raw_sites.row(j)) <= tol_sq)
                dsu.unite(i, j);

    // Groups keyed by root, ordered by smallest member index.
    std::map<std::size_t, std::vector<std::size_t>> by_root;
    for (std::size_t i = 0; i < k; ++i) by_root[dsu.find(i)].push_back(i);
    std::vector<std::vector<std::size_t>> groups;
    groups.reserve(by_root.size());
    for (auto& [root, members] : by_root) groups.push_back(std::move(members));
    std::sort(groups.begin(), groups.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });

    SiteSet s;
    s.groups_ = std::move(groups);
    s.group_of_.assign(k, 0);
    s.group_sites_ = Matrix(s.groups_.size(), raw_sites.cols());
    for (std::size_t g = 0; g < s.groups_.size(); ++g) {
        for (std::size_t member : s.groups_[g]) {
            s.group_of_[member] = g;
            for (std::size_t c = 0; c < raw_sites.cols(); ++c)
                s.group_sites_(g, c) += raw_sites(member, c);
        }
        const double inv = 1.0 / static_cast<double>(s.groups_[g].size());
        for (std::size_t c = 0; c < raw_sites.cols(); ++c) s.group_sites_(g, c) *= inv;
    }
    s.raw_sites_ = std::move(raw_sites);
    return s;
}

SiteSet SiteSet::distinct(Matrix raw_sites, double merge_tol) {
    SiteSet s = group(std::move(raw_sites), merge_tol);
    if (s.merged())
        throw std::invalid_argument("sites: coincident sites where distinct sites are required");
    return s;
}

ClusterBounds SiteSet::grouped_bounds(const ClusterBounds& per_cluster) const {
    if (per_cluster.k() != k())
        throw std::invalid_argument("sites: bounds count does not match site count");
    Vec lo(group_count(), 0.0), up(group_count(), 0.0);
    for (std::size_t g = 0; g < group_count(); ++g) {
        for (std::size_t member : groups_[g]) {
            lo[g] += per_cluster.lower(member);
            up[g] += per_cluster.upper(member);
        }
    }
    return ClusterBounds(std::move(lo), std::move(up));
}

}  // namespace wbkm
