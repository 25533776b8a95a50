#include "wbkm/constraints.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

#include "wbkm/detail/disjoint_set.hpp"

namespace wbkm {

MustLinkGroups MustLinkGroups::from_pairs(
    std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> pairs) {
    detail::DisjointSet dsu(n);
    for (const auto& [a, b] : pairs) {
        if (a >= n || b >= n)
            throw std::invalid_argument("must-link: point index out of range");
        if (a == b) throw std::invalid_argument("must-link: a pair must name two points");
        dsu.unite(a, b);
    }
    std::map<std::size_t, std::vector<std::size_t>> by_root;
    for (std::size_t j = 0; j < n; ++j) by_root[dsu.find(j)].push_back(j);
    MustLinkGroups out;
    for (auto& [root, members] : by_root)
        if (members.size() >= 2) out.groups.push_back(std::move(members));
    std::sort(out.groups.begin(), out.groups.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return out;
}

void MustLinkGroups::validate(std::size_t n) const {
    std::vector<bool> seen(n, false);
    for (const auto& g : groups) {
        if (g.size() < 2) throw std::invalid_argument("must-link: groups need at least two points");
        for (std::size_t j : g) {
            if (j >= n) throw std::invalid_argument("must-link: point index out of range");
            if (seen[j]) throw std::invalid_argument("must-link: groups must be disjoint");
            seen[j] = true;
        }
    }
}

MergedDataset merge_must_link(const WeightedDataset& data, const MustLinkGroups& groups) {
    const std::size_t n = data.size(), d = data.dim();
    groups.validate(n);

    // Group representative per original point; -1 for untouched points.
    std::vector<std::ptrdiff_t> group_of(n, -1);
    for (std::size_t g = 0; g < groups.groups.size(); ++g)
        for (std::size_t j : groups.groups[g]) group_of[j] = static_cast<std::ptrdiff_t>(g);

    std::vector<Vec> group_point(groups.groups.size());
    Vec group_weight(groups.groups.size(), 0.0);
    for (std::size_t g = 0; g < groups.groups.size(); ++g) {
        Vec acc(d, 0.0);
        for (std::size_t j : groups.groups[g]) {
            group_weight[g] += data.weight(j);
            auto x = data.point(j);
            for (std::size_t t = 0; t < d; ++t) acc[t] += data.weight(j) * x[t];
        }
        for (double& v : acc) v /= group_weight[g];
        group_point[g] = std::move(acc);
    }

    // Deduplicate by exact coordinates; colliding candidates merge further.
    std::map<Vec, std::size_t> by_coords;
    std::vector<Vec> reduced_points;
    Vec reduced_weights;
    std::vector<bool> merged_flag;
    std::vector<std::size_t> index_map(n);
    std::vector<bool> group_done(groups.groups.size(), false);

    auto place = [&](const Vec& coords, double weight, bool from_merge) {
        auto [it, inserted] = by_coords.try_emplace(coords, reduced_points.size());
        if (inserted) {
            reduced_points.push_back(coords);
            reduced_weights.push_back(weight);
            merged_flag.push_back(from_merge);
        } else {
            reduced_weights[it->second] += weight;
            merged_flag[it->second] = true;  // a collision is itself a merge
        }
        return it->second;
    };

    for (std::size_t j = 0; j < n; ++j) {
        if (group_of[j] < 0) {
            Vec coords(data.point(j).begin(), data.point(j).end());
            index_map[j] = place(coords, data.weight(j), false);
            continue;
        }
        const std::size_t g = static_cast<std::size_t>(group_of[j]);
        if (!group_done[g]) {
            group_done[g] = true;
            const std::size_t r = place(group_point[g], group_weight[g], true);
            for (std::size_t member : groups.groups[g]) index_map[member] = r;
        }
    }

    Matrix pts(reduced_points.size(), d);
    for (std::size_t r = 0; r < reduced_points.size(); ++r)
        std::copy(reduced_points[r].begin(), reduced_points[r].end(), pts.row(r).begin());

    MergedDataset out{WeightedDataset(std::move(pts), std::move(reduced_weights)),
                      std::move(index_map), std::move(merged_flag), 0.0};
    for (std::size_t j = 0; j < n; ++j)
        out.dispersion +=
            data.weight(j) * squared_distance(data.point(j), out.data.point(out.index_map[j]));
    return out;
}

void require_group_capacity(const MergedDataset& merged, const ClusterBounds& bounds) {
    double max_upper = 0.0;
    for (std::size_t i = 0; i < bounds.k(); ++i) max_upper = std::max(max_upper, bounds.upper(i));
    for (std::size_t r = 0; r < merged.data.size(); ++r) {
        if (!merged.merged[r]) continue;
        if (merged.data.weight(r) > max_upper)
            throw std::invalid_argument(
                "must-link: merged group of weight " + std::to_string(merged.data.weight(r)) +
                " exceeds every cluster upper bound");
    }
}

Assignment expand_assignment(const Assignment& reduced,
                             const std::vector<std::size_t>& index_map) {
    const std::size_t k = reduced.clusters();
    Matrix y(k, index_map.size());
    for (std::size_t j = 0; j < index_map.size(); ++j) {
        if (index_map[j] >= reduced.points())
            throw std::invalid_argument("expand: index map does not match the reduced assignment");
        for (std::size_t i = 0; i < k; ++i) y(i, j) = reduced(i, index_map[j]);
    }
    return Assignment(std::move(y));
}

}  // namespace wbkm
