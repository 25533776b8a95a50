#include "wbkm/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace wbkm {

namespace {
constexpr double kEntrySlack = 1e-9;
constexpr double kColumnSumSlack = 1e-9;
}  // namespace

Assignment::Assignment(Matrix fractions) : y_(std::move(fractions)) {
    const std::size_t k = y_.rows(), n = y_.cols();
    if (k == 0 || n == 0) throw std::invalid_argument("assignment: empty matrix");
    for (std::size_t j = 0; j < n; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double v = y_(i, j);
            if (!std::isfinite(v) || v < -kEntrySlack || v > 1.0 + kEntrySlack)
                throw std::invalid_argument("assignment: entry (" + std::to_string(i) + "," +
                                            std::to_string(j) + ") outside [0,1]");
            col += v;
        }
        if (std::abs(col - 1.0) > kColumnSumSlack * static_cast<double>(k))
            throw std::invalid_argument("assignment: column " + std::to_string(j) +
                                        " does not sum to 1");
    }
    for (double& v : y_.data()) v = std::clamp(v, 0.0, 1.0);
}

std::vector<std::pair<std::size_t, std::size_t>> Assignment::fractional_entries(double tau) const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < clusters(); ++i)
        for (std::size_t j = 0; j < points(); ++j)
            if (y_(i, j) > tau && y_(i, j) < 1.0 - tau) out.emplace_back(i, j);
    return out;
}

std::size_t Assignment::fractional_count(double tau) const {
    return fractional_entries(tau).size();
}

std::vector<std::size_t> Assignment::support(std::size_t i, double tau) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < points(); ++j)
        if (y_(i, j) > tau) out.push_back(j);
    return out;
}

std::vector<std::size_t> Assignment::clusters_of(std::size_t j, double tau) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < clusters(); ++i)
        if (y_(i, j) > tau) out.push_back(i);
    return out;
}

namespace {

void require_match(const Assignment& a, const WeightedDataset& data) {
    if (a.points() != data.size())
        throw std::invalid_argument("assignment: point count does not match dataset");
}

}  // namespace

Vec shape(const Assignment& assignment, const WeightedDataset& data) {
    require_match(assignment, data);
    Vec sizes(assignment.clusters(), 0.0);
    for (std::size_t i = 0; i < assignment.clusters(); ++i)
        for (std::size_t j = 0; j < assignment.points(); ++j)
            sizes[i] += assignment(i, j) * data.weight(j);
    return sizes;
}

Vec centroid(const Assignment& assignment, const WeightedDataset& data, std::size_t cluster) {
    require_match(assignment, data);
    if (cluster >= assignment.clusters())
        throw std::invalid_argument("centroid: cluster index out of range");
    double mass = 0.0;
    Vec c(data.dim(), 0.0);
    for (std::size_t j = 0; j < assignment.points(); ++j) {
        const double m = assignment(cluster, j) * data.weight(j);
        if (m == 0.0) continue;
        mass += m;
        auto x = data.point(j);
        for (std::size_t t = 0; t < data.dim(); ++t) c[t] += m * x[t];
    }
    if (mass <= 0.0)
        throw std::invalid_argument("centroid: cluster " + std::to_string(cluster) +
                                    " carries no weight");
    for (double& v : c) v /= mass;
    return c;
}

Matrix centroids(const Assignment& assignment, const WeightedDataset& data) {
    Matrix out(assignment.clusters(), data.dim());
    for (std::size_t i = 0; i < assignment.clusters(); ++i) {
        Vec c = centroid(assignment, data, i);
        std::copy(c.begin(), c.end(), out.row(i).begin());
    }
    return out;
}

double objective_theta(const Assignment& assignment, const WeightedDataset& data,
                       const SiteSet& sites) {
    require_match(assignment, data);
    if (assignment.clusters() != sites.group_count())
        throw std::invalid_argument("objective: assignment rows do not match site groups");
    if (sites.dim() != data.dim())
        throw std::invalid_argument("objective: site dimension does not match data");
    double theta = 0.0;
    for (std::size_t i = 0; i < sites.group_count(); ++i) {
        auto s = sites.group_site(i);
        const double ss = squared_norm(s);
        for (std::size_t j = 0; j < data.size(); ++j) {
            const double y = assignment(i, j);
            if (y == 0.0) continue;
            theta += y * data.weight(j) * (ss - 2.0 * dot(data.point(j), s));
        }
    }
    return theta;
}

double squared_error(const Assignment& assignment, const WeightedDataset& data,
                     const SiteSet& sites) {
    require_match(assignment, data);
    if (assignment.clusters() != sites.group_count())
        throw std::invalid_argument("objective: assignment rows do not match site groups");
    double total = 0.0;
    for (std::size_t i = 0; i < sites.group_count(); ++i) {
        auto s = sites.group_site(i);
        for (std::size_t j = 0; j < data.size(); ++j) {
            const double y = assignment(i, j);
            if (y == 0.0) continue;
            total += y * data.weight(j) * squared_distance(data.point(j), s);
        }
    }
    return total;
}

}  // namespace wbkm
