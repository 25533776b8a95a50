#include "wbkm/power_diagram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "wbkm/detail/disjoint_set.hpp"

namespace wbkm {

namespace {

Matrix distance_matrix(const WeightedDataset& data, const SiteSet& sites) {
    Matrix d(sites.group_count(), data.size());
    for (std::size_t i = 0; i < sites.group_count(); ++i)
        for (std::size_t j = 0; j < data.size(); ++j)
            d(i, j) = squared_distance(data.point(j), sites.group_site(i));
    return d;
}

FeasibilityCertificate check_feasible(const Matrix& dist_sq, const Vec& sigma,
                                      const Assignment& assignment, double zero_tol) {
    const std::size_t m = dist_sq.rows(), n = dist_sq.cols();
    FeasibilityCertificate cert;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < m; ++i) {
            if (assignment(i, j) <= zero_tol) continue;
            const double pi = dist_sq(i, j) - sigma[i];
            for (std::size_t l = 0; l < m; ++l) {
                if (l == i) continue;
                const double pl = dist_sq(l, j) - sigma[l];
                if (pi > pl + kCellSlack) {
                    cert.verdict = Feasibility::infeasible;
                    cert.violation = CellViolation{j, i, l, pi - pl};
                    return cert;
                }
            }
        }
    }
    cert.verdict = Feasibility::feasible;
    return cert;
}

}  // namespace

PowerDiagram sigma_from_duals(const LPSolution& solution, const WeightedDataset& data,
                              double zero_tol) {
    if (!solution.sites)
        throw std::invalid_argument("sigma_from_duals: solution carries no site set");
    const SiteSet& sites = *solution.sites;
    const std::size_t m = sites.group_count();
    if (solution.lambda.size() != m)
        throw std::invalid_argument("sigma_from_duals: dual count does not match groups");

    Vec sigma(solution.lambda);
    const double shift = sigma.back();
    for (double& s : sigma) s -= shift;

    PowerDiagram diagram{sites, std::move(sigma)};
    FeasibilityCertificate cert = verify_feasible(diagram, solution.assignment, data, zero_tol);
    if (!cert.feasible()) {
        const auto& v = *cert.violation;
        throw std::runtime_error(
            "sigma_from_duals: dual-derived diagram not feasible; point " +
            std::to_string(v.point) + " assigned to group " + std::to_string(v.assigned) +
            " but group " + std::to_string(v.better) + " is closer by " +
            std::to_string(v.margin));
    }
    return diagram;
}

SigmaSearch sigma_feasibility_lp(const Assignment& assignment, const WeightedDataset& data,
                                 const SiteSet& sites, double zero_tol) {
    const std::size_t m = sites.group_count();
    if (assignment.clusters() != m)
        throw std::invalid_argument("sigma search: assignment rows do not match groups");
    SigmaSearch out;
    if (m == 1) {
        out.feasible = true;
        out.sigma = Vec{0.0};
        return out;
    }

    // Feasibility constraints form a difference system
    //   sigma_l - sigma_i <= min over support points of (d_lj - d_ij),
    // solved by Bellman-Ford; a negative cycle certifies infeasibility.
    Matrix dist = distance_matrix(data, sites);
    constexpr double kNoEdge = std::numeric_limits<double>::infinity();
    Matrix edge(m, m, kNoEdge);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < data.size(); ++j) {
            if (assignment(i, j) <= zero_tol) continue;
            for (std::size_t l = 0; l < m; ++l) {
                if (l == i) continue;
                edge(i, l) = std::min(edge(i, l), dist(l, j) - dist(i, j));
            }
        }
    }

    double scale = 1.0;
    for (double w : edge.data())
        if (w != kNoEdge) scale = std::max(scale, std::abs(w));

    Vec potential(m, 0.0);
    auto relax_pass = [&]() {
        double improvement = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t l = 0; l < m; ++l) {
                if (edge(i, l) == kNoEdge) continue;
                const double candidate = potential[i] + edge(i, l);
                if (candidate < potential[l]) {
                    improvement = std::max(improvement, potential[l] - candidate);
                    potential[l] = candidate;
                }
            }
        }
        return improvement;
    };
    for (std::size_t round = 0; round + 1 < m; ++round) relax_pass();
    // One extra pass: any further improvement beyond round-off certifies a
    // negative cycle, i.e. an unsatisfiable constraint loop.
    if (relax_pass() > 1e-9 * scale) {
        out.feasible = false;
        return out;
    }

    const double shift = potential.back();
    for (double& s : potential) s -= shift;
    out.feasible = true;
    out.sigma = std::move(potential);
    return out;
}

std::vector<std::size_t> cell_membership(const PowerDiagram& diagram,
                                         std::span<const double> point, double tol) {
    const std::size_t m = diagram.sites.group_count();
    Vec values(m);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
        values[i] = squared_distance(point, diagram.sites.group_site(i)) - diagram.sigma[i];
        best = std::min(best, values[i]);
    }
    std::vector<std::size_t> cells;
    for (std::size_t i = 0; i < m; ++i)
        if (values[i] <= best + tol) cells.push_back(i);
    return cells;
}

FeasibilityCertificate verify_feasible(const PowerDiagram& diagram, const Assignment& assignment,
                                       const WeightedDataset& data, double zero_tol) {
    if (assignment.clusters() != diagram.sites.group_count())
        throw std::invalid_argument("verify: assignment rows do not match diagram groups");
    return check_feasible(distance_matrix(data, diagram.sites), diagram.sigma, assignment,
                          zero_tol);
}

FeasibilityCertificate verify_strongly_feasible_distances(const Matrix& dist_sq, const Vec& sigma,
                                                          const Assignment& assignment,
                                                          double zero_tol) {
    FeasibilityCertificate cert = check_feasible(dist_sq, sigma, assignment, zero_tol);
    if (!cert.feasible()) return cert;

    const std::size_t m = dist_sq.rows(), n = dist_sq.cols();

    // Support equality supp(C_i) = P_i cap X, read as: no point strictly
    // interior to a cell it has zero assignment in. Boundary contacts with
    // zero assignment are tolerated.
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < m; ++i) {
            if (assignment(i, j) > zero_tol) continue;
            const double pi = dist_sq(i, j) - sigma[i];
            double best_other = std::numeric_limits<double>::infinity();
            for (std::size_t l = 0; l < m; ++l)
                if (l != i) best_other = std::min(best_other, dist_sq(l, j) - sigma[l]);
            if (pi < best_other - kCellSlack) {
                cert.verdict = Feasibility::feasible;
                cert.detail = "support mismatch: point " + std::to_string(j) +
                              " lies strictly inside cell " + std::to_string(i) +
                              " but is not assigned to it";
                return cert;
            }
        }
    }

    // Multi-label cycle test on G(C): a cycle with two or more labels exists
    // iff some point's cluster set touches a pair already connected by the
    // previously processed points.
    detail::DisjointSet dsu(m);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<std::size_t> labels = assignment.clusters_of(j, zero_tol);
        if (labels.size() < 2) continue;
        for (std::size_t a = 0; a < labels.size(); ++a)
            for (std::size_t b = a + 1; b < labels.size(); ++b)
                if (dsu.same(labels[a], labels[b])) {
                    cert.verdict = Feasibility::feasible;
                    cert.detail = "multi-label cycle: point " + std::to_string(j) +
                                  " reconnects clusters " + std::to_string(labels[a]) + " and " +
                                  std::to_string(labels[b]);
                    cert.forest.clear();
                    return cert;
                }
        for (std::size_t t = 1; t < labels.size(); ++t) dsu.unite(labels[0], labels[t]);
        cert.forest.push_back(LabelEdge{j, std::move(labels)});
    }

    cert.verdict = Feasibility::strongly_feasible;
    return cert;
}

FeasibilityCertificate verify_strongly_feasible(const PowerDiagram& diagram,
                                                const Assignment& assignment,
                                                const WeightedDataset& data, double zero_tol) {
    if (assignment.clusters() != diagram.sites.group_count())
        throw std::invalid_argument("verify: assignment rows do not match diagram groups");
    return verify_strongly_feasible_distances(distance_matrix(data, diagram.sites), diagram.sigma,
                                              assignment, zero_tol);
}

}  // namespace wbkm
