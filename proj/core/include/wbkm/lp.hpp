#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "wbkm/assignment.hpp"
#include "wbkm/dataset.hpp"
#include "wbkm/geometry.hpp"
#include "wbkm/sites.hpp"

namespace wbkm {

/// The assignment linear program over the weight-balanced partition polytope:
///   min  sum_ij c_ij y_ij
///   s.t. kappa_i^- <= sum_j w_j y_ij <= kappa_i^+   (one range row per group)
///        sum_i y_ij = 1                             (one equality per point)
///        y_ij >= 0
/// Range rows are held as equalities with a slack bounded in [0, kappa^+ - kappa^-].
class PartitionLP {
public:
    /// Geometric costs c_ij = w_j (s_i.s_i - 2 x_j.s_i) over site groups.
    /// Bounds must already satisfy the global feasibility condition.
    static PartitionLP build(const WeightedDataset& data, const SiteSet& sites,
                             const ClusterBounds& per_cluster_bounds);

    /// Arbitrary cost matrix (groups x points); used by the kernelized path.
    static PartitionLP from_costs(Matrix costs, Vec weights, ClusterBounds grouped_bounds,
                                  std::optional<SiteSet> sites = std::nullopt);

    std::size_t groups() const { return costs_.rows(); }
    std::size_t points() const { return costs_.cols(); }

    double cost(std::size_t i, std::size_t j) const { return costs_(i, j); }
    const Matrix& costs() const { return costs_; }
    double weight(std::size_t j) const { return weights_[j]; }
    const Vec& weights() const { return weights_; }
    const ClusterBounds& bounds() const { return bounds_; }
    const std::optional<SiteSet>& sites() const { return sites_; }

private:
    PartitionLP(Matrix costs, Vec weights, ClusterBounds bounds, std::optional<SiteSet> sites);

    Matrix costs_;
    Vec weights_;
    ClusterBounds bounds_;
    std::optional<SiteSet> sites_;
};

/// Basis snapshot sufficient to restart the simplex from a previous vertex.
struct SimplexBasis {
    std::size_t groups = 0;
    std::size_t points = 0;
    std::vector<std::int64_t> basic;          // variable ids, one per row
    std::vector<std::uint8_t> slack_at_upper; // nonbasic slack bound flags

    bool compatible_with(const PartitionLP& lp) const {
        return groups == lp.groups() && points == lp.points();
    }
};

/// Optimal vertex of the partition LP with its certifying basis and duals.
struct LPSolution {
    Assignment assignment;
    Vec lambda;          // one dual per group range row (signed)
    Vec point_duals;     // one dual per point equality
    double theta = 0.0;  // objective value of the simplified LP
    SimplexBasis basis;
    std::size_t pivots = 0;
    std::optional<SiteSet> sites;  // present when the LP was built from sites
};

/// Numerical failure inside the simplex; carries the last basis for diagnosis.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, SimplexBasis basis)
        : std::runtime_error(what), last_basis(std::move(basis)) {}
    SimplexBasis last_basis;
};

/// Solves the LP to an optimal basic feasible solution (a vertex). An optimal
/// warm-start basis from an earlier solve over the same polytope is reused
/// when compatible.
LPSolution solve_vertex(const PartitionLP& lp, const std::optional<SimplexBasis>& warm_start = {});

/// Largest complementary-slackness violation of a solution: reduced costs on
/// the support and dual signs on the range rows. Test utility.
double complementary_slackness_violation(const PartitionLP& lp, const LPSolution& sol,
                                         double zero_tol = kZeroTol);

/// Nearest-site integral assignment for the k-means limit (kappa inactive).
/// Requires pairwise distinct sites; throws on an equidistant tie.
Assignment unconstrained_reduction_check(const WeightedDataset& data, const SiteSet& sites);

}  // namespace wbkm
