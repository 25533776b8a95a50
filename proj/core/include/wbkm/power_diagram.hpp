#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wbkm/assignment.hpp"
#include "wbkm/dataset.hpp"
#include "wbkm/geometry.hpp"
#include "wbkm/lp.hpp"
#include "wbkm/sites.hpp"

namespace wbkm {

/// Slack allowed on the power-cell inequalities when checking membership of
/// support points; looser than the LP tolerance because dual round-off
/// compounds in the inequality.
inline constexpr double kCellSlack = 1e-7;

/// Power diagram over grouped sites: cell i is the set of points where
/// ||x - s_i||^2 - sigma_i attains the minimum. sigma of the last group is
/// normalized to 0 (a common shift leaves all cells unchanged).
struct PowerDiagram {
    SiteSet sites;
    Vec sigma;
};

enum class Feasibility { infeasible, feasible, strongly_feasible };

/// A support point x_j assigned to group `assigned` whose cell inequality
/// against group `better` is violated.
struct CellViolation {
    std::size_t point = 0;
    std::size_t assigned = 0;
    std::size_t better = 0;
    double margin = 0.0;  // amount by which the inequality fails
};

/// One fractional point and the clusters it connects in G(C).
struct LabelEdge {
    std::size_t point = 0;
    std::vector<std::size_t> groups;
};

struct FeasibilityCertificate {
    Feasibility verdict = Feasibility::infeasible;
    std::optional<CellViolation> violation;  // set when infeasible
    std::vector<LabelEdge> forest;           // label structure when strongly feasible
    std::string detail;                      // reason when strong feasibility fails

    bool feasible() const { return verdict != Feasibility::infeasible; }
    bool strongly_feasible() const { return verdict == Feasibility::strongly_feasible; }
};

/// Power diagram whose parameters are the cluster-range duals of an optimal
/// vertex, normalized so the last group carries 0. The feasibility of the
/// result is verified against the data before returning; a failure indicates
/// broken duals and throws.
PowerDiagram sigma_from_duals(const LPSolution& solution, const WeightedDataset& data,
                              double zero_tol = kZeroTol);

struct SigmaSearch {
    bool feasible = false;
    Vec sigma;
};

/// Independent oracle: searches for any sigma that makes the diagram feasible
/// for the given assignment by solving the induced difference-constraint
/// system (Bellman-Ford). Infeasible is a valid outcome.
SigmaSearch sigma_feasibility_lp(const Assignment& assignment, const WeightedDataset& data,
                                 const SiteSet& sites, double zero_tol = kZeroTol);

/// All groups attaining the minimal power value at `point`, within 1e-9.
std::vector<std::size_t> cell_membership(const PowerDiagram& diagram,
                                         std::span<const double> point, double tol = 1e-9);

FeasibilityCertificate verify_feasible(const PowerDiagram& diagram, const Assignment& assignment,
                                       const WeightedDataset& data, double zero_tol = kZeroTol);

/// Checks feasibility, support equality (strict interiority reading) and the
/// no-multi-label-cycle condition on G(C) via a disjoint-set sweep.
FeasibilityCertificate verify_strongly_feasible(const PowerDiagram& diagram,
                                                const Assignment& assignment,
                                                const WeightedDataset& data,
                                                double zero_tol = kZeroTol);

/// Same checks on a precomputed matrix of squared distances (groups x points);
/// lets the kernelized path certify cells in feature space.
FeasibilityCertificate verify_strongly_feasible_distances(const Matrix& dist_sq,
                                                          const Vec& sigma,
                                                          const Assignment& assignment,
                                                          double zero_tol = kZeroTol);

}  // namespace wbkm
