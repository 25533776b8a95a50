#include "wbkm/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace wbkm {

namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kPivotTol = 1e-10;
constexpr int kStallLimit = 50;      // degenerate pivots before Bland's rule
constexpr int kRefactorEvery = 64;
constexpr double kInf = std::numeric_limits<double>::infinity();

/// Bounded-variable revised simplex specialized to the partition polytope:
/// rows are m group ranges (equality plus a bounded slack) and n point
/// equalities; every y column has exactly two nonzeros, every slack one.
class Simplex {
public:
    explicit Simplex(const PartitionLP& lp)
        : lp_(lp),
          m_(lp.groups()),
          n_(lp.points()),
          rows_(m_ + n_),
          ny_(m_ * n_),
          nvars_(ny_ + m_) {
        ranges_.resize(m_);
        for (std::size_t i = 0; i < m_; ++i)
            ranges_[i] = lp.bounds().upper(i) - lp.bounds().lower(i);
        rhs_.assign(rows_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) rhs_[i] = lp.bounds().lower(i);
        for (std::size_t j = 0; j < n_; ++j) rhs_[m_ + j] = 1.0;

        double scale = 1.0;
        for (double c : lp.costs().data()) scale = std::max(scale, std::abs(c));
        dual_tol_ = std::max(1e-11, 1.8e-15 * static_cast<double>(rows_) * scale);
    }

    LPSolution solve(const std::optional<SimplexBasis>& warm) {
        if (!warm || !warm->compatible_with(lp_) || !try_install(*warm)) cold_start();

        const std::size_t pivot_cap = 2000 + 200 * rows_;
        int stall = 0;
        bool bland = false;
        while (true) {
            if (since_refactor_ >= kRefactorEvery) refactor();

            compute_duals();
            auto [enter, from_upper] = price(bland);
            if (enter < 0) {
                if (since_refactor_ > 0) {
                    // Confirm optimality against a fresh factorization.
                    refactor();
                    compute_duals();
                    std::tie(enter, from_upper) = price(bland);
                    if (enter < 0) break;
                } else {
                    break;
                }
            }

            const double t = pivot(static_cast<std::size_t>(enter), from_upper, bland);
            ++pivots_;
            if (t <= kFeasTol) {
                if (++stall >= kStallLimit) bland = true;
            } else {
                stall = 0;
                bland = false;
            }
            if (pivots_ > pivot_cap)
                throw SolverError("simplex: pivot cap exceeded", snapshot());
        }
        return extract();
    }

private:
    // Variable ids: [0, m*n) are y_ij with id i*n + j, [m*n, m*n+m) slacks.
    bool is_slack(std::size_t v) const { return v >= ny_; }
    double upper_of(std::size_t v) const { return is_slack(v) ? ranges_[v - ny_] : kInf; }
    double cost_of(std::size_t v) const {
        return is_slack(v) ? 0.0 : lp_.cost(v / n_, v % n_);
    }

    // Column sparsity: y_ij -> (row i, w_j), (row m+j, 1); slack u_i -> (row i, -1).
    template <typename F>
    void for_column(std::size_t v, F&& f) const {
        if (is_slack(v)) {
            f(v - ny_, -1.0);
        } else {
            const std::size_t i = v / n_, j = v % n_;
            f(i, lp_.weight(j));
            f(m_ + j, 1.0);
        }
    }

    double& binv(std::size_t r, std::size_t c) { return binv_[r * rows_ + c]; }

    SimplexBasis snapshot() const {
        SimplexBasis b;
        b.groups = m_;
        b.points = n_;
        b.basic.assign(basic_.begin(), basic_.end());
        b.slack_at_upper.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) b.slack_at_upper[i] = at_upper_[ny_ + i];
        return b;
    }

    bool try_install(const SimplexBasis& warm) {
        if (warm.basic.size() != rows_ || warm.slack_at_upper.size() != m_) return false;
        std::vector<std::uint8_t> seen(nvars_, 0);
        for (auto id : warm.basic) {
            if (id < 0 || static_cast<std::size_t>(id) >= nvars_) return false;
            if (seen[static_cast<std::size_t>(id)]++) return false;
        }
        basic_.assign(warm.basic.begin(), warm.basic.end());
        basic_pos_.assign(nvars_, -1);
        at_upper_.assign(nvars_, 0);
        for (std::size_t p = 0; p < rows_; ++p) basic_pos_[basic_[p]] = static_cast<std::ptrdiff_t>(p);
        for (std::size_t i = 0; i < m_; ++i)
            if (basic_pos_[ny_ + i] < 0 && warm.slack_at_upper[i]) at_upper_[ny_ + i] = 1;
        if (!factorize()) return false;
        recompute_values();
        // The feasible region never changes between iterations, so an old
        // optimal basis stays primal feasible; the check guards corrupt input.
        for (std::size_t p = 0; p < rows_; ++p) {
            const std::size_t v = basic_[p];
            if (xval_[v] < -1e-7 || xval_[v] > upper_of(v) + 1e-7) return false;
        }
        since_refactor_ = 0;
        return true;
    }

    /// Initial vertex: clamp a total supply per group into [kappa-, kappa+],
    /// then a northwest-corner sweep; its allocation cells form a spanning
    /// tree, which together with one slack column is a valid basis.
    void cold_start() {
        Vec supply(lp_.bounds().lower());
        double excess = std::accumulate(lp_.weights().begin(), lp_.weights().end(), 0.0) -
                        std::accumulate(supply.begin(), supply.end(), 0.0);
        std::ptrdiff_t partial_slack = -1;
        at_upper_.assign(nvars_, 0);
        for (std::size_t i = 0; i < m_; ++i) {
            const double take = std::clamp(excess, 0.0, ranges_[i]);
            supply[i] += take;
            excess -= take;
            if (take >= ranges_[i] - 1e-12) {
                if (ranges_[i] > 1e-12) at_upper_[ny_ + i] = 1;
            } else if (take > 1e-12) {
                partial_slack = static_cast<std::ptrdiff_t>(i);
            }
        }

        basic_.clear();
        basic_.reserve(rows_);
        Vec demand(lp_.weights());
        std::size_t i = 0, j = 0;
        for (std::size_t arc = 0; arc + 1 < rows_; ++arc) {
            basic_.push_back(i * n_ + j);
            const double w = std::min(supply[i], demand[j]);
            supply[i] -= w;
            demand[j] -= w;
            const bool can_i = i + 1 < m_, can_j = j + 1 < n_;
            if (can_i && (supply[i] <= kFeasTol || !can_j))
                ++i;
            else
                ++j;
        }
        const std::size_t slack_group =
            partial_slack >= 0 ? static_cast<std::size_t>(partial_slack) : 0;
        at_upper_[ny_ + slack_group] = 0;
        basic_.push_back(ny_ + slack_group);

        basic_pos_.assign(nvars_, -1);
        for (std::size_t p = 0; p < rows_; ++p) basic_pos_[basic_[p]] = static_cast<std::ptrdiff_t>(p);
        refactor();
    }

    /// Gauss-Jordan inversion of the basis matrix with partial pivoting.
    bool factorize() {
        std::vector<double> work(rows_ * rows_, 0.0);
        for (std::size_t p = 0; p < rows_; ++p)
            for_column(basic_[p], [&](std::size_t r, double a) { work[r * rows_ + p] = a; });
        binv_.assign(rows_ * rows_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r) binv(r, r) = 1.0;

        for (std::size_t col = 0; col < rows_; ++col) {
            std::size_t piv = col;
            double best = std::abs(work[col * rows_ + col]);
            for (std::size_t r = col + 1; r < rows_; ++r) {
                const double a = std::abs(work[r * rows_ + col]);
                if (a > best) {
                    best = a;
                    piv = r;
                }
            }
            if (best < kPivotTol) return false;
            if (piv != col) {
                for (std::size_t c = 0; c < rows_; ++c) {
                    std::swap(work[piv * rows_ + c], work[col * rows_ + c]);
                    std::swap(binv_[piv * rows_ + c], binv_[col * rows_ + c]);
                }
            }
            const double inv = 1.0 / work[col * rows_ + col];
            for (std::size_t c = 0; c < rows_; ++c) {
                work[col * rows_ + c] *= inv;
                binv_[col * rows_ + c] *= inv;
            }
            for (std::size_t r = 0; r < rows_; ++r) {
                if (r == col) continue;
                const double f = work[r * rows_ + col];
                if (f == 0.0) continue;
                for (std::size_t c = 0; c < rows_; ++c) {
                    work[r * rows_ + c] -= f * work[col * rows_ + c];
                    binv_[r * rows_ + c] -= f * binv_[col * rows_ + c];
                }
            }
        }
        return true;
    }

    void refactor() {
        if (!factorize()) throw SolverError("simplex: singular basis", snapshot());
        recompute_values();
        since_refactor_ = 0;
    }

    void recompute_values() {
        Vec rhs_eff(rhs_);
        xval_.assign(nvars_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            const std::size_t v = ny_ + i;
            if (basic_pos_[v] < 0 && at_upper_[v]) {
                xval_[v] = ranges_[i];
                rhs_eff[i] += ranges_[i];  // minus column (-1) times value
            }
        }
        for (std::size_t p = 0; p < rows_; ++p) {
            double x = 0.0;
            for (std::size_t r = 0; r < rows_; ++r) x += binv(p, r) * rhs_eff[r];
            xval_[basic_[p]] = x;
        }
    }

    void compute_duals() {
        duals_.assign(rows_, 0.0);
        for (std::size_t p = 0; p < rows_; ++p) {
            const double c = cost_of(basic_[p]);
            if (c == 0.0) continue;
            for (std::size_t r = 0; r < rows_; ++r) duals_[r] += c * binv(p, r);
        }
    }

    double reduced_cost(std::size_t v) const {
        if (is_slack(v)) return duals_[v - ny_];
        const std::size_t i = v / n_, j = v % n_;
        return lp_.cost(i, j) - lp_.weight(j) * duals_[i] - duals_[m_ + j];
    }

    /// Entering variable: most violated reduced cost (Dantzig), or the
    /// lowest-id violation under Bland's rule. Returns {-1, _} at optimality.
    std::pair<std::ptrdiff_t, bool> price(bool bland) const {
        std::ptrdiff_t best = -1;
        bool best_upper = false;
        double best_viol = dual_tol_;
        for (std::size_t v = 0; v < nvars_; ++v) {
            if (basic_pos_[v] >= 0) continue;
            if (is_slack(v) && ranges_[v - ny_] <= 1e-12) continue;  // fixed slack
            const double rc = reduced_cost(v);
            const double viol = at_upper_[v] ? rc : -rc;
            if (viol > best_viol) {
                best = static_cast<std::ptrdiff_t>(v);
                best_upper = at_upper_[v];
                best_viol = viol;
                if (bland) break;  // ids scanned in increasing order
            }
        }
        return {best, best_upper};
    }

    /// Ratio test and basis update; returns the step length.
    double pivot(std::size_t enter, bool from_upper, bool bland) {
        alpha_.assign(rows_, 0.0);
        for_column(enter, [&](std::size_t r, double a) {
            for (std::size_t p = 0; p < rows_; ++p) {
                const double b = binv(p, r);
                if (b != 0.0) alpha_[p] += b * a;
            }
        });
        const double dir = from_upper ? -1.0 : 1.0;

        double t_limit = upper_of(enter);  // bound flip of the entering variable
        std::ptrdiff_t leave = -1;
        for (std::size_t p = 0; p < rows_; ++p) {
            const double rate = -dir * alpha_[p];
            if (std::abs(rate) <= kPivotTol) continue;
            const std::size_t v = basic_[p];
            double room;
            if (rate < 0.0)
                room = xval_[v];  // heading to its lower bound 0
            else {
                const double ub = upper_of(v);
                if (ub == kInf) continue;
                room = ub - xval_[v];
            }
            const double tt = std::max(room, 0.0) / std::abs(rate);
            if (tt < t_limit) t_limit = tt;
        }
        if (t_limit == kInf) throw SolverError("simplex: unbounded direction", snapshot());

        // Among blocking rows near the limit, prefer the largest pivot element.
        double best_mag = 0.0;
        bool leave_to_upper = false;
        for (std::size_t p = 0; p < rows_; ++p) {
            const double rate = -dir * alpha_[p];
            if (std::abs(rate) <= kPivotTol) continue;
            const std::size_t v = basic_[p];
            double room;
            bool to_upper;
            if (rate < 0.0) {
                room = xval_[v];
                to_upper = false;
            } else {
                const double ub = upper_of(v);
                if (ub == kInf) continue;
                room = ub - xval_[v];
                to_upper = true;
            }
            const double tt = std::max(room, 0.0) / std::abs(rate);
            if (tt > t_limit + 1e-12 * (1.0 + t_limit)) continue;
            const double mag = std::abs(alpha_[p]);
            const bool better = leave < 0 || (bland ? basic_[p] < basic_[static_cast<std::size_t>(leave)]
                                                    : mag > best_mag);
            if (better) {
                leave = static_cast<std::ptrdiff_t>(p);
                best_mag = mag;
                leave_to_upper = to_upper;
            }
        }

        const double t = t_limit;
        if (leave < 0) {
            // Entering variable runs to its opposite bound: a bound flip.
            at_upper_[enter] = from_upper ? 0 : 1;
            xval_[enter] = from_upper ? 0.0 : upper_of(enter);
            for (std::size_t p = 0; p < rows_; ++p)
                xval_[basic_[p]] -= dir * t * alpha_[p];
            ++since_refactor_;
            return t;
        }

        const std::size_t lp_row = static_cast<std::size_t>(leave);
        const std::size_t leaving_var = basic_[lp_row];
        const double piv = alpha_[lp_row];
        if (std::abs(piv) < kPivotTol) throw SolverError("simplex: tiny pivot", snapshot());

        for (std::size_t p = 0; p < rows_; ++p)
            if (p != lp_row) xval_[basic_[p]] -= dir * t * alpha_[p];
        const double enter_val = from_upper ? upper_of(enter) - t : t;

        // Elementary update of the explicit inverse.
        const double inv_piv = 1.0 / piv;
        for (std::size_t c = 0; c < rows_; ++c) binv(lp_row, c) *= inv_piv;
        for (std::size_t p = 0; p < rows_; ++p) {
            if (p == lp_row) continue;
            const double f = alpha_[p];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < rows_; ++c) binv(p, c) -= f * binv(lp_row, c);
        }

        basic_pos_[leaving_var] = -1;
        at_upper_[leaving_var] = leave_to_upper ? 1 : 0;
        xval_[leaving_var] = leave_to_upper ? upper_of(leaving_var) : 0.0;
        basic_[lp_row] = enter;
        basic_pos_[enter] = static_cast<std::ptrdiff_t>(lp_row);
        at_upper_[enter] = 0;
        xval_[enter] = enter_val;
        ++since_refactor_;
        return t;
    }

    LPSolution extract() {
        Matrix y(m_, n_);
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t j = 0; j < n_; ++j) y(i, j) = xval_[i * n_ + j];

        compute_duals();
        Vec lambda(duals_.begin(), duals_.begin() + static_cast<std::ptrdiff_t>(m_));
        Vec point_duals(duals_.begin() + static_cast<std::ptrdiff_t>(m_), duals_.end());

        Assignment assignment(std::move(y));
        double theta = 0.0;
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t j = 0; j < n_; ++j) theta += lp_.cost(i, j) * assignment(i, j);

        return LPSolution{std::move(assignment), std::move(lambda), std::move(point_duals),
                          theta, snapshot(), pivots_, lp_.sites()};
    }

    const PartitionLP& lp_;
    std::size_t m_, n_, rows_, ny_, nvars_;
    Vec ranges_;
    Vec rhs_;
    double dual_tol_ = 1e-11;

    std::vector<std::size_t> basic_;
    std::vector<std::ptrdiff_t> basic_pos_;
    std::vector<std::uint8_t> at_upper_;
    Vec xval_;
    Vec binv_;
    Vec duals_;
    Vec alpha_;
    std::size_t pivots_ = 0;
    int since_refactor_ = 0;
};

}  // namespace

PartitionLP::PartitionLP(Matrix costs, Vec weights, ClusterBounds bounds,
                         std::optional<SiteSet> sites)
    : costs_(std::move(costs)), weights_(std::move(weights)), bounds_(std::move(bounds)),
      sites_(std::move(sites)) {}

PartitionLP PartitionLP::build(const WeightedDataset& data, const SiteSet& sites,
                               const ClusterBounds& per_cluster_bounds) {
    if (sites.dim() != data.dim())
        throw std::invalid_argument("lp: site dimension does not match data");
    per_cluster_bounds.require_total_weight(data.total_weight());
    ClusterBounds grouped = sites.grouped_bounds(per_cluster_bounds);

    Matrix costs(sites.group_count(), data.size());
    for (std::size_t g = 0; g < sites.group_count(); ++g) {
        auto s = sites.group_site(g);
        const double ss = squared_norm(s);
        for (std::size_t j = 0; j < data.size(); ++j)
            costs(g, j) = data.weight(j) * (ss - 2.0 * dot(data.point(j), s));
    }
    return PartitionLP(std::move(costs), Vec(data.weights()), std::move(grouped), sites);
}

PartitionLP PartitionLP::from_costs(Matrix costs, Vec weights, ClusterBounds grouped_bounds,
                                    std::optional<SiteSet> sites) {
    if (costs.rows() != grouped_bounds.k())
        throw std::invalid_argument("lp: cost rows do not match bounds");
    if (costs.cols() != weights.size())
        throw std::invalid_argument("lp: cost columns do not match weights");
    double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    grouped_bounds.require_total_weight(total);
    return PartitionLP(std::move(costs), std::move(weights), std::move(grouped_bounds),
                       std::move(sites));
}

LPSolution solve_vertex(const PartitionLP& lp, const std::optional<SimplexBasis>& warm_start) {
    Simplex solver(lp);
    return solver.solve(warm_start);
}

double complementary_slackness_violation(const PartitionLP& lp, const LPSolution& sol,
                                         double zero_tol) {
    double viol = 0.0;
    const std::size_t m = lp.groups(), n = lp.points();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double rc =
                lp.cost(i, j) - lp.weight(j) * sol.lambda[i] - sol.point_duals[j];
            viol = std::max(viol, -rc);  // dual feasibility
            if (sol.assignment(i, j) > zero_tol) viol = std::max(viol, std::abs(rc));
        }
    }
    // Range-row duals must vanish when the cluster size is strictly inside
    // its bounds, and carry the matching sign on a binding bound.
    Vec sizes(m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) sizes[i] += sol.assignment(i, j) * lp.weight(j);
    for (std::size_t i = 0; i < m; ++i) {
        const double slack_lo = sizes[i] - lp.bounds().lower(i);
        const double slack_hi = lp.bounds().upper(i) - sizes[i];
        const double eps = 1e-7 * (1.0 + std::abs(sizes[i]));
        if (slack_lo > eps && slack_hi > eps) viol = std::max(viol, std::abs(sol.lambda[i]));
        else if (slack_lo <= eps && slack_hi > eps) viol = std::max(viol, -sol.lambda[i]);
        else if (slack_hi <= eps && slack_lo > eps) viol = std::max(viol, sol.lambda[i]);
    }
    return viol;
}

Assignment unconstrained_reduction_check(const WeightedDataset& data, const SiteSet& sites) {
    if (sites.merged())
        throw std::invalid_argument("reduction check: sites must be pairwise distinct");
    if (sites.dim() != data.dim())
        throw std::invalid_argument("reduction check: dimension mismatch");
    const std::size_t k = sites.group_count();
    Matrix y(k, data.size());
    for (std::size_t j = 0; j < data.size(); ++j) {
        double best = kInf, second = kInf;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < k; ++i) {
            const double d = squared_distance(data.point(j), sites.group_site(i));
            if (d < best) {
                second = best;
                best = d;
                arg = i;
            } else if (d < second) {
                second = d;
            }
        }
        if (k > 1 && second - best <= 1e-12 * std::max(1.0, best))
            throw std::runtime_error("reduction check: point " + std::to_string(j) +
                                     " is equidistant to two nearest sites");
        y(arg, j) = 1.0;
    }
    return Assignment(std::move(y));
}

}  // namespace wbkm
