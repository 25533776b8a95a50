#include "wbkm/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "wbkm/detail/disjoint_set.hpp"

namespace wbkm {

KernelFunction KernelFunction::polynomial(int degree, double offset) {
    if (degree < 1) throw std::invalid_argument("kernel: polynomial degree must be >= 1");
    if (offset < 0.0) throw std::invalid_argument("kernel: polynomial offset must be >= 0");
    KernelFunction k;
    k.kind = Kind::polynomial;
    k.degree = degree;
    k.offset = offset;
    return k;
}

KernelFunction KernelFunction::gaussian(double bandwidth) {
    if (bandwidth <= 0.0) throw std::invalid_argument("kernel: bandwidth must be positive");
    KernelFunction k;
    k.kind = Kind::gaussian;
    k.bandwidth = bandwidth;
    return k;
}

double KernelFunction::operator()(std::span<const double> u, std::span<const double> v) const {
    switch (kind) {
        case Kind::linear:
            return dot(u, v);
        case Kind::polynomial: {
            double base = dot(u, v) + offset;
            double p = 1.0;
            for (int t = 0; t < degree; ++t) p *= base;
            return p;
        }
        case Kind::gaussian:
            return std::exp(-squared_distance(u, v) / (2.0 * bandwidth * bandwidth));
    }
    return 0.0;
}

Matrix gram_matrix(const WeightedDataset& data, const KernelFunction& kernel) {
    const std::size_t n = data.size();
    Matrix g(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = kernel(data.point(i), data.point(j));
            g(i, j) = v;
            g(j, i) = v;
        }
    }
    return g;
}

bool is_positive_semidefinite(const Matrix& sym, double tol) {
    const std::size_t n = sym.rows();
    if (sym.cols() != n) throw std::invalid_argument("psd check: matrix must be square");
    // Cholesky of G + tol*I succeeds iff the minimum eigenvalue exceeds -tol.
    std::vector<double> a(sym.data());
    for (std::size_t i = 0; i < n; ++i) a[i * n + i] += tol;
    for (std::size_t c = 0; c < n; ++c) {
        double d = a[c * n + c];
        for (std::size_t t = 0; t < c; ++t) d -= a[c * n + t] * a[c * n + t];
        if (d < 0.0) return false;
        const double root = std::sqrt(std::max(d, 0.0));
        a[c * n + c] = root;
        for (std::size_t r = c + 1; r < n; ++r) {
            double v = a[r * n + c];
            for (std::size_t t = 0; t < c; ++t) v -= a[r * n + t] * a[c * n + t];
            a[r * n + c] = root > 1e-150 ? v / root : 0.0;
        }
    }
    return true;
}

ImplicitSite ImplicitSite::explicit_point(Vec point) {
    if (point.empty()) throw std::invalid_argument("site: empty coordinates");
    return ImplicitSite(std::move(point), true);
}

ImplicitSite ImplicitSite::combination(Vec alpha) {
    if (alpha.empty()) throw std::invalid_argument("site: empty coefficients");
    double sum = 0.0;
    for (double a : alpha) {
        if (a < -1e-9) throw std::invalid_argument("site: negative combination coefficient");
        sum += a;
    }
    if (std::abs(sum - 1.0) > 1e-9 * static_cast<double>(alpha.size()))
        throw std::invalid_argument("site: combination coefficients must sum to 1");
    for (double& a : alpha) a = std::max(a, 0.0);
    return ImplicitSite(std::move(alpha), false);
}

KernelSpace::KernelSpace(const WeightedDataset& data, KernelFunction kernel)
    : data_(&data), kernel_(kernel), gram_(gram_matrix(data, kernel)) {}

double KernelSpace::site_point(const ImplicitSite& s, std::size_t j) const {
    if (s.is_explicit()) return kernel_(s.point(), data_->point(j));
    double v = 0.0;
    const Vec& alpha = s.alpha();
    for (std::size_t l = 0; l < alpha.size(); ++l)
        if (alpha[l] != 0.0) v += alpha[l] * gram_(j, l);
    return v;
}

double KernelSpace::site_self(const ImplicitSite& s) const {
    if (s.is_explicit()) return kernel_(s.point(), s.point());
    double v = 0.0;
    const Vec& alpha = s.alpha();
    for (std::size_t l = 0; l < alpha.size(); ++l) {
        if (alpha[l] == 0.0) continue;
        for (std::size_t t = 0; t < alpha.size(); ++t)
            if (alpha[t] != 0.0) v += alpha[l] * alpha[t] * gram_(l, t);
    }
    return v;
}

double KernelSpace::site_site(const ImplicitSite& a, const ImplicitSite& b) const {
    if (a.is_explicit() && b.is_explicit()) return kernel_(a.point(), b.point());
    if (a.is_explicit()) return site_site(b, a);
    // a is a combination
    double v = 0.0;
    const Vec& alpha = a.alpha();
    if (b.is_explicit()) {
        for (std::size_t l = 0; l < alpha.size(); ++l)
            if (alpha[l] != 0.0) v += alpha[l] * kernel_(data_->point(l), b.point());
        return v;
    }
    const Vec& beta = b.alpha();
    for (std::size_t l = 0; l < alpha.size(); ++l) {
        if (alpha[l] == 0.0) continue;
        for (std::size_t t = 0; t < beta.size(); ++t)
            if (beta[t] != 0.0) v += alpha[l] * beta[t] * gram_(l, t);
    }
    return v;
}

double KernelSpace::site_distance_sq(const ImplicitSite& a, const ImplicitSite& b) const {
    const double d = site_self(a) - 2.0 * site_site(a, b) + site_self(b);
    return std::max(d, 0.0);
}

Matrix kernel_lp_costs(const KernelSpace& space, const std::vector<ImplicitSite>& grouped_sites) {
    const WeightedDataset& data = space.data();
    Matrix costs(grouped_sites.size(), data.size());
    for (std::size_t i = 0; i < grouped_sites.size(); ++i) {
        const double self = space.site_self(grouped_sites[i]);
        for (std::size_t j = 0; j < data.size(); ++j)
            costs(i, j) = data.weight(j) * (self - 2.0 * space.site_point(grouped_sites[i], j));
    }
    return costs;
}

namespace {

struct FeatureGrouping {
    std::vector<std::vector<std::size_t>> groups;
    std::vector<std::size_t> group_of;
    std::vector<ImplicitSite> representatives;
};

/// Transitive closure of feature-space coincidence. A merged group of
/// coefficient sites is represented by the mean of its alpha rows; explicit
/// members coincide within tolerance, so the first one stands in.
FeatureGrouping group_in_feature_space(const KernelSpace& space,
                                       const std::vector<ImplicitSite>& slots, double merge_tol) {
    const std::size_t k = slots.size();
    detail::DisjointSet dsu(k);
    const double tol_sq = merge_tol * merge_tol;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            if (space.site_distance_sq(slots[i], slots[j]) <= tol_sq) dsu.unite(i, j);

    FeatureGrouping out;
    out.group_of.assign(k, 0);
    std::vector<std::ptrdiff_t> group_index(k, -1);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t root = dsu.find(i);
        if (group_index[root] < 0) {
            group_index[root] = static_cast<std::ptrdiff_t>(out.groups.size());
            out.groups.emplace_back();
        }
        const std::size_t g = static_cast<std::size_t>(group_index[root]);
        out.groups[g].push_back(i);
        out.group_of[i] = g;
    }

    for (const auto& members : out.groups) {
        bool all_combination = true;
        for (std::size_t s : members) all_combination = all_combination && !slots[s].is_explicit();
        if (members.size() == 1 || !all_combination) {
            out.representatives.push_back(slots[members.front()]);
            continue;
        }
        Vec mean(slots[members.front()].alpha().size(), 0.0);
        for (std::size_t s : members)
            for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += slots[s].alpha()[j];
        for (double& v : mean) v /= static_cast<double>(members.size());
        out.representatives.push_back(ImplicitSite::combination(std::move(mean)));
    }
    return out;
}

KernelRunResult kernel_run_impl(const WeightedDataset& data, const ClusterBounds& bounds,
                                std::vector<ImplicitSite> slots, const KernelFunction& kernel,
                                const RunConfig& config) {
    config.validate();
    const std::size_t k = bounds.k();
    if (k < 2) throw std::invalid_argument("kernel run: need k >= 2 clusters");
    if (slots.size() != k) throw std::invalid_argument("kernel run: need one initial site per cluster");
    if (data.size() < k) throw std::invalid_argument("kernel run: need n >= k points");
    bounds.require_total_weight(data.total_weight());

    KernelSpace space(data, kernel);
    double gram_trace = 0.0;
    for (std::size_t j = 0; j < data.size(); ++j)
        gram_trace += data.weight(j) * space.point_self(j);

    RunTrace trace;
    std::optional<SimplexBasis> warm;
    std::optional<LPSolution> solution;
    FeatureGrouping grouping;
    double prev_theta = std::numeric_limits<double>::infinity();

    for (std::size_t iter = 0; iter < config.max_iterations; ++iter) {
        grouping = group_in_feature_space(space, slots, config.site_merge_tol);

        Vec lo(grouping.groups.size(), 0.0), up(grouping.groups.size(), 0.0);
        for (std::size_t g = 0; g < grouping.groups.size(); ++g)
            for (std::size_t member : grouping.groups[g]) {
                lo[g] += bounds.lower(member);
                up[g] += bounds.upper(member);
            }
        PartitionLP lp = PartitionLP::from_costs(kernel_lp_costs(space, grouping.representatives),
                                                 Vec(data.weights()),
                                                 ClusterBounds(std::move(lo), std::move(up)));
        LPSolution sol = solve_vertex(lp, warm);

        IterationRecord rec;
        rec.theta = sol.theta;
        rec.squared_error = sol.theta + gram_trace;
        rec.fractional = sol.assignment.fractional_count(config.zero_tol);
        rec.pivots = sol.pivots;
        rec.groups = grouping.groups;
        if (config.record_assignments) rec.assignment = sol.assignment;
        trace.iterations.push_back(std::move(rec));

        const bool improved = prev_theta - sol.theta > config.objective_tol;
        prev_theta = sol.theta;
        warm = sol.basis;
        solution = std::move(sol);

        if (iter > 0 && !improved) {
            trace.verdict = RunVerdict::converged;
            break;
        }

        // Feature-space centroid of each group: alpha_ij = y_ij w_j / |C_i|.
        const Assignment& y = solution->assignment;
        std::vector<ImplicitSite> reps;
        reps.reserve(grouping.groups.size());
        for (std::size_t g = 0; g < grouping.groups.size(); ++g) {
            Vec alpha(data.size(), 0.0);
            double mass = 0.0;
            for (std::size_t j = 0; j < data.size(); ++j) {
                alpha[j] = y(g, j) * data.weight(j);
                mass += alpha[j];
            }
            if (mass <= 0.0) throw std::runtime_error("kernel run: empty cluster group");
            for (double& a : alpha) a /= mass;
            reps.push_back(ImplicitSite::combination(std::move(alpha)));
        }
        for (std::size_t i = 0; i < k; ++i) slots[i] = reps[grouping.group_of[i]];
    }

    // Final implicit centroids and the feature-space feasibility certificate.
    const Assignment& y = solution->assignment;
    const std::size_t m = y.clusters();
    Matrix coeffs(m, data.size());
    std::vector<ImplicitSite> final_sites;
    final_sites.reserve(m);
    for (std::size_t g = 0; g < m; ++g) {
        double mass = 0.0;
        for (std::size_t j = 0; j < data.size(); ++j) {
            coeffs(g, j) = y(g, j) * data.weight(j);
            mass += coeffs(g, j);
        }
        for (std::size_t j = 0; j < data.size(); ++j) coeffs(g, j) /= mass;
        final_sites.push_back(ImplicitSite::combination(Vec(coeffs.row(g).begin(), coeffs.row(g).end())));
    }

    Vec sigma(solution->lambda);
    const double shift = sigma.back();
    for (double& s : sigma) s -= shift;
    Matrix dist(m, data.size());
    for (std::size_t g = 0; g < m; ++g) {
        // Certification happens at the sites the final LP actually used.
        const ImplicitSite& site = grouping.representatives[g];
        const double self = space.site_self(site);
        for (std::size_t j = 0; j < data.size(); ++j)
            dist(g, j) = std::max(space.point_self(j) - 2.0 * space.site_point(site, j) + self, 0.0);
    }
    FeasibilityCertificate cert =
        verify_strongly_feasible_distances(dist, sigma, y, config.zero_tol);

    return KernelRunResult{y, std::move(coeffs), grouping.groups, std::move(trace),
                           std::move(cert)};
}

}  // namespace

KernelRunResult kernel_run(const WeightedDataset& data, const ClusterBounds& bounds,
                           Matrix initial_sites, const KernelFunction& kernel,
                           const RunConfig& config) {
    if (initial_sites.cols() != data.dim())
        throw std::invalid_argument("kernel run: site dimension mismatch");
    std::vector<ImplicitSite> slots;
    slots.reserve(initial_sites.rows());
    for (std::size_t i = 0; i < initial_sites.rows(); ++i)
        slots.push_back(ImplicitSite::explicit_point(
            Vec(initial_sites.row(i).begin(), initial_sites.row(i).end())));
    return kernel_run_impl(data, bounds, std::move(slots), kernel, config);
}

KernelRunResult kernel_run(const WeightedDataset& data, const ClusterBounds& bounds,
                           const std::vector<std::size_t>& initial_point_indices,
                           const KernelFunction& kernel, const RunConfig& config) {
    std::vector<ImplicitSite> slots;
    slots.reserve(initial_point_indices.size());
    for (std::size_t idx : initial_point_indices) {
        if (idx >= data.size()) throw std::invalid_argument("kernel run: site index out of range");
        Vec alpha(data.size(), 0.0);
        alpha[idx] = 1.0;
        slots.push_back(ImplicitSite::combination(std::move(alpha)));
    }
    return kernel_run_impl(data, bounds, std::move(slots), kernel, config);
}

}  // namespace wbkm

