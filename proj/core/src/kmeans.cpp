#include "wbkm/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>
#include <stdexcept>

namespace wbkm {

void RunConfig::validate() const {
    if (max_iterations < 1) throw std::invalid_argument("config: max_iterations must be >= 1");
    if (objective_tol <= 0.0 || site_merge_tol <= 0.0 || zero_tol <= 0.0)
        throw std::invalid_argument("config: tolerances must be positive");
}

Matrix init_sites(const WeightedDataset& data, std::size_t k, InitStrategy strategy,
                  std::uint64_t seed) {
    if (k < 1 || k > data.size())
        throw std::invalid_argument("init: need 1 <= k <= n distinct data points");
    if (strategy == InitStrategy::given)
        throw std::invalid_argument("init: the passthrough strategy needs explicit sites");

    std::mt19937_64 rng(seed);
    const std::size_t n = data.size();
    std::vector<std::size_t> chosen;
    chosen.reserve(k);

    if (strategy == InitStrategy::sample_points) {
        std::vector<std::size_t> pool(n);
        for (std::size_t j = 0; j < n; ++j) pool[j] = j;
        for (std::size_t t = 0; t < k; ++t) {
            std::uniform_int_distribution<std::size_t> pick(t, n - 1);
            std::swap(pool[t], pool[pick(rng)]);
            chosen.push_back(pool[t]);
        }
    } else {
        // Weighted spreading: the first site weight-proportional, each next
        // proportional to weight times squared distance to the chosen sites.
        Vec score(data.weights());
        for (std::size_t t = 0; t < k; ++t) {
            double total = 0.0;
            for (double s : score) total += s;
            if (total <= 0.0) throw std::invalid_argument("init: fewer than k distinct points");
            std::uniform_real_distribution<double> u(0.0, total);
            double target = u(rng), acc = 0.0;
            std::size_t pick = n - 1;
            for (std::size_t j = 0; j < n; ++j) {
                acc += score[j];
                if (acc >= target) {
                    pick = j;
                    break;
                }
            }
            chosen.push_back(pick);
            for (std::size_t j = 0; j < n; ++j) {
                const double d = squared_distance(data.point(j), data.point(pick));
                const double cap = data.weight(j) * d;
                score[j] = t == 0 ? cap : std::min(score[j], cap);
            }
        }
    }

    Matrix sites(k, data.dim());
    for (std::size_t t = 0; t < k; ++t) {
        auto p = data.point(chosen[t]);
        std::copy(p.begin(), p.end(), sites.row(t).begin());
    }
    return sites;
}

Matrix init_sites(const WeightedDataset& data, std::size_t k, Matrix user_sites) {
    if (user_sites.rows() != k || user_sites.cols() != data.dim())
        throw std::invalid_argument("init: provided sites must be k x d");
    return user_sites;
}

namespace {

/// Expands m group centroids back onto the k site slots; slots sharing a
/// group land on the identical coordinates, so merges stay in effect.
Matrix slots_from_centroids(const Matrix& group_centroids, const SiteSet& sites) {
    Matrix slots(sites.k(), group_centroids.cols());
    for (std::size_t i = 0; i < sites.k(); ++i) {
        auto c = group_centroids.row(sites.group_of(i));
        std::copy(c.begin(), c.end(), slots.row(i).begin());
    }
    return slots;
}

}  // namespace

RunResult run(const WeightedDataset& data, const ClusterBounds& bounds, Matrix initial_sites,
              const RunConfig& config) {
    config.validate();
    const std::size_t k = bounds.k();
    if (k < 2) throw std::invalid_argument("run: need k >= 2 clusters");
    if (data.size() < k) throw std::invalid_argument("run: need n >= k points");
    if (initial_sites.rows() != k || initial_sites.cols() != data.dim())
        throw std::invalid_argument("run: initial sites must be k x d");
    bounds.require_total_weight(data.total_weight());

    RunTrace trace;
    Matrix slots = std::move(initial_sites);
    std::optional<SimplexBasis> warm;
    std::optional<LPSolution> solution;
    double prev_theta = std::numeric_limits<double>::infinity();
    double prev_intermediate = std::numeric_limits<double>::infinity();

    for (std::size_t iter = 0; iter < config.max_iterations; ++iter) {
        SiteSet sites = SiteSet::group(slots, config.site_merge_tol);
        PartitionLP lp = PartitionLP::build(data, sites, bounds);
        LPSolution sol = solve_vertex(lp, warm);

        if (config.check_descent) {
            // Theta(C^l, S^l) >= Theta(C^l, S^(l+1)) >= Theta(C^(l+1), S^(l+1)).
            if (sol.theta > prev_intermediate + 1e-9)
                throw std::logic_error("descent violated: LP objective above the previous "
                                       "fixed-assignment value");
        }

        IterationRecord rec;
        rec.theta = sol.theta;
        rec.squared_error = sol.theta + data.weighted_squared_norm();
        rec.fractional = sol.assignment.fractional_count(config.zero_tol);
        rec.pivots = sol.pivots;
        rec.sites = sites.group_sites();
        rec.groups = sites.groups();
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

        Matrix group_centroids = centroids(solution->assignment, data);
        if (config.check_descent) {
            SiteSet next = SiteSet::group(group_centroids, config.site_merge_tol);
            prev_intermediate = next.group_count() == solution->assignment.clusters()
                                    ? objective_theta(solution->assignment, data, next)
                                    : std::numeric_limits<double>::infinity();
            if (prev_intermediate > solution->theta + 1e-9)
                throw std::logic_error("descent violated: centroid update increased the "
                                       "fixed-assignment objective");
        }
        slots = slots_from_centroids(group_centroids, sites);
    }

    RunResult result{solution->assignment, centroids(solution->assignment, data),
                     sigma_from_duals(*solution, data, config.zero_tol), std::move(trace)};
    return result;
}

ClassicalResult classical_kmeans(const WeightedDataset& data, Matrix initial_sites,
                                 std::size_t max_iterations, std::uint64_t seed) {
    const std::size_t k = initial_sites.rows(), n = data.size(), d = data.dim();
    if (k < 1 || k > n) throw std::invalid_argument("kmeans: need 1 <= k <= n");
    if (initial_sites.cols() != d) throw std::invalid_argument("kmeans: site dimension mismatch");

    std::mt19937_64 rng(seed);
    Matrix sites = std::move(initial_sites);
    std::vector<std::size_t> labels(n, 0), prev_labels;
    ClassicalResult out;

    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        for (std::size_t j = 0; j < n; ++j) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t i = 0; i < k; ++i) {
                const double dist = squared_distance(data.point(j), sites.row(i));
                if (dist < best) {
                    best = dist;
                    arg = i;
                }
            }
            labels[j] = arg;
        }
        out.label_history.push_back(labels);
        ++out.iterations;

        std::vector<std::size_t> count(k, 0);
        Matrix next(k, d);
        for (std::size_t j = 0; j < n; ++j) {
            ++count[labels[j]];
            auto x = data.point(j);
            for (std::size_t t = 0; t < d; ++t) next(labels[j], t) += x[t];
        }
        for (std::size_t i = 0; i < k; ++i) {
            if (count[i] > 0) {
                for (std::size_t t = 0; t < d; ++t) next(i, t) /= static_cast<double>(count[i]);
                continue;
            }
            // Empty cluster: reseed to a random data point distinct from all sites.
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            for (int attempt = 0; attempt < 1000; ++attempt) {
                const std::size_t l = pick(rng);
                bool clashes = false;
                for (std::size_t i2 = 0; i2 < k && !clashes; ++i2) {
                    const Matrix& ref = i2 < i ? next : sites;
                    clashes = squared_distance(data.point(l), ref.row(i2)) == 0.0;
                }
                if (!clashes) {
                    auto x = data.point(l);
                    std::copy(x.begin(), x.end(), next.row(i).begin());
                    break;
                }
            }
        }

        const bool settled = sites.data() == next.data();
        sites = std::move(next);
        if (settled || (iter > 0 && labels == prev_labels)) break;
        prev_labels = labels;
    }

    Matrix y(k, n);
    for (std::size_t j = 0; j < n; ++j) y(labels[j], j) = 1.0;
    out.assignment = Assignment(std::move(y));
    out.centroids = std::move(sites);
    return out;
}

MultiStartResult multi_start(const WeightedDataset& data, const ClusterBounds& bounds,
                             std::size_t k, const RunConfig& config,
                             std::span<const std::uint64_t> seeds, std::size_t workers) {
    if (seeds.empty()) throw std::invalid_argument("multi_start: need at least one seed");
    workers = std::max<std::size_t>(workers, 1);

    if (config.strategy == InitStrategy::given)
        throw std::invalid_argument("multi_start: passthrough sites need a single explicit run");
    auto one = [&](std::uint64_t seed) {
        RunConfig local = config;
        local.seed = seed;
        Matrix sites = init_sites(data, k, local.strategy, seed);
        return run(data, bounds, std::move(sites), local);
    };

    std::vector<std::optional<RunResult>> results(seeds.size());
    for (std::size_t base = 0; base < seeds.size(); base += workers) {
        const std::size_t batch = std::min(workers, seeds.size() - base);
        std::vector<std::future<RunResult>> futures;
        futures.reserve(batch);
        for (std::size_t t = 0; t < batch; ++t)
            futures.push_back(std::async(std::launch::async, one, seeds[base + t]));
        for (std::size_t t = 0; t < batch; ++t) results[base + t] = futures[t].get();
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < results.size(); ++i) {
        const double cur = results[i]->trace.iterations.back().theta;
        const double inc = results[best]->trace.iterations.back().theta;
        if (cur < inc - 1e-12) best = i;
    }

    MultiStartResult out{std::move(*results[best]), best, {}};
    out.traces.reserve(results.size());
    for (std::size_t i = 0; i < results.size(); ++i)
        out.traces.push_back(i == best ? out.best.trace : std::move(results[i]->trace));
    return out;
}

}  // namespace wbkm
