#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wbkm/assignment.hpp"
#include "wbkm/dataset.hpp"
#include "wbkm/lp.hpp"
#include "wbkm/power_diagram.hpp"
#include "wbkm/sites.hpp"

namespace wbkm {

enum class InitStrategy { sample_points, weighted_spread, given };

struct RunConfig {
    std::size_t max_iterations = 10000;
    double objective_tol = 1e-9;   // stop once Theta no longer drops by more
    double site_merge_tol = kSiteMergeTol;
    double zero_tol = kZeroTol;
    std::uint64_t seed = 0;
    InitStrategy strategy = InitStrategy::sample_points;
    bool record_assignments = false;  // keep per-iteration assignments in the trace
    bool check_descent = false;       // verify the monotone objective chain at runtime

    void validate() const;
};

struct IterationRecord {
    double theta = 0.0;
    double squared_error = 0.0;
    std::size_t fractional = 0;
    std::size_t pivots = 0;
    Matrix sites;  // group sites used by this iteration's LP (empty in kernel runs)
    std::vector<std::vector<std::size_t>> groups;
    std::optional<Assignment> assignment;
};

enum class RunVerdict { converged, iteration_cap };

struct RunTrace {
    std::vector<IterationRecord> iterations;
    RunVerdict verdict = RunVerdict::iteration_cap;
};

struct RunResult {
    Assignment assignment;  // rows follow the final group structure
    Matrix centroids;       // final centers of gravity, one row per group
    PowerDiagram diagram;   // sites of the final LP with sigma from its duals
    RunTrace trace;
};

/// Initial sites: k distinct data points sampled uniformly, or by
/// weighted-distance-proportional spreading.
Matrix init_sites(const WeightedDataset& data, std::size_t k, InitStrategy strategy,
                  std::uint64_t seed);

/// Passthrough for user-provided sites; validated for shape only (coincident
/// sites are legal and handled by merging).
Matrix init_sites(const WeightedDataset& data, std::size_t k, Matrix user_sites);

/// The weight-balanced k-means loop: alternates the assignment LP (warm
/// started on the previous basis) with centroid updates, re-deriving merged
/// site groups each iteration, until the objective stops decreasing.
RunResult run(const WeightedDataset& data, const ClusterBounds& bounds, Matrix initial_sites,
              const RunConfig& config);

struct ClassicalResult {
    Assignment assignment;
    Matrix centroids;
    std::vector<std::vector<std::size_t>> label_history;  // nearest-site labels per iteration
    std::size_t iterations = 0;
};

/// Plain Lloyd iterations on the unweighted interpretation of the data;
/// empty clusters are reseeded to a random data point distinct from all
/// sites. Oracle for the unconstrained limit of run().
ClassicalResult classical_kmeans(const WeightedDataset& data, Matrix initial_sites,
                                 std::size_t max_iterations = 1000, std::uint64_t seed = 0);

struct MultiStartResult {
    RunResult best;
    std::size_t best_index = 0;
    std::vector<RunTrace> traces;
};

/// Independent runs over a seed list, executed on up to `workers` threads;
/// the best final objective wins, ties resolved by the earliest seed.
MultiStartResult multi_start(const WeightedDataset& data, const ClusterBounds& bounds,
                             std::size_t k, const RunConfig& config,
                             std::span<const std::uint64_t> seeds, std::size_t workers = 1);

}  // namespace wbkm
