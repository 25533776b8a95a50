#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wbkm/constraints.hpp"
#include "wbkm/kernel.hpp"
#include "wbkm/kmeans.hpp"

namespace wbkm::cli {

/// Everything needed to run one clustering job; resolved from a JSON config
/// document and/or command-line flags.
struct JobSpec {
    std::string input;
    std::size_t k = 0;

    // Bounds: either explicit per-cluster lists or the balanced +/- slack shorthand.
    std::optional<Vec> lower;
    std::optional<Vec> upper;
    std::optional<double> balance_slack;

    std::optional<KernelFunction> kernel;
    std::vector<std::pair<std::size_t, std::size_t>> must_link;

    InitStrategy strategy = InitStrategy::sample_points;
    std::optional<std::string> sites_path;  // for the passthrough strategy
    std::vector<std::uint64_t> seeds{0};

    std::size_t max_iterations = 10000;
    double objective_tol = 1e-9;
    double site_merge_tol = 1e-9;
    double zero_tol = 1e-9;

    std::string output_dir = ".";
    bool record_assignments = false;
    std::size_t workers = 1;
};

/// Parses the config document; unknown keys are rejected.
JobSpec jobspec_from_json(const nlohmann::json& config);

/// Exit codes of execute().
inline constexpr int kExitConverged = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitIterationCap = 2;
inline constexpr int kExitInfeasible = 3;  // verify only

/// Runs the job and writes summary.json, assignment.csv, sites.json,
/// trace.json and certificate.json into the output directory.
int execute(const JobSpec& job);

/// Certifies an externally provided assignment against a power diagram found
/// by the sigma feasibility search. Writes certificate.json.
int execute_verify(const std::string& points_path, const std::string& sites_path,
                   const std::string& assignment_path, const std::string& output_dir,
                   double zero_tol);

/// Tiny-instance debugging: exhaustive vertex enumeration plus the integral
/// brute force, printed as JSON on stdout.
int execute_oracle(const JobSpec& job, const std::string& sites_path);

}  // namespace wbkm::cli
