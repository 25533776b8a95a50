#include "wbkm_cli/job.hpp"

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>

#include "wbkm/oracle.hpp"
#include "wbkm/power_diagram.hpp"
#include "wbkm_cli/io.hpp"

namespace wbkm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

KernelFunction kernel_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "linear") return KernelFunction::linear();
    if (type == "polynomial")
        return KernelFunction::polynomial(j.at("degree").get<int>(),
                                          j.at("offset").get<double>());
    if (type == "gaussian") return KernelFunction::gaussian(j.at("bandwidth").get<double>());
    throw std::invalid_argument("config: unknown kernel type '" + type + "'");
}

InitStrategy strategy_from_name(const std::string& name) {
    if (name == "sample") return InitStrategy::sample_points;
    if (name == "spread") return InitStrategy::weighted_spread;
    if (name == "given") return InitStrategy::given;
    throw std::invalid_argument("config: unknown init strategy '" + name + "'");
}

json site_set_to_json(const SiteSet& sites) {
    json groups = json::array();
    for (const auto& g : sites.groups()) groups.push_back(g);
    json rows = json::array();
    for (std::size_t i = 0; i < sites.group_count(); ++i) {
        auto s = sites.group_site(i);
        rows.push_back(Vec(s.begin(), s.end()));
    }
    return json{{"groups", groups}, {"sites", rows}, {"merged", sites.merged()}};
}

json certificate_to_json(const FeasibilityCertificate& cert) {
    json out;
    switch (cert.verdict) {
        case Feasibility::infeasible: out["verdict"] = "infeasible"; break;
        case Feasibility::feasible: out["verdict"] = "feasible"; break;
        case Feasibility::strongly_feasible: out["verdict"] = "strongly_feasible"; break;
    }
    if (cert.violation) {
        out["witness"] = {{"point", cert.violation->point},
                          {"assigned", cert.violation->assigned},
                          {"better", cert.violation->better},
                          {"margin", cert.violation->margin}};
    }
    if (!cert.detail.empty()) out["detail"] = cert.detail;
    if (cert.verdict == Feasibility::strongly_feasible) {
        json forest = json::array();
        for (const auto& edge : cert.forest)
            forest.push_back({{"point", edge.point}, {"clusters", edge.groups}});
        out["label_forest"] = forest;
    }
    return out;
}

json trace_to_json(const RunTrace& trace, std::uint64_t seed) {
    json iterations = json::array();
    for (const auto& rec : trace.iterations) {
        json it{{"theta", rec.theta},
                {"squared_error", rec.squared_error},
                {"fractional", rec.fractional},
                {"pivots", rec.pivots}};
        json groups = json::array();
        for (const auto& g : rec.groups) groups.push_back(g);
        it["groups"] = groups;
        if (!rec.sites.empty()) {
            json sites = json::array();
            for (std::size_t r = 0; r < rec.sites.rows(); ++r) {
                auto row = rec.sites.row(r);
                sites.push_back(Vec(row.begin(), row.end()));
            }
            it["sites"] = sites;
        }
        if (rec.assignment) {
            json entries = json::array();
            for (std::size_t i = 0; i < rec.assignment->clusters(); ++i)
                for (std::size_t j = 0; j < rec.assignment->points(); ++j)
                    if ((*rec.assignment)(i, j) > 0.0)
                        entries.push_back({i, j, (*rec.assignment)(i, j)});
            it["assignment"] = entries;
        }
        iterations.push_back(std::move(it));
    }
    return json{{"seed", seed},
                {"verdict", trace.verdict == RunVerdict::converged ? "converged" : "iteration_cap"},
                {"iterations", iterations}};
}

void write_json(const json& doc, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("io: cannot write '" + path.string() + "'");
    out << doc.dump(2) << '\n';
}

ClusterBounds resolve_bounds(const JobSpec& job, double total_weight) {
    if (job.lower && job.upper) {
        if (job.lower->size() != job.k || job.upper->size() != job.k)
            throw std::invalid_argument("bounds: need exactly k lower and k upper values");
        return ClusterBounds(*job.lower, *job.upper);
    }
    if (job.lower || job.upper)
        throw std::invalid_argument("bounds: lower and upper must be given together");
    if (!job.balance_slack)
        throw std::invalid_argument("bounds: provide lower/upper lists or a balance slack");
    return ClusterBounds::balanced(job.k, total_weight, *job.balance_slack);
}

Matrix initial_sites_for(const JobSpec& job, const WeightedDataset& data, std::uint64_t seed) {
    if (job.strategy == InitStrategy::given) {
        if (!job.sites_path)
            throw std::invalid_argument("init: the passthrough strategy needs --sites");
        return init_sites(data, job.k, read_matrix(*job.sites_path, data.dim()));
    }
    return init_sites(data, job.k, job.strategy, seed);
}

}  // namespace

JobSpec jobspec_from_json(const json& config) {
    JobSpec job;
    for (const auto& [key, value] : config.items()) {
        if (key == "input") job.input = value.get<std::string>();
        else if (key == "k") job.k = value.get<std::size_t>();
        else if (key == "bounds") {
            if (value.contains("lower")) job.lower = value.at("lower").get<Vec>();
            if (value.contains("upper")) job.upper = value.at("upper").get<Vec>();
            if (value.contains("balance_slack"))
                job.balance_slack = value.at("balance_slack").get<double>();
        } else if (key == "kernel") job.kernel = kernel_from_json(value);
        else if (key == "must_link") {
            for (const auto& pair : value)
                job.must_link.emplace_back(pair.at(0).get<std::size_t>(),
                                           pair.at(1).get<std::size_t>());
        } else if (key == "init") {
            if (value.contains("strategy"))
                job.strategy = strategy_from_name(value.at("strategy").get<std::string>());
            if (value.contains("sites")) job.sites_path = value.at("sites").get<std::string>();
            if (value.contains("seed")) job.seeds = {value.at("seed").get<std::uint64_t>()};
            if (value.contains("seeds")) job.seeds = value.at("seeds").get<std::vector<std::uint64_t>>();
        } else if (key == "tolerances") {
            if (value.contains("objective")) job.objective_tol = value.at("objective").get<double>();
            if (value.contains("site_merge")) job.site_merge_tol = value.at("site_merge").get<double>();
            if (value.contains("zero")) job.zero_tol = value.at("zero").get<double>();
        } else if (key == "max_iterations") job.max_iterations = value.get<std::size_t>();
        else if (key == "output_dir") job.output_dir = value.get<std::string>();
        else if (key == "record_assignments") job.record_assignments = value.get<bool>();
        else if (key == "workers") job.workers = value.get<std::size_t>();
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    return job;
}

int execute(const JobSpec& job) {
    if (job.k < 2) throw std::invalid_argument("job: k must be at least 2");
    if (job.seeds.empty()) throw std::invalid_argument("job: need at least one seed");

    WeightedDataset original = ingest(job.input);
    ClusterBounds bounds = resolve_bounds(job, original.total_weight());

    // Must-link preprocessing: merge linked groups into convex combinations.
    std::optional<MergedDataset> merged;
    if (!job.must_link.empty()) {
        MustLinkGroups groups = MustLinkGroups::from_pairs(original.size(), job.must_link);
        merged = merge_must_link(original, groups);
        require_group_capacity(*merged, bounds);
    }
    const WeightedDataset& data = merged ? merged->data : original;

    RunConfig config;
    config.max_iterations = job.max_iterations;
    config.objective_tol = job.objective_tol;
    config.site_merge_tol = job.site_merge_tol;
    config.zero_tol = job.zero_tol;
    config.strategy = job.strategy;
    config.record_assignments = job.record_assignments;

    fs::create_directories(job.output_dir);
    const fs::path out_dir(job.output_dir);

    json summary{{"input", job.input},
                 {"n", original.size()},
                 {"d", original.dim()},
                 {"k", job.k},
                 {"must_link_applied", merged.has_value()},
                 {"kernel", job.kernel ? json(true) : json(false)}};
    if (merged) {
        summary["reduced_n"] = data.size();
        summary["within_group_dispersion"] = merged->dispersion;
    }

    RunVerdict verdict;
    json trace_runs = json::array();
    std::size_t selected = 0;
    FeasibilityCertificate certificate;
    std::optional<Assignment> reduced_assignment;

    if (job.kernel) {
        // Kernel path: multi-start handled here, batched over the workers.
        std::vector<std::optional<KernelRunResult>> results(job.seeds.size());
        auto one = [&](std::uint64_t seed) {
            RunConfig local = config;
            local.seed = seed;
            return kernel_run(data, bounds, initial_sites_for(job, data, seed), *job.kernel,
                              local);
        };
        const std::size_t workers = std::max<std::size_t>(job.workers, 1);
        for (std::size_t base = 0; base < job.seeds.size(); base += workers) {
            const std::size_t batch = std::min(workers, job.seeds.size() - base);
            std::vector<std::future<KernelRunResult>> futures;
            for (std::size_t t = 0; t < batch; ++t)
                futures.push_back(std::async(std::launch::async, one, job.seeds[base + t]));
            for (std::size_t t = 0; t < batch; ++t) results[base + t] = futures[t].get();
        }
        for (std::size_t i = 1; i < results.size(); ++i)
            if (results[i]->trace.iterations.back().theta <
                results[selected]->trace.iterations.back().theta - 1e-12)
                selected = i;

        const KernelRunResult& best = *results[selected];
        verdict = best.trace.verdict;
        certificate = best.certificate;
        reduced_assignment = best.assignment;
        for (std::size_t i = 0; i < results.size(); ++i)
            trace_runs.push_back(trace_to_json(results[i]->trace, job.seeds[i]));

        json alpha = json::array();
        for (std::size_t g = 0; g < best.site_coefficients.rows(); ++g) {
            auto row = best.site_coefficients.row(g);
            alpha.push_back(Vec(row.begin(), row.end()));
        }
        json groups = json::array();
        for (const auto& g : best.groups) groups.push_back(g);
        write_json(json{{"site_coefficients", alpha},
                        {"groups", groups},
                        {"merged", best.groups.size() < job.k}},
                   out_dir / "sites.json");

        summary["theta"] = best.trace.iterations.back().theta;
        summary["squared_error"] = best.trace.iterations.back().squared_error;
        summary["merged_groups"] = best.groups.size() < job.k;
    } else {
        std::optional<RunResult> run_result;
        if (job.seeds.size() == 1 || job.strategy == InitStrategy::given) {
            RunConfig local = config;
            local.seed = job.seeds.front();
            run_result = run(data, bounds, initial_sites_for(job, data, local.seed), local);
            trace_runs.push_back(trace_to_json(run_result->trace, local.seed));
        } else {
            MultiStartResult multi =
                multi_start(data, bounds, job.k, config, job.seeds, job.workers);
            selected = multi.best_index;
            for (std::size_t i = 0; i < multi.traces.size(); ++i)
                trace_runs.push_back(trace_to_json(multi.traces[i], job.seeds[i]));
            run_result = std::move(multi.best);
        }

        verdict = run_result->trace.verdict;
        reduced_assignment = run_result->assignment;
        certificate =
            verify_strongly_feasible(run_result->diagram, run_result->assignment, data,
                                     job.zero_tol);

        json sites_doc = site_set_to_json(run_result->diagram.sites);
        sites_doc["sigma"] = run_result->diagram.sigma;
        json centroid_rows = json::array();
        for (std::size_t g = 0; g < run_result->centroids.rows(); ++g) {
            auto row = run_result->centroids.row(g);
            centroid_rows.push_back(Vec(row.begin(), row.end()));
        }
        sites_doc["centroids"] = centroid_rows;
        write_json(sites_doc, out_dir / "sites.json");

        summary["theta"] = run_result->trace.iterations.back().theta;
        summary["squared_error"] = run_result->trace.iterations.back().squared_error;
        summary["merged_groups"] = run_result->diagram.sites.merged();
    }

    // Expand back to the original points when must-link merging was applied.
    Assignment final_assignment =
        merged ? expand_assignment(*reduced_assignment, merged->index_map) : *reduced_assignment;
    write_assignment(final_assignment, (out_dir / "assignment.csv").string(), job.zero_tol);
    if (merged)
        summary["expanded_squared_error"] =
            summary["squared_error"].get<double>() + merged->dispersion;

    summary["fractional"] = reduced_assignment->fractional_count(job.zero_tol);
    summary["iterations"] = trace_runs[selected]["iterations"].size();
    summary["verdict"] = verdict == RunVerdict::converged ? "converged" : "iteration_cap";
    summary["seeds"] = job.seeds;
    summary["selected_run"] = selected;
    switch (certificate.verdict) {
        case Feasibility::infeasible: summary["certificate"] = "infeasible"; break;
        case Feasibility::feasible: summary["certificate"] = "feasible"; break;
        case Feasibility::strongly_feasible: summary["certificate"] = "strongly_feasible"; break;
    }

    write_json(json{{"runs", trace_runs}, {"selected", selected}}, out_dir / "trace.json");
    write_json(certificate_to_json(certificate), out_dir / "certificate.json");
    write_json(summary, out_dir / "summary.json");

    return verdict == RunVerdict::converged ? kExitConverged : kExitIterationCap;
}

int execute_verify(const std::string& points_path, const std::string& sites_path,
                   const std::string& assignment_path, const std::string& output_dir,
                   double zero_tol) {
    WeightedDataset data = ingest(points_path);
    SiteSet sites = SiteSet::group(read_matrix(sites_path, data.dim()));
    Assignment assignment =
        read_assignment(assignment_path, sites.group_count(), data.size());

    SigmaSearch search = sigma_feasibility_lp(assignment, data, sites, zero_tol);
    FeasibilityCertificate cert;
    if (search.feasible) {
        PowerDiagram diagram{sites, search.sigma};
        cert = verify_strongly_feasible(diagram, assignment, data, zero_tol);
    } else {
        cert.verdict = Feasibility::infeasible;
        cert.detail = "no sigma parameters admit this assignment";
    }

    json doc = certificate_to_json(cert);
    if (search.feasible) doc["sigma"] = search.sigma;
    fs::create_directories(output_dir);
    write_json(doc, fs::path(output_dir) / "certificate.json");
    std::cout << doc.dump(2) << '\n';
    return cert.feasible() ? kExitConverged : kExitInfeasible;
}

int execute_oracle(const JobSpec& job, const std::string& sites_path) {
    WeightedDataset data = ingest(job.input);
    ClusterBounds bounds = resolve_bounds(job, data.total_weight());
    SiteSet sites = SiteSet::group(read_matrix(sites_path, data.dim()), job.site_merge_tol);
    TinyInstance instance(std::move(data), std::move(bounds), std::move(sites));

    VertexEnumeration enumeration = enumerate_optimal_vertices(instance);
    json doc{{"feasible", enumeration.feasible}};
    if (enumeration.feasible) {
        doc["squared_error"] = enumeration.squared_error;
        doc["theta"] = enumeration.theta;
        doc["optimal_vertices"] = enumeration.vertices.size();
        json vertices = json::array();
        for (const auto& v : enumeration.vertices) {
            json entries = json::array();
            for (std::size_t i = 0; i < v.clusters(); ++i)
                for (std::size_t j = 0; j < v.points(); ++j)
                    if (v(i, j) > 0.0) entries.push_back({i, j, v(i, j)});
            vertices.push_back(entries);
        }
        doc["vertices"] = vertices;
    }

    IntegralSearch integral = brute_force_integral(instance);
    doc["integral"] = json{{"found", integral.found}};
    if (integral.found) doc["integral"]["squared_error"] = integral.squared_error;

    std::cout << doc.dump(2) << '\n';
    return kExitConverged;
}

}  // namespace wbkm::cli
