#pragma once

#include <optional>
#include <vector>

#include "wbkm/assignment.hpp"
#include "wbkm/dataset.hpp"
#include "wbkm/sites.hpp"

namespace wbkm {

/// Instance small enough for exhaustive verification (k * n <= 12).
struct TinyInstance {
    TinyInstance(WeightedDataset data, ClusterBounds bounds, SiteSet sites);

    WeightedDataset data;
    ClusterBounds bounds;
    SiteSet sites;
};

struct VertexEnumeration {
    bool feasible = false;
    double squared_error = 0.0;  // optimal sum_ij y_ij w_j ||x_j - s_i||^2
    double theta = 0.0;          // squared_error minus sum_j w_j x_j.x_j
    std::vector<Assignment> vertices;  // every optimal vertex, deduplicated
};

/// Brute-force LP verifier: enumerates candidate bases of the constraint
/// system (range rows with slacks plus point equalities), solves each square
/// subsystem, keeps the feasible ones and minimizes the unsimplified
/// least-squares objective. Independent of the simplex path.
VertexEnumeration enumerate_optimal_vertices(const TinyInstance& instance);

struct IntegralSearch {
    bool found = false;
    double squared_error = 0.0;
    std::optional<Assignment> assignment;
};

/// Enumerates all k^n integral assignments (gate: k^n <= 60000), filters by
/// the size bounds and minimizes. `found == false` means no integral
/// assignment is weight-balanced.
IntegralSearch brute_force_integral(const TinyInstance& instance);

}  // namespace wbkm
