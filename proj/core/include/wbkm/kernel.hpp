#pragma once

#include <span>
#include <vector>

#include "wbkm/assignment.hpp"
#include "wbkm/dataset.hpp"
#include "wbkm/kmeans.hpp"
#include "wbkm/power_diagram.hpp"

namespace wbkm {

/// Symmetric positive-semidefinite kernel Phi(u,v) = phi(u).phi(v).
struct KernelFunction {
    enum class Kind { linear, polynomial, gaussian };

    Kind kind = Kind::linear;
    int degree = 2;          // polynomial
    double offset = 0.0;     // polynomial
    double bandwidth = 1.0;  // gaussian

    static KernelFunction linear() { return {}; }
    static KernelFunction polynomial(int degree, double offset);
    static KernelFunction gaussian(double bandwidth);

    double operator()(std::span<const double> u, std::span<const double> v) const;
};

Matrix gram_matrix(const WeightedDataset& data, const KernelFunction& kernel);

/// Min-eigenvalue check within `tol`, via a pivoted Cholesky of G + tol*I.
bool is_positive_semidefinite(const Matrix& sym, double tol = 1e-8);

/// A site either as an explicit point in data space or as a convex
/// combination over the data points (a feature-space center of gravity).
class ImplicitSite {
public:
    static ImplicitSite explicit_point(Vec point);
    /// Coefficients must be nonnegative and sum to 1 (within 1e-9).
    static ImplicitSite combination(Vec alpha);

    bool is_explicit() const { return is_explicit_; }
    const Vec& point() const { return values_; }
    const Vec& alpha() const { return values_; }

private:
    ImplicitSite(Vec values, bool is_explicit) : values_(std::move(values)), is_explicit_(is_explicit) {}
    Vec values_;
    bool is_explicit_;
};

/// Kernel products against a fixed dataset; the Gram matrix is computed once.
class KernelSpace {
public:
    KernelSpace(const WeightedDataset& data, KernelFunction kernel);

    const Matrix& gram() const { return gram_; }
    const WeightedDataset& data() const { return *data_; }

    double point_self(std::size_t j) const { return gram_(j, j); }
    double site_point(const ImplicitSite& s, std::size_t j) const;
    double site_self(const ImplicitSite& s) const;
    double site_site(const ImplicitSite& a, const ImplicitSite& b) const;
    /// Squared feature-space distance between two sites.
    double site_distance_sq(const ImplicitSite& a, const ImplicitSite& b) const;

private:
    const WeightedDataset* data_;
    KernelFunction kernel_;
    Matrix gram_;
};

/// Cost matrix of the kernelized assignment LP over already-grouped sites:
/// c_ij = w_j (Phi(s_i,s_i) - 2 Phi(x_j,s_i)).
Matrix kernel_lp_costs(const KernelSpace& space, const std::vector<ImplicitSite>& grouped_sites);

struct KernelRunResult {
    Assignment assignment;
    Matrix site_coefficients;  // implicit centroids, one alpha row per group
    std::vector<std::vector<std::size_t>> groups;
    RunTrace trace;
    FeasibilityCertificate certificate;  // power cells certified in feature space
};

/// Weight-balanced k-means in the feature space induced by `kernel`. Initial
/// sites are explicit data-space points; after the first update all sites are
/// coefficient vectors and the centers in R^d are never materialized.
KernelRunResult kernel_run(const WeightedDataset& data, const ClusterBounds& bounds,
                           Matrix initial_sites, const KernelFunction& kernel,
                           const RunConfig& config);

/// Same, starting from data points given by index.
KernelRunResult kernel_run(const WeightedDataset& data, const ClusterBounds& bounds,
                           const std::vector<std::size_t>& initial_point_indices,
                           const KernelFunction& kernel, const RunConfig& config);

}  // namespace wbkm
