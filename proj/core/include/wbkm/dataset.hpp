#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wbkm/geometry.hpp"

namespace wbkm {

/// Default cutoff below which an assignment fraction counts as zero.
inline constexpr double kZeroTol = 1e-9;
/// Default tolerance for treating two sites as coincident.
inline constexpr double kSiteMergeTol = 1e-9;

/// Distinct points x_1..x_n in R^d with positive weights.
class WeightedDataset {
public:
    /// `points` is n x d. Throws std::invalid_argument on non-positive
    /// weights or duplicate points (duplicates should be merged into one
    /// point carrying the summed weight).
    WeightedDataset(Matrix points, Vec weights);

    std::size_t size() const { return points_.rows(); }
    std::size_t dim() const { return points_.cols(); }

    std::span<const double> point(std::size_t j) const { return points_.row(j); }
    double weight(std::size_t j) const { return weights_[j]; }
    const Vec& weights() const { return weights_; }
    const Matrix& points() const { return points_; }
    double total_weight() const { return total_weight_; }

    /// sum_j w_j * x_j^T x_j, the constant offset between the simplified and
    /// the plain least-squares objective.
    double weighted_squared_norm() const { return weighted_sq_norm_; }

private:
    Matrix points_;
    Vec weights_;
    double total_weight_ = 0.0;
    double weighted_sq_norm_ = 0.0;
};

/// Per-cluster size bounds kappa^- <= kappa^+.
class ClusterBounds {
public:
    ClusterBounds(Vec lower, Vec upper);

    std::size_t k() const { return lower_.size(); }
    double lower(std::size_t i) const { return lower_[i]; }
    double upper(std::size_t i) const { return upper_[i]; }
    const Vec& lower() const { return lower_; }
    const Vec& upper() const { return upper_; }

    double total_lower() const;
    double total_upper() const;

    /// The LP feasibility condition: sum kappa^- <= total <= sum kappa^+.
    bool admits_total_weight(double total) const;
    /// Throws std::invalid_argument naming the violated side if infeasible.
    void require_total_weight(double total) const;

    /// Uniform bounds (1 -/+ slack) * total/k for all clusters.
    static ClusterBounds balanced(std::size_t k, double total_weight, double slack_fraction);

private:
    Vec lower_;
    Vec upper_;
};

}  // namespace wbkm
