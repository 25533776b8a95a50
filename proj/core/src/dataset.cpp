#include "wbkm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wbkm {

namespace {

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

WeightedDataset::WeightedDataset(Matrix points, Vec weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
    const std::size_t n = points_.rows();
    if (n == 0 || points_.cols() == 0)
        throw std::invalid_argument("dataset: need at least one point with dimension >= 1");
    if (weights_.size() != n)
        throw std::invalid_argument("dataset: weight count does not match point count");
    for (std::size_t j = 0; j < n; ++j) {
        if (!all_finite(points_.row(j)))
            throw std::invalid_argument("dataset: non-finite coordinate in row " + std::to_string(j));
        if (!std::isfinite(weights_[j]) || weights_[j] <= 0.0)
            throw std::invalid_argument("dataset: weight must be positive, row " + std::to_string(j));
    }

    // Exact-coordinate duplicate detection via a lexicographic sort.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto lex_less = [this](std::size_t a, std::size_t b) {
        auto ra = points_.row(a), rb = points_.row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    };
    std::sort(order.begin(), order.end(), lex_less);
    for (std::size_t t = 1; t < n; ++t) {
        auto ra = points_.row(order[t - 1]), rb = points_.row(order[t]);
        if (std::equal(ra.begin(), ra.end(), rb.begin())) {
            throw std::invalid_argument(
                "dataset: rows " + std::to_string(std::min(order[t - 1], order[t])) + " and " +
                std::to_string(std::max(order[t - 1], order[t])) +
                " hold the same point; merge them into one point with the summed weight");
        }
    }

    total_weight_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j)
        weighted_sq_norm_ += weights_[j] * squared_norm(points_.row(j));
}

ClusterBounds::ClusterBounds(Vec lower, Vec upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.empty() || lower_.size() != upper_.size())
        throw std::invalid_argument("bounds: lower/upper must be non-empty and equally sized");
    for (std::size_t i = 0; i < lower_.size(); ++i) {
        if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]))
            throw std::invalid_argument("bounds: non-finite bound for cluster " + std::to_string(i));
        if (lower_[i] <= 0.0)
            throw std::invalid_argument("bounds: lower bound must be positive, cluster " + std::to_string(i));
        if (lower_[i] > upper_[i])
            throw std::invalid_argument("bounds: lower exceeds upper for cluster " + std::to_string(i));
    }
}

double ClusterBounds::total_lower() const {
    return std::accumulate(lower_.begin(), lower_.end(), 0.0);
}

double ClusterBounds::total_upper() const {
    return std::accumulate(upper_.begin(), upper_.end(), 0.0);
}

bool ClusterBounds::admits_total_weight(double total) const {
    return total_lower() <= total && total <= total_upper();
}

void ClusterBounds::require_total_weight(double total) const {
    if (total_lower() > total)
        throw std::invalid_argument("bounds: infeasible, sum of lower bounds exceeds the total weight "
                                    "(need sum kappa- <= sum omega <= sum kappa+)");
    if (total_upper() < total)
        throw std::invalid_argument("bounds: infeasible, sum of upper bounds is below the total weight "
                                    "(need sum kappa- <= sum omega <= sum kappa+)");
}

ClusterBounds ClusterBounds::balanced(std::size_t k, double total_weight, double slack_fraction) {
    if (k == 0) throw std::invalid_argument("bounds: k must be positive");
    if (slack_fraction < 0.0) throw std::invalid_argument("bounds: slack must be non-negative");
    const double share = total_weight / static_cast<double>(k);
    Vec lo(k, (1.0 - slack_fraction) * share);
    Vec up(k, (1.0 + slack_fraction) * share);
    return ClusterBounds(std::move(lo), std::move(up));
}

}  // namespace wbkm
