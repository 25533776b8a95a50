#include "wbkm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace wbkm {

namespace {

constexpr double kFeasSlack = 1e-9;

// Solves the square system A x = b in place; returns false when singular.
bool gauss_solve(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::abs(a[col * n + col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double v = std::abs(a[r * n + col]);
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best < 1e-11) return false;
        if (piv != col) {
            for (std::size_t c = col; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
            std::swap(b[piv], b[col]);
        }
        const double inv = 1.0 / a[col * n + col];
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] * inv;
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t col = n; col-- > 0;) {
        double s = b[col];
        for (std::size_t c = col + 1; c < n; ++c) s -= a[col * n + c] * b[c];
        b[col] = s / a[col * n + col];
    }
    return true;
}

}  // namespace

TinyInstance::TinyInstance(WeightedDataset data_in, ClusterBounds bounds_in, SiteSet sites_in)
    : data(std::move(data_in)), bounds(std::move(bounds_in)), sites(std::move(sites_in)) {
    if (sites.k() * data.size() > 12)
        throw std::invalid_argument("oracle: instance exceeds the k*n <= 12 cap");
    if (bounds.k() != sites.k())
        throw std::invalid_argument("oracle: bounds count does not match sites");
    if (sites.dim() != data.dim())
        throw std::invalid_argument("oracle: dimension mismatch");
}

VertexEnumeration enumerate_optimal_vertices(const TinyInstance& instance) {
    VertexEnumeration out;
    const auto& data = instance.data;
    const SiteSet& sites = instance.sites;
    const std::size_t m = sites.group_count(), n = data.size();
    const std::size_t rows = m + n, ny = m * n, nvars = ny + m;

    ClusterBounds grouped = sites.grouped_bounds(instance.bounds);
    if (!grouped.admits_total_weight(data.total_weight())) {
        out.feasible = false;
        return out;
    }

    // Unsimplified costs, independent of the LP construction used by the solver.
    Matrix cost(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            cost(i, j) = data.weight(j) * squared_distance(data.point(j), sites.group_site(i));

    Vec ranges(m);
    for (std::size_t i = 0; i < m; ++i) ranges[i] = grouped.upper(i) - grouped.lower(i);

    std::vector<std::pair<double, Matrix>> feasible_vertices;

    // All column subsets of size rows, in lexicographic order.
    std::vector<std::size_t> pick(rows);
    for (std::size_t t = 0; t < rows; ++t) pick[t] = t;
    std::vector<double> a, rhs;
    while (true) {
        // Every point row needs a basic y column, every range row any entry.
        bool plausible = true;
        {
            std::uint32_t point_cover = 0, range_cover = 0;
            for (std::size_t v : pick) {
                if (v < ny) {
                    range_cover |= 1u << (v / n);
                    point_cover |= 1u << (v % n);
                } else {
                    range_cover |= 1u << (v - ny);
                }
            }
            plausible = point_cover == (n >= 32 ? ~0u : ((1u << n) - 1)) &&
                        range_cover == (m >= 32 ? ~0u : ((1u << m) - 1));
        }

        if (plausible) {
            std::vector<std::size_t> nonbasic_slacks;
            for (std::size_t i = 0; i < m; ++i)
                if (std::find(pick.begin(), pick.end(), ny + i) == pick.end())
                    nonbasic_slacks.push_back(i);

            const std::size_t patterns = std::size_t{1} << nonbasic_slacks.size();
            for (std::size_t pat = 0; pat < patterns; ++pat) {
                rhs.assign(rows, 0.0);
                for (std::size_t i = 0; i < m; ++i) rhs[i] = grouped.lower(i);
                for (std::size_t j = 0; j < n; ++j) rhs[m + j] = 1.0;
                bool pattern_ok = true;
                Vec slack_val(m, 0.0);
                for (std::size_t t = 0; t < nonbasic_slacks.size(); ++t) {
                    const std::size_t i = nonbasic_slacks[t];
                    if (pat & (std::size_t{1} << t)) {
                        if (ranges[i] <= 0.0) {
                            pattern_ok = false;
                            break;
                        }
                        slack_val[i] = ranges[i];
                        rhs[i] += ranges[i];  // slack column is -1
                    }
                }
                if (!pattern_ok) continue;

                a.assign(rows * rows, 0.0);
                for (std::size_t col = 0; col < rows; ++col) {
                    const std::size_t v = pick[col];
                    if (v < ny) {
                        const std::size_t i = v / n, j = v % n;
                        a[i * rows + col] = data.weight(j);
                        a[(m + j) * rows + col] = 1.0;
                    } else {
                        a[(v - ny) * rows + col] = -1.0;
                    }
                }
                std::vector<double> x(rhs);
                std::vector<double> awork(a);
                if (!gauss_solve(awork, x, rows)) continue;

                bool feas = true;
                Matrix y(m, n);
                Vec slack(slack_val);
                for (std::size_t col = 0; col < rows && feas; ++col) {
                    const std::size_t v = pick[col];
                    const double val = x[col];
                    if (v < ny) {
                        if (val < -kFeasSlack || val > 1.0 + kFeasSlack) feas = false;
                        y(v / n, v % n) = val;
                    } else {
                        const std::size_t i = v - ny;
                        if (val < -kFeasSlack || val > ranges[i] + kFeasSlack) feas = false;
                        slack[i] = val;
                    }
                }
                if (!feas) continue;

                double value = 0.0;
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < n; ++j)
                        value += cost(i, j) * std::clamp(y(i, j), 0.0, 1.0);
                for (double& e : y.data()) e = std::clamp(e, 0.0, 1.0);
                feasible_vertices.emplace_back(value, std::move(y));
            }
        }

        // next combination
        std::size_t t = rows;
        while (t > 0 && pick[t - 1] == nvars - rows + (t - 1)) --t;
        if (t == 0) break;
        ++pick[t - 1];
        for (std::size_t s = t; s < rows; ++s) pick[s] = pick[s - 1] + 1;
    }

    if (feasible_vertices.empty()) {
        out.feasible = false;  // cannot happen when the global condition holds
        return out;
    }

    double best = feasible_vertices.front().first;
    for (const auto& [value, y] : feasible_vertices) best = std::min(best, value);

    out.feasible = true;
    out.squared_error = best;
    out.theta = best - data.weighted_squared_norm();
    for (auto& [value, y] : feasible_vertices) {
        if (value > best + 1e-9) continue;
        bool duplicate = false;
        for (const Assignment& seen : out.vertices) {
            double dist = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    dist = std::max(dist, std::abs(seen(i, j) - y(i, j)));
            if (dist <= 1e-7) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) out.vertices.emplace_back(std::move(y));
    }
    return out;
}

IntegralSearch brute_force_integral(const TinyInstance& instance) {
    IntegralSearch out;
    const auto& data = instance.data;
    const SiteSet& sites = instance.sites;
    const std::size_t m = sites.group_count(), n = data.size();

    double combos = std::pow(static_cast<double>(m), static_cast<double>(n));
    if (combos > 60000.0)
        throw std::invalid_argument("oracle: k^n exceeds the 60000 integral enumeration gate");

    ClusterBounds grouped = sites.grouped_bounds(instance.bounds);
    Matrix cost(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            cost(i, j) = data.weight(j) * squared_distance(data.point(j), sites.group_site(i));

    std::vector<std::size_t> label(n, 0);
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_label;
    while (true) {
        Vec sizes(m, 0.0);
        double value = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            sizes[label[j]] += data.weight(j);
            value += cost(label[j], j);
        }
        bool balanced = true;
        for (std::size_t i = 0; i < m && balanced; ++i)
            balanced = sizes[i] >= grouped.lower(i) - kFeasSlack &&
                       sizes[i] <= grouped.upper(i) + kFeasSlack;
        if (balanced && value < best) {
            best = value;
            best_label = label;
        }

        std::size_t j = 0;
        while (j < n && ++label[j] == m) label[j++] = 0;
        if (j == n) break;
    }

    if (best_label.empty()) return out;
    out.found = true;
    out.squared_error = best;
    Matrix y(m, n);
    for (std::size_t j = 0; j < n; ++j) y(best_label[j], j) = 1.0;
    out.assignment = Assignment(std::move(y));
    return out;
}

}  // namespace wbkm
