// Grid dynamic programming for the expected number of selections.
//
// Two recursions over the state grid, both advanced one horizon row at a
// time from v_0 = 0:
//
//   adaptive:  v_k(s) = (1 - h_k(s) + s) v_{k-1}(s)
//                       + integral_s^{h_k(s)} (1 + v_{k-1}(x)) dx
//   optimal:   v_k(s) = v_{k-1}(s)
//                       + integral_s^1 max{0, 1 + v_{k-1}(x) - v_{k-1}(s)} dx
//
// Integrals use the composite trapezoid over grid cells with an exact
// fractional last cell on the linear interpolant, driven by a cumulative
// prefix array of the previous row, so each row costs O(G).
//
// The row sweeps (AdaptiveRowSweep / OptimalRowSweep) hold only two live
// rows; ValueTable retains every row for interpolated lookup when the
// scale allows it.
#pragma once

#include "monoselect/grid.hpp"
#include "monoselect/policy.hpp"

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace monoselect {

// sqrt(2 k (1 - s)): value of the convex relaxation and a hard cap on the
// expected selections of every acceptance-interval policy.
inline double upper_bound(std::int64_t k, double s) {
    if (k < 0) throw std::domain_error("horizon must be >= 0");
    detail::require_unit(s, "state");
    return std::sqrt(2.0 * static_cast<double>(k) * (1.0 - s));
}

// sqrt(2 k (1 - s)) - 2 (log k + 1); may be negative for small k.
inline double lower_bound(std::int64_t k, double s) {
    detail::require_horizon(k);
    return upper_bound(k, s) - 2.0 * (std::log(static_cast<double>(k)) + 1.0);
}

namespace detail {

// Integral of the piecewise-linear interpolant of `values` from node i to x,
// x in [node(i), 1]. `prefix` is the trapezoid cumulative of `values`.
inline double segment_integral(std::span<const double> values,
                               std::span<const double> prefix,
                               std::int64_t grid_nodes, std::int64_t i, double x) {
    const auto G = grid_nodes;
    if (x >= 1.0) return prefix[G] - prefix[i];
    auto m = static_cast<std::int64_t>(x * static_cast<double>(G));
    if (m < i) m = i;
    if (m >= G) m = G - 1;
    double frac = x * static_cast<double>(G) - static_cast<double>(m);
    if (frac < 0.0) frac = 0.0;
    if (frac > 1.0) frac = 1.0;
    const double vx = values[m] + (values[m + 1] - values[m]) * frac;
    const double w = frac / static_cast<double>(G);
    return (prefix[m] - prefix[i]) + 0.5 * w * (values[m] + vx);
}

inline void trapezoid_prefix(std::span<const double> values, double dx,
                             std::span<double> prefix) {
    prefix[0] = 0.0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        prefix[i] = prefix[i - 1] + 0.5 * dx * (values[i - 1] + values[i]);
    }
}

}  // namespace detail

// ============================================================================
// Row sweeps: streaming builders, two live rows
// ============================================================================

class AdaptiveRowSweep {
public:
    explicit AdaptiveRowSweep(GridConfig config) : config_(config) {
        config_.validate();
        grid_ = config_.nodes();
        values_.assign(grid_ + 1, 0.0);
        prev_.assign(grid_ + 1, 0.0);
        prefix_.assign(grid_ + 1, 0.0);
        sqrt_one_minus_.resize(grid_ + 1);
        for (std::int64_t i = 0; i <= grid_; ++i) {
            sqrt_one_minus_[i] = std::sqrt(1.0 - config_.node(i));
        }
    }

    const GridConfig& config() const { return config_; }
    std::int64_t grid_nodes() const { return grid_; }
    std::int64_t k() const { return k_; }

    std::span<const double> values() const { return values_; }
    std::span<const double> prev_values() const { return prev_; }
    std::span<const double> prev_prefix() const { return prefix_; }
    std::span<const double> sqrt_one_minus() const { return sqrt_one_minus_; }

    // Advance to row k+1. Throws once past k_max.
    void advance() {
        if (k_ >= config_.k_max) throw std::out_of_range("sweep past k_max");
        std::swap(values_, prev_);
        detail::trapezoid_prefix(prev_, config_.spacing(), prefix_);
        ++k_;
        const double kd = static_cast<double>(k_);
        const double window_factor = std::sqrt(2.0 / kd);  // h - s = wf * sqrt(1-s)
        const double ub_factor = std::sqrt(2.0 * kd);
        const double tol = config_.error_budget();
        for (std::int64_t i = 0; i <= grid_; ++i) {
            const double s = config_.node(i);
            double h = s + window_factor * sqrt_one_minus_[i];
            if (h > 1.0) h = 1.0;
            const double integ =
                detail::segment_integral(prev_, prefix_, grid_, i, h);
            const double v = (1.0 - h + s) * prev_[i] + (h - s) + integ;
            const double cap = ub_factor * sqrt_one_minus_[i];
            if (!(v >= -tol && v <= cap + tol)) {
                throw std::runtime_error(
                    "adaptive recursion left [0, sqrt(2k(1-s))] at k=" +
                    std::to_string(k_) + " node=" + std::to_string(i));
            }
            values_[i] = v;
        }
    }

private:
    GridConfig config_;
    std::int64_t grid_ = 0;
    std::int64_t k_ = 0;
    std::vector<double> values_, prev_, prefix_, sqrt_one_minus_;
};

class OptimalRowSweep {
public:
    explicit OptimalRowSweep(GridConfig config) : config_(config) {
        config_.validate();
        grid_ = config_.nodes();
        values_.assign(grid_ + 1, 0.0);
        prev_.assign(grid_ + 1, 0.0);
        prefix_.assign(grid_ + 1, 0.0);
        edges_.assign(grid_ + 1, 1.0);
        sqrt_one_minus_.resize(grid_ + 1);
        for (std::int64_t i = 0; i <= grid_; ++i) {
            sqrt_one_minus_[i] = std::sqrt(1.0 - config_.node(i));
        }
    }

    const GridConfig& config() const { return config_; }
    std::int64_t grid_nodes() const { return grid_; }
    std::int64_t k() const { return k_; }

    std::span<const double> values() const { return values_; }
    std::span<const double> prev_values() const { return prev_; }
    std::span<const double> prev_prefix() const { return prefix_; }
    // Acceptance edge h*_k(s_i) of the row last advanced to.
    std::span<const double> edges() const { return edges_; }
    std::span<const double> sqrt_one_minus() const { return sqrt_one_minus_; }

    void advance() {
        if (k_ >= config_.k_max) throw std::out_of_range("sweep past k_max");
        std::swap(values_, prev_);
        detail::trapezoid_prefix(prev_, config_.spacing(), prefix_);
        ++k_;
        const double ub_factor = std::sqrt(2.0 * static_cast<double>(k_));
        const double dx = config_.spacing();
        const double tol = config_.error_budget();
        for (std::int64_t i = 0; i <= grid_; ++i) {
            const double s = config_.node(i);
            const double target = prev_[i];
            double h;
            if (1.0 + prev_[grid_] >= target) {
                h = 1.0;
            } else {
                // Largest node with 1 + v_{k-1} >= target; rows are
                // nonincreasing, so the predicate is monotone in the index.
                std::int64_t lo = i, hi = grid_;
                while (hi - lo > 1) {
                    const std::int64_t mid = lo + (hi - lo) / 2;
                    if (1.0 + prev_[mid] >= target) lo = mid; else hi = mid;
                }
                const double denom = prev_[lo] - prev_[lo + 1];
                double frac = denom > 0.0 ? (1.0 + prev_[lo] - target) / denom : 1.0;
                if (frac < 0.0) frac = 0.0;
                if (frac > 1.0) frac = 1.0;
                h = config_.node(lo) + frac * dx;
                if (h < s) h = s;
                if (h > 1.0) h = 1.0;
            }
            // integral_s^h (1 + v_{k-1}(x) - v_{k-1}(s)) dx; the integrand of
            // the Bellman max is zero beyond h on the interpolant.
            const double integ =
                detail::segment_integral(prev_, prefix_, grid_, i, h);
            const double v = prev_[i] + (h - s) * (1.0 - target) + integ;
            const double cap = ub_factor * sqrt_one_minus_[i];
            if (!(v >= -tol && v <= cap + tol)) {
                throw std::runtime_error(
                    "optimal recursion left [0, sqrt(2k(1-s))] at k=" +
                    std::to_string(k_) + " node=" + std::to_string(i));
            }
            values_[i] = v;
            edges_[i] = h;
        }
    }

private:
    GridConfig config_;
    std::int64_t grid_ = 0;
    std::int64_t k_ = 0;
    std::vector<double> values_, prev_, prefix_, edges_, sqrt_one_minus_;
};

// ============================================================================
// Retained table
// ============================================================================

enum class TableKind { adaptive, optimal };

class ValueTable {
public:
    ValueTable(TableKind kind, GridConfig config,
               std::vector<std::vector<double>> rows,
               std::vector<std::vector<double>> edges = {})
        : kind_(kind), config_(config), rows_(std::move(rows)),
          edges_(std::move(edges)) {}

    TableKind kind() const { return kind_; }
    const GridConfig& config() const { return config_; }
    std::int64_t k_max() const { return static_cast<std::int64_t>(rows_.size()) - 1; }
    std::int64_t grid_nodes() const { return config_.nodes(); }

    std::span<const double> row(std::int64_t k) const {
        check_k(k);
        return rows_[static_cast<std::size_t>(k)];
    }

    double at(std::int64_t k, std::int64_t i) const { return row(k)[check_node(i)]; }

    // Linear interpolation between the bracketing nodes; exact at nodes.
    double eval(std::int64_t k, double s) const {
        check_k(k);
        detail::require_unit(s, "state");
        const auto& r = rows_[static_cast<std::size_t>(k)];
        const auto G = grid_nodes();
        const double t = s * static_cast<double>(G);
        auto i = static_cast<std::int64_t>(t);
        if (i >= G) return r[G];
        const double frac = t - static_cast<double>(i);
        return r[i] + (r[i + 1] - r[i]) * frac;
    }

    // Recorded optimal acceptance edges for row k >= 1 (optimal tables only).
    std::span<const double> edge_row(std::int64_t k) const {
        if (kind_ != TableKind::optimal) {
            throw std::logic_error("edges recorded only for optimal tables");
        }
        if (k < 1 || k > k_max()) throw std::out_of_range("edge row out of range");
        return edges_[static_cast<std::size_t>(k)];
    }

    // Trapezoid cumulative C_k(s_i) = integral_0^{s_i} v_k, computed on demand.
    std::vector<double> cumulative_row(std::int64_t k) const {
        auto r = row(k);
        std::vector<double> prefix(r.size());
        detail::trapezoid_prefix(r, config_.spacing(), prefix);
        return prefix;
    }

private:
    void check_k(std::int64_t k) const {
        if (k < 0 || k > k_max()) {
            throw std::out_of_range("horizon " + std::to_string(k) +
                                    " outside table range 0.." +
                                    std::to_string(k_max()));
        }
    }
    std::int64_t check_node(std::int64_t i) const {
        if (i < 0 || i > grid_nodes()) throw std::out_of_range("node index");
        return i;
    }

    TableKind kind_;
    GridConfig config_;
    std::vector<std::vector<double>> rows_;
    std::vector<std::vector<double>> edges_;
};

inline ValueTable build_adaptive_table(const GridConfig& config) {
    AdaptiveRowSweep sweep(config);
    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<std::size_t>(config.k_max) + 1);
    rows.emplace_back(sweep.grid_nodes() + 1, 0.0);
    for (std::int64_t k = 1; k <= config.k_max; ++k) {
        sweep.advance();
        rows.emplace_back(sweep.values().begin(), sweep.values().end());
    }
    return ValueTable(TableKind::adaptive, config, std::move(rows));
}

inline ValueTable build_optimal_table(const GridConfig& config) {
    OptimalRowSweep sweep(config);
    std::vector<std::vector<double>> rows, edges;
    rows.reserve(static_cast<std::size_t>(config.k_max) + 1);
    edges.reserve(static_cast<std::size_t>(config.k_max) + 1);
    rows.emplace_back(sweep.grid_nodes() + 1, 0.0);
    edges.emplace_back();  // no edge row at k = 0
    for (std::int64_t k = 1; k <= config.k_max; ++k) {
        sweep.advance();
        rows.emplace_back(sweep.values().begin(), sweep.values().end());
        edges.emplace_back(sweep.edges().begin(), sweep.edges().end());
    }
    return ValueTable(TableKind::optimal, config, std::move(rows), std::move(edges));
}

}  // namespace monoselect
