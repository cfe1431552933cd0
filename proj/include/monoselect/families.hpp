// Threshold families: per-step rules mapping (steps remaining j, state s) to
// the upper acceptance edge h_j(s) in [s, 1].
#pragma once

#include "monoselect/policy.hpp"
#include "monoselect/value_table.hpp"

#include <concepts>
#include <cstdint>
#include <memory>
#include <stdexcept>

namespace monoselect {

template <typename F>
concept threshold_family = requires(const F f, std::int64_t j, double s) {
    { f(j, s) } -> std::convertible_to<double>;
};

struct AdaptiveFamily {
    double operator()(std::int64_t j, double s) const { return threshold(j, s); }
};

struct GreedyFamily {
    double operator()(std::int64_t j, double s) const {
        detail::require_horizon(j);
        detail::require_unit(s, "state");
        return 1.0;
    }
};

class FixedWidthFamily {
public:
    explicit FixedWidthFamily(double width) : width_(width) {
        if (!(width > 0.0 && width <= 1.0)) {
            throw std::invalid_argument("window width must lie in (0, 1]");
        }
    }
    double operator()(std::int64_t j, double s) const {
        detail::require_horizon(j);
        detail::require_unit(s, "state");
        const double h = s + width_;
        return h < 1.0 ? h : 1.0;
    }
    double width() const { return width_; }

private:
    double width_;
};

// Acceptance edges recorded during the optimal DP sweep, interpolated
// linearly between grid nodes and clamped into [s, 1].
class OptimalFamily {
public:
    explicit OptimalFamily(std::shared_ptr<const ValueTable> table)
        : table_(std::move(table)) {
        if (!table_) throw std::invalid_argument("null table");
        if (table_->kind() != TableKind::optimal) {
            throw std::invalid_argument("optimal family needs an optimal table");
        }
    }

    double operator()(std::int64_t j, double s) const {
        detail::require_unit(s, "state");
        auto edges = table_->edge_row(j);  // range-checks j
        const auto G = table_->grid_nodes();
        const double t = s * static_cast<double>(G);
        auto i = static_cast<std::int64_t>(t);
        double h;
        if (i >= G) {
            h = edges[G];
        } else {
            const double frac = t - static_cast<double>(i);
            h = edges[i] + (edges[i + 1] - edges[i]) * frac;
        }
        if (h < s) h = s;
        if (h > 1.0) h = 1.0;
        return h;
    }

    const ValueTable& table() const { return *table_; }

private:
    std::shared_ptr<const ValueTable> table_;
};

inline AdaptiveFamily adaptive_family() { return {}; }
inline GreedyFamily greedy_family() { return {}; }
inline FixedWidthFamily fixed_width_family(double width) {
    return FixedWidthFamily(width);
}
inline OptimalFamily optimal_family(std::shared_ptr<const ValueTable> table) {
    return OptimalFamily(std::move(table));
}

}  // namespace monoselect
