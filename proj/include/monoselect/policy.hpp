// Closed-form adaptive threshold policy for online selection of a monotone
// increasing subsequence from i.i.d. uniforms on [0,1].
//
// With k observations still to come and last selected value s, the policy
// accepts the next value x iff x lies in the closed window [s, h_k(s)] with
//
//   h_k(s) = min{ s + sqrt(2 (1 - s) / k), 1 }.
//
// Below the critical state s_k = max{1 - 2/k, 0} the window is strictly
// inside [s, 1] ("conservative"); at or above s_k every feasible value is
// accepted ("greedy").
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace monoselect {

enum class Regime { conservative, greedy };

namespace detail {

inline void require_horizon(std::int64_t k) {
    if (k < 1) {
        throw std::domain_error("horizon must be a positive integer, got " +
                                std::to_string(k));
    }
}

inline void require_unit(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw std::domain_error(std::string(name) + " must lie in [0,1], got " +
                                std::to_string(v));
    }
}

}  // namespace detail

// s_k = max{1 - 2/k, 0}
inline double critical_state(std::int64_t k) {
    detail::require_horizon(k);
    double s = 1.0 - 2.0 / static_cast<double>(k);
    return s > 0.0 ? s : 0.0;
}

// Upper acceptance edge h_k(s). Exactly 1 for s >= s_k; continuous and
// nondecreasing in s; always within [s, 1].
inline double threshold(std::int64_t k, double s) {
    detail::require_horizon(k);
    detail::require_unit(s, "state");
    if (s >= critical_state(k)) return 1.0;
    double h = s + std::sqrt(2.0 * (1.0 - s) / static_cast<double>(k));
    // Unclipped value is <= 1 on the conservative side; clamp absorbs rounding.
    if (h > 1.0) h = 1.0;
    if (h < s) h = s;
    return h;
}

inline Regime regime(std::int64_t k, double s) {
    detail::require_horizon(k);
    detail::require_unit(s, "state");
    return s < critical_state(k) ? Regime::conservative : Regime::greedy;
}

// Accept x from state s with k observations left: closed interval, both
// endpoints accepted.
inline bool accepts(std::int64_t k, double s, double x) {
    detail::require_unit(x, "observation");
    return x >= s && x <= threshold(k, s);
}

}  // namespace monoselect
