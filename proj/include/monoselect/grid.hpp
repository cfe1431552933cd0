#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace monoselect {

// Uniform discretization of the state space [0,1]: nodes s_i = i / G for
// i = 0..G with G = 1/step. Horizons run 0..k_max.
struct GridConfig {
    double step = 1e-4;
    std::int64_t k_max = 10000;

    std::int64_t nodes() const {
        return static_cast<std::int64_t>(std::llround(1.0 / step));
    }

    // Actual spacing used in all quadrature; equals step up to rounding.
    double spacing() const { return 1.0 / static_cast<double>(nodes()); }

    double node(std::int64_t i) const {
        return static_cast<double>(i) / static_cast<double>(nodes());
    }

    // Error budget for every grid-level bound check.
    double error_budget() const { return 10.0 * step; }

    void validate() const {
        if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
        if (step > 1e-2 * (1.0 + 1e-12)) {
            throw std::invalid_argument("grid step must be <= 1e-2, got " +
                                        std::to_string(step));
        }
        const double inv = 1.0 / step;
        if (std::abs(inv - std::llround(inv)) > 1e-6) {
            throw std::invalid_argument("1/step must be an integer, got step = " +
                                        std::to_string(step));
        }
        if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
    }
};

}  // namespace monoselect
