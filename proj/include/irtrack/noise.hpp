#pragma once

#include <algorithm>
#include <stdexcept>

namespace irtrack {

// Depth standard error curve sigma_p(d) = a + b*d + c*d^2, sigma and d in mm.
struct NoiseModel {
    double a = 0, b = 0, c = 0;
    double d_min = 0, d_max = 1e9;

    double sigma(double d) const {
        if (d < d_min || d > d_max) throw std::out_of_range("NoiseModel: depth outside valid range");
        return a + b * d + c * d * d;
    }

    double sigma_clamped(double d) const {
        const double dc = std::clamp(d, d_min, d_max);
        return a + b * dc + c * dc * dc;
    }

    void validate() const {
        if (d_min >= d_max) throw std::invalid_argument("NoiseModel: empty valid range");
        // quadratic over an interval: checking the ends and the vertex covers the minimum
        double lo = std::min(sigma_clamped(d_min), sigma_clamped(d_max));
        if (c > 0) {
            const double vertex = -b / (2 * c);
            if (vertex > d_min && vertex < d_max) lo = std::min(lo, sigma_clamped(vertex));
        }
        if (!(lo > 0)) throw std::invalid_argument("NoiseModel: sigma must be positive over the valid range");
    }

    // Assumed defaults for the simulated sensor (the reference hardware curve
    // is published only as a plot): ~0.45 mm at 500 mm, ~1.38 mm at 971 mm.
    static NoiseModel ahat_default() { return {0.05, 2e-4, 1.2e-6, 156.0, 971.0}; }
};

}  // namespace irtrack
