#pragma once

#include <span>
#include <vector>

#include "irtrack/geometry.hpp"
#include "irtrack/noise.hpp"

namespace irtrack {

struct degenerate_fit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Least-squares plane n.x = offset with unit normal (smallest principal
// component); rms is the point-to-plane residual.
struct PlaneFit {
    Vec3 normal;
    double offset = 0;  // mm
    double rms = 0;     // mm
};

PlaneFit fit_plane(std::span<const Vec3> points);

// Ray depth predicted by a plane for a unit direction; the per-pixel depth
// residual is measured minus this.
inline double plane_ray_depth(const PlaneFit& plane, const Vec3& unit_ray) {
    return plane.offset / plane.normal.dot(unit_ray);
}

struct NormalityTest {
    double a2_star = 0;  // Anderson-Darling statistic, mean/variance estimated
    bool reject_at_5pct = false;
};

// Case-3 Anderson-Darling with Stephens' small-sample correction
// A2* = A2 (1 + 4/n - 25/n^2); 5% critical value 0.787.
NormalityTest normality_statistic(std::span<const double> samples);

struct NoiseFit {
    NoiseModel model;
    double r_squared = 0;
};

// Least-squares quadratic sigma(d) = a + b d + c d^2 over (depth, sigma)
// observations; the fitted model's valid range is the observed depth span.
NoiseFit fit_noise_quadratic(std::span<const double> depths, std::span<const double> sigmas);

// Timestamped scalar displacement signal.
struct MotionTrace {
    std::vector<double> t;  // seconds, strictly increasing
    std::vector<double> x;  // mm
};

// Delay of `test` behind `reference`, in seconds. The test trace is first
// midrange-centered onto the reference, then the mean squared difference is
// minimized over delays in [0, t_mov) on a grid at the finer trace's rate,
// with linear interpolation of the shifted test trace.
double estimate_latency(const MotionTrace& reference, const MotionTrace& test, double t_mov);

}  // namespace irtrack
