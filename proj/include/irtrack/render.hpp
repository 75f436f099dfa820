#pragma once

#include "irtrack/frame.hpp"
#include "irtrack/noise.hpp"
#include "irtrack/scene.hpp"

namespace irtrack {

struct RenderOptions {
    // Round depth to integer mm (the sensor reports whole millimeters).
    bool quantize = true;
    double min_range = 1.0;    // mm; nearer surfaces get invalid depth
    double max_range = 1200.0; // mm; farther surfaces get invalid depth
    double marker_peak = 2200.0;
    double marker_rim = 520.0;
    double timestamp = 0;
};

// Deterministic synthetic sensor frame: spherical markers are ray-traced
// per pixel (first ray-sphere intersection, cosine intensity falloff from
// peak to rim), distractor rectangles are bright flat surfaces, and every
// valid depth sample gets Gaussian noise with sigma_p(depth). Identical
// (scene, intrinsics, model, seed, options) give identical frames.
SensorFrame render_frame(const SceneSpec& scene, const CameraIntrinsics& intrinsics, const NoiseModel& noise,
                         uint64_t seed, const RenderOptions& options = {});

}  // namespace irtrack
