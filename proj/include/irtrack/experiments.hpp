#pragma once

#include <array>

#include "irtrack/eval.hpp"
#include "irtrack/random.hpp"
#include "irtrack/render.hpp"
#include "irtrack/track.hpp"

namespace irtrack {

// Tetrahedral tool with the six given pairwise lengths {AB, AC, AD, BC, BD,
// CD}, built by trilateration. Throws degenerate_geometry if the lengths do
// not embed in 3-D.
ToolDefinition tool_from_lengths(const std::string& name, const std::array<double, 6>& lengths,
                                 double marker_radius);

// Scalene 4-marker tools with well-separated length multisets; family index
// k shifts every length by 7k mm so different indices stay distinguishable.
ToolDefinition make_test_tool(int k = 0, double marker_radius = 8.0);

// On-axis pose at the given depth, tilted so no marker of the built-in tools
// hides behind another along the view ray.
RigidTransform experiment_pose(double depth_mm);

struct ExperimentConfig {
    CameraIntrinsics intrinsics = CameraIntrinsics::ahat_like();
    NoiseModel noise = NoiseModel::ahat_default();
    DetectorConfig detector;
    TrackerConfig tracker;
    bool quantize = true;
    // Skip the render/detect stage and feed exact marker centers to the
    // tracker (visibility still applies). Isolates the experiment math from
    // the sensor's pixel raster.
    bool ideal_detection = false;
    int frames_per_pose = 100;
    int pairs = 10000;
    int reps = 20;
    uint64_t seed = kDefaultSeed;
    int jobs = 1;
};

enum class MotionAxis { X, Z, RotY };

struct AccuracySummary {
    double median = 0;  // pooled error median, mm or deg
    double iqr = 0;     // pooled, mm or deg
    std::vector<double> rep_median;
    std::vector<double> rep_iqr;
};

struct AccuracyPair {
    AccuracySummary unfiltered;
    AccuracySummary filtered;
};

// Two static pose collections separated by the commanded motion; pairwise
// displacement (projected on the motion axis) or relative rotation angle is
// sampled across the collections, repeated with disjoint seeds. Filtered and
// unfiltered tracking run on the same rendered frames.
AccuracyPair accuracy_experiment(const ToolDefinition& tool, const RigidTransform& base_pose, MotionAxis axis,
                                 double magnitude, const ExperimentConfig& cfg);

struct SweepStation {
    double commanded = 0;  // mm from the first station
    double measured = 0;   // mm, projected on the motion direction
    double error = 0;      // mm
    int frames_tracked = 0;
    bool missing = true;
};

struct SweepResult {
    std::vector<SweepStation> stations;
    double max_abs_error = 0;     // over tracked stations, mm
    double implied_fov_deg = 0;   // 2 atan(|x|/z) of the extreme tracked marker
};

SweepResult workspace_sweep(const ToolDefinition& tool, const RigidTransform& base_pose, MotionAxis axis,
                            double from, double to, double step, int frames_per_station,
                            const ExperimentConfig& cfg);

struct BenchResult {
    int loaded = 0, visible = 0, frames = 0;
    double mean_ms = 0;  // wall clock per track_frame call
    double hz = 0;
    std::vector<double> found_rate;  // per loaded tool
};

// Offline runtime: frames are pre-rendered and pre-detected, then
// track_frame is timed over `frames` calls cycling through the pool.
BenchResult runtime_bench(int tools_loaded, int tools_visible, int frames, const ExperimentConfig& cfg);

struct NoiseCharacterization {
    std::vector<double> depth;  // mean detected depth per station, mm
    std::vector<double> sigma;  // estimated depth standard error, mm
    NoiseModel fitted;
    double r_squared = 0;
    int ad_rejects = 0;  // Anderson-Darling rejections across stations
    int stations = 0;
};

// Static-plane protocol: a bright board at n random depths, 300-frame point
// clouds, plane fit, per-pixel ray-depth residuals. With quantized rendering
// the 1/12 mm^2 quantizer variance can be subtracted before the sigma
// estimate (Sheppard's correction).
NoiseCharacterization characterize_noise(int n_depths, int frames_per_depth, double d_lo, double d_hi,
                                         const ExperimentConfig& cfg, bool subtract_quantization);

}  // namespace irtrack
