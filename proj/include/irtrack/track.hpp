#pragma once

#include <optional>
#include <string>
#include <vector>

#include "irtrack/detect.hpp"
#include "irtrack/noise.hpp"
#include "irtrack/tool.hpp"

namespace irtrack {

struct TrackerConfig {
    NoiseModel noise;
    std::optional<double> t_side_override;  // mm; skips the sigma-derived side threshold
    double confidence_factor = 2.0;         // 2 sigma ~ 95% detection probability
    int max_missed = 1;                     // consecutive missed frames before the filters reset
    double process_noise_q = 1.0;           // mm^2 per frame
    bool use_kalman = true;
    bool quantized_depth = true;            // adds 1/12 mm^2 quantization variance to measurements
};

struct MatchThresholds {
    double t_side = 0;   // per-edge gate, mm
    double t_shape = 0;  // whole-shape loss gate, mm
    bool clamped = false;  // depth was outside the noise model range
};

// t_side = factor * sqrt(2) * sigma_p(depth); t_shape = t_side / sqrt(N(N-1)).
MatchThresholds thresholds(const NoiseModel& model, double depth_mm, int marker_count, const TrackerConfig& cfg);

// Mean absolute pairwise-length discrepancy, normalized by N(N-1) (the sum
// runs over the N(N-1)/2 unordered pairs).
double match_loss(const ToolDefinition& tool, std::span<const Vec3> candidate_points);

struct MatchCandidate {
    std::vector<int> assignment;  // detection index per tool slot
    double loss = 0;              // mm
};

// Every ordered assignment of distinct detections to the tool's slots whose
// pairwise lengths all agree within t_side and whose loss is below t_shape.
// Depth-first search with incremental pruning; equivalent to exhaustive
// enumeration over ordered subsets. Results sorted by (loss, assignment).
std::vector<MatchCandidate> find_candidates(const ToolDefinition& tool, std::span<const Vec3> points,
                                            double t_side, double t_shape);

struct ResolvedMatch {
    int tool_index = -1;
    MatchCandidate candidate;
};

// Redundancy resolution: per tool, candidates over the same detection set
// keep only the lowest loss; then candidates are accepted greedily in
// ascending loss order, skipping any that reuse a detection or a tool.
// Ties break on (tool name, sorted detection indices) for determinism.
std::vector<ResolvedMatch> resolve(std::span<const ToolDefinition> tools,
                                   const std::vector<std::vector<MatchCandidate>>& candidates_per_tool);

// Tool -> camera, via rigid_register on the assigned points.
Registration estimate_pose(const ToolDefinition& tool, std::span<const Vec3> assigned_points);

struct DepthFilter {
    double estimate = 0;  // mm
    double variance = 0;  // mm^2
    bool initialized = false;
};

// Scalar random-walk Kalman update; an uninitialized filter adopts the
// measurement. Returns the filtered depth.
double kalman_update(DepthFilter& filter, double measured_depth, double sigma_meas, double process_noise_q);

struct ToolObservation {
    std::string tool;
    RigidTransform pose;  // tool -> camera
    double loss = 0;      // mm, from the accepted candidate
    double fit_rmse = 0;  // mm, pose registration residual
    std::vector<double> marker_depths;  // surface ray depths used for the pose (filtered if enabled)
    double timestamp = 0;
};

// Per-frame multi-tool recognition with per-marker depth smoothing. One
// session owns the filter bank and miss counters; frames must be fed in
// time order.
class TrackerSession {
public:
    TrackerSession(std::vector<ToolDefinition> tools, TrackerConfig cfg);

    std::vector<ToolObservation> track_frame(std::span<const DetectedMarker> detections, double timestamp);

    const std::vector<ToolDefinition>& tools() const { return tools_; }
    const TrackerConfig& config() const { return cfg_; }
    void reset();

private:
    std::vector<ToolDefinition> tools_;
    TrackerConfig cfg_;
    std::vector<std::vector<DepthFilter>> bank_;  // [tool][slot]
    std::vector<int> missed_;
};

}  // namespace irtrack
