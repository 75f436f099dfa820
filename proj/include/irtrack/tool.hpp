#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "irtrack/geometry.hpp"

namespace irtrack {

struct ambiguous_correspondence : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct definition_failed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Named rigid marker constellation. Markers are in the tool frame with the
// centroid at the origin; the pairwise length table is kept alongside because
// recognition works on it directly.
struct ToolDefinition {
    std::string name;
    std::vector<Vec3> markers;  // centered, mm
    double marker_radius = 5.75;
    std::vector<double> pairwise;  // N*N row-major lengths

    int marker_count() const { return static_cast<int>(markers.size()); }
    double length(int i, int j) const { return pairwise[static_cast<size_t>(i) * markers.size() + j]; }

    // Centers the markers, fills the length table, checks N >= 3.
    static ToolDefinition create(std::string name, std::vector<Vec3> markers, double marker_radius);
};

std::vector<double> pairwise_lengths(std::span<const Vec3> points);

// Corresponded RMSE between two equally-sized marker sets.
double shape_distance(std::span<const Vec3> a, std::span<const Vec3> b);

// Per-frame marker sets collected while a tool is shown to the sensor.
// tolerance_mm gates both frame admission (any pairwise length differing
// from the reference by more) and the ambiguity check; a practical value is
// 3x the tracking side threshold.
struct DefinitionSession {
    std::vector<std::vector<Vec3>> frames;
    double tolerance_mm = 3.0;
};

struct CorrespondenceReport {
    int frames_in = 0;
    int frames_rejected = 0;
};

// Reorders every frame's markers to the first frame's slot order. Each frame
// is matched against the reference by pairwise lengths, then rigidly aligned;
// two markers falling within tolerance of one reference slot is an error.
DefinitionSession correspond_frames(const DefinitionSession& session, CorrespondenceReport* report = nullptr);

struct DefinitionReport {
    int iterations = 0;
    double objective = 0;  // mean aligned RMSE over frames, mm
    std::vector<double> objective_history;
    int frames_used = 0;
};

// Generalized-Procrustes mean shape over corresponded frames: align each
// frame to the running mean, average per slot, recenter, repeat until the
// mean moves < 1e-6 mm (100 iterations max, else definition_failed). The
// result is centered and its principal axes are aligned deterministically.
ToolDefinition define_tool(const DefinitionSession& session, const std::string& name, double marker_radius,
                           DefinitionReport* report = nullptr);

struct DistinctnessReport {
    struct SelfAmbiguity {
        std::string tool;
        double length_a = 0, length_b = 0;  // the near-equal pair of lengths, mm
    };
    struct CrossConfusion {
        std::string tool_a, tool_b;
        double max_gap = 0;  // largest elementwise gap of the sorted length multisets, mm
    };
    std::vector<SelfAmbiguity> self_ambiguous;
    std::vector<CrossConfusion> confusable;
    bool clean() const { return self_ambiguous.empty() && confusable.empty(); }
};

// Report-only checks: a tool with two of its own lengths closer than
// 2*t_side can self-alias under matching; two tools whose sorted length
// multisets agree elementwise within 2*t_side can be confused.
DistinctnessReport validate_distinctness(std::span<const ToolDefinition> tools, double t_side);

// Tool file: {"name", "marker_radius_mm", "markers_mm": [[x,y,z]...]}.
void save_tool(const std::filesystem::path& path, const ToolDefinition& tool);
ToolDefinition load_tool(const std::filesystem::path& path);

}  // namespace irtrack
