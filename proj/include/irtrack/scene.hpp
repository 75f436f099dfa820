#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "irtrack/tool.hpp"

namespace irtrack {

struct StrayMarker {
    Vec3 center;  // camera frame, mm
    double radius = 5.75;
};

// Flat bright rectangle (monitor, glass board): axis-aligned in the plane
// z = center.z, rendered above the marker threshold with its plane's depth.
struct Distractor {
    Vec3 center;
    double half_x = 0, half_y = 0;  // mm
    uint16_t intensity = 800;
};

struct PlacedTool {
    ToolDefinition tool;
    RigidTransform pose;  // tool -> camera
};

struct SceneSpec {
    std::vector<PlacedTool> tools;
    std::vector<StrayMarker> strays;
    std::vector<Distractor> distractors;
    // Background pixels get deterministic clutter in [0, background_max];
    // 0 leaves the background dark (and skips the fill entirely).
    uint16_t background_max = 0;
};

// Scene JSON. Tools may be inline ("definition": {...}) or referenced
// ("file": "tool.json", resolved relative to the scene file).
SceneSpec load_scene(const std::filesystem::path& path);
void save_scene(const std::filesystem::path& path, const SceneSpec& scene);

}  // namespace irtrack
