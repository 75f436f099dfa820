#pragma once

#include <cstdio>
#include <filesystem>
#include <string>

#include "irtrack/frame.hpp"
#include "irtrack/noise.hpp"
#include "irtrack/track.hpp"

namespace irtrack {

// Fixed 9-significant-digit formatting; all numeric file output goes through
// this so runs with equal inputs are byte-identical.
inline std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string transform_to_json(const RigidTransform& t);  // {"r":[9 row-major],"t":[x,y,z]}
RigidTransform transform_from_json_text(const std::string& text);

// One pose-log line (JSON lines, no trailing newline).
std::string observation_to_json_line(const ToolObservation& obs);

CameraIntrinsics load_intrinsics(const std::filesystem::path& path);
void save_intrinsics(const std::filesystem::path& path, const CameraIntrinsics& intr);

NoiseModel load_noise_model(const std::filesystem::path& path);
void save_noise_model(const std::filesystem::path& path, const NoiseModel& model);

}  // namespace irtrack
