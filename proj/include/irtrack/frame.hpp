#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "irtrack/geometry.hpp"

namespace irtrack {

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Paired reflectivity + depth images. Depth is in mm along the pixel ray,
// 0 means invalid. Values are whole numbers whenever the render quantized;
// the real-valued representation exists so noiseless closed-loop tests can
// bypass the 1 mm sensor quantization.
struct SensorFrame {
    CameraIntrinsics intrinsics;
    int width = 0, height = 0;
    double timestamp = 0;  // seconds
    std::vector<uint16_t> reflectivity;
    std::vector<double> depth;

    size_t index(int x, int y) const { return static_cast<size_t>(y) * width + x; }
    uint16_t refl(int x, int y) const { return reflectivity[index(x, y)]; }
    double depth_at(int x, int y) const { return depth[index(x, y)]; }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
};

// AHF container: one JSON manifest line (intrinsics, timestamp, dimensions,
// endianness="little"), then two row-major uint16 arrays, reflectivity first.
// Depth is rounded to integer mm on write.
void write_ahf(const std::filesystem::path& path, const SensorFrame& frame);
SensorFrame read_ahf(const std::filesystem::path& path);

// *.ahf files in a directory, sorted by filename.
std::vector<std::filesystem::path> list_ahf(const std::filesystem::path& dir);

}  // namespace irtrack
