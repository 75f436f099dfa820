#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "irtrack/frame.hpp"

namespace irtrack {

struct Blob {
    std::vector<std::pair<int, int>> pixels;  // (x, y)
    Pixel centroid;                           // intensity-weighted
    double area = 0;                          // px^2 (= pixel count)
    uint16_t peak = 0;
};

struct DetectedMarker {
    Vec3 position;             // sphere-center corrected, camera frame, mm
    double surface_depth = 0;  // central-equivalent ray depth before the center correction, mm
    Blob blob;
};

struct DetectorConfig {
    uint16_t threshold = 500;
    double marker_radius = 5.75;  // mm; 0 = flat markers (disables the area model check)
    double min_area = 3;          // px^2, static pre-filter
    double max_area = 4000;
    double area_low = 0.4;   // accepted window around the projected-area prediction
    double area_high = 2.5;
    bool eight_connected = true;
    // corrected_median: per-pixel depths are first reduced to their
    // central-ray equivalent using the sphere geometry, then the median is
    // taken. This removes the curvature bias of raw blob depths while
    // staying robust to silhouette pixels. central_pixel follows the
    // original single-pixel recipe.
    enum class DepthMode { corrected_median, central_pixel };
    DepthMode depth_mode = DepthMode::corrected_median;
    double max_invalid_fraction = 0.5;  // blob dropped beyond this
};

struct DetectionResult {
    std::vector<DetectedMarker> markers;
    int dropped_no_depth = 0;  // blobs without usable depth pixels
    int dropped_area = 0;      // blobs outside the model area window
};

std::vector<uint8_t> segment_reflectivity(const SensorFrame& frame, uint16_t threshold);

// Connected components of the mask with area in [min_area, max_area].
// Centroids and peaks come from the frame's reflectivity.
std::vector<Blob> extract_blobs(const SensorFrame& frame, const std::vector<uint8_t>& mask, double min_area,
                                double max_area, bool eight_connected = true);

DetectionResult localize_markers(const SensorFrame& frame, const DetectorConfig& config);

// Expected blob area in px^2 of a radius-r marker at ray distance d.
double marker_pixel_area(const CameraIntrinsics& intr, double radius_mm, double depth_mm);

}  // namespace irtrack
