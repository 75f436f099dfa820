#include "irtrack/detect.hpp"

#include <cmath>

#include "irtrack/stats.hpp"

namespace irtrack {

double marker_pixel_area(const CameraIntrinsics& intr, double radius_mm, double depth_mm) {
    if (!(depth_mm > 0)) throw std::invalid_argument("marker_pixel_area: depth must be positive");
    if (radius_mm < 0) throw std::invalid_argument("marker_pixel_area: negative radius");
    return kPi * radius_mm * radius_mm / ((intr.sx / intr.fx) * (intr.sy / intr.fy) * depth_mm * depth_mm);
}

std::vector<uint8_t> segment_reflectivity(const SensorFrame& frame, uint16_t threshold) {
    if (threshold == 0) throw std::invalid_argument("segment_reflectivity: threshold must be positive");
    std::vector<uint8_t> mask(frame.reflectivity.size());
    for (size_t i = 0; i < mask.size(); ++i) mask[i] = frame.reflectivity[i] >= threshold;
    return mask;
}

std::vector<Blob> extract_blobs(const SensorFrame& frame, const std::vector<uint8_t>& mask, double min_area,
                                double max_area, bool eight_connected) {
    if (!(min_area > 0) || !(min_area < max_area))
        throw std::invalid_argument("extract_blobs: need 0 < min_area < max_area");

    static constexpr int dx8[] = {1, -1, 0, 0, 1, 1, -1, -1};
    static constexpr int dy8[] = {0, 0, 1, -1, 1, -1, 1, -1};
    const int neighbors = eight_connected ? 8 : 4;

    std::vector<uint8_t> visited(mask.size(), 0);
    std::vector<Blob> blobs;
    std::vector<std::pair<int, int>> stack;

    for (int sy = 0; sy < frame.height; ++sy) {
        for (int sx = 0; sx < frame.width; ++sx) {
            const size_t si = frame.index(sx, sy);
            if (!mask[si] || visited[si]) continue;

            Blob blob;
            stack.clear();
            stack.emplace_back(sx, sy);
            visited[si] = 1;
            double wsum = 0, usum = 0, vsum = 0;
            while (!stack.empty()) {
                const auto [x, y] = stack.back();
                stack.pop_back();
                blob.pixels.emplace_back(x, y);
                const uint16_t w = frame.refl(x, y);
                blob.peak = std::max(blob.peak, w);
                wsum += w;
                usum += static_cast<double>(w) * x;
                vsum += static_cast<double>(w) * y;
                for (int k = 0; k < neighbors; ++k) {
                    const int nx = x + dx8[k], ny = y + dy8[k];
                    if (!frame.in_bounds(nx, ny)) continue;
                    const size_t ni = frame.index(nx, ny);
                    if (mask[ni] && !visited[ni]) {
                        visited[ni] = 1;
                        stack.emplace_back(nx, ny);
                    }
                }
            }
            blob.area = static_cast<double>(blob.pixels.size());
            if (blob.area < min_area || blob.area > max_area) continue;
            blob.centroid = {usum / wsum, vsum / wsum};
            blobs.push_back(std::move(blob));
        }
    }
    return blobs;
}

namespace {

// Central-ray equivalent of one blob pixel: with the sphere center assumed on
// the centroid ray, the pixel's surface depth maps to a center distance
// D = d cos(gamma) + sqrt(r^2 - d^2 sin^2(gamma)); D - r is what the central
// pixel would have measured. Pixels straddling the silhouette clamp the root.
double central_equivalent_depth(double d, double cos_gamma, double radius) {
    const double sin2 = std::max(0.0, 1.0 - cos_gamma * cos_gamma);
    const double root = std::sqrt(std::max(0.0, radius * radius - d * d * sin2));
    return d * cos_gamma + root - radius;
}

}  // namespace

DetectionResult localize_markers(const SensorFrame& frame, const DetectorConfig& config) {
    DetectionResult out;
    const auto mask = segment_reflectivity(frame, config.threshold);
    const auto blobs =
        extract_blobs(frame, mask, config.min_area, config.max_area, config.eight_connected);

    for (const auto& blob : blobs) {
        const Vec3 center_ray = back_project(frame.intrinsics, blob.centroid, 1.0);

        size_t invalid = 0;
        for (const auto& [x, y] : blob.pixels)
            if (frame.depth_at(x, y) <= 0) ++invalid;
        if (invalid == blob.pixels.size() ||
            static_cast<double>(invalid) > config.max_invalid_fraction * blob.pixels.size()) {
            ++out.dropped_no_depth;
            continue;
        }

        double surface_depth = 0;
        if (config.depth_mode == DetectorConfig::DepthMode::central_pixel) {
            // valid depth pixel nearest to the centroid
            double best = 1e30;
            for (const auto& [x, y] : blob.pixels) {
                const double dp = frame.depth_at(x, y);
                if (dp <= 0) continue;
                const double r2 = (x - blob.centroid.u) * (x - blob.centroid.u) +
                                  (y - blob.centroid.v) * (y - blob.centroid.v);
                if (r2 < best) {
                    best = r2;
                    surface_depth = dp;
                }
            }
        } else {
            std::vector<double> equivalent;
            equivalent.reserve(blob.pixels.size());
            for (const auto& [x, y] : blob.pixels) {
                const double dp = frame.depth_at(x, y);
                if (dp <= 0) continue;
                Vec3 dir(frame.intrinsics.unit_x(x), frame.intrinsics.unit_y(y), 1.0);
                dir /= dir.norm();
                const double cg = std::min(1.0, dir.dot(center_ray));
                equivalent.push_back(central_equivalent_depth(dp, cg, config.marker_radius));
            }
            surface_depth = median(std::move(equivalent));
        }

        if (config.marker_radius > 0) {
            const double predicted = marker_pixel_area(frame.intrinsics, config.marker_radius, surface_depth);
            if (blob.area < config.area_low * predicted || blob.area > config.area_high * predicted) {
                ++out.dropped_area;
                continue;
            }
        }

        DetectedMarker m;
        m.surface_depth = surface_depth;
        m.position = sphere_center_correct(back_project(frame.intrinsics, blob.centroid, surface_depth),
                                           surface_depth, config.marker_radius);
        m.blob = blob;
        out.markers.push_back(std::move(m));
    }
    return out;
}

}  // namespace irtrack
