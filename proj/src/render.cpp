#include "irtrack/render.hpp"

#include <cmath>

#include "irtrack/random.hpp"

namespace irtrack {

namespace {

struct Sphere {
    Vec3 center;
    double radius;
};

struct PixelBox {
    int x0, y0, x1, y1;  // inclusive
    bool empty() const { return x1 < x0 || y1 < y0; }
};

PixelBox clip_box(const CameraIntrinsics& k, double u0, double v0, double u1, double v1) {
    PixelBox b;
    b.x0 = std::max(0, static_cast<int>(std::floor(u0)));
    b.y0 = std::max(0, static_cast<int>(std::floor(v0)));
    b.x1 = std::min(k.width - 1, static_cast<int>(std::ceil(u1)));
    b.y1 = std::min(k.height - 1, static_cast<int>(std::ceil(v1)));
    return b;
}

// Conservative pixel bounds of a sphere: project the corners of its AABB.
PixelBox sphere_box(const CameraIntrinsics& k, const Sphere& s) {
    double u0 = 1e30, v0 = 1e30, u1 = -1e30, v1 = -1e30;
    for (int dx = -1; dx <= 1; dx += 2)
        for (int dy = -1; dy <= 1; dy += 2)
            for (int dz = -1; dz <= 1; dz += 2) {
                const Vec3 corner = s.center + s.radius * Vec3(dx, dy, dz);
                if (corner.z() <= 1e-6) continue;
                const Pixel p = project(k, corner);
                u0 = std::min(u0, p.u);
                v0 = std::min(v0, p.v);
                u1 = std::max(u1, p.u);
                v1 = std::max(v1, p.v);
            }
    return clip_box(k, u0 - 1, v0 - 1, u1 + 1, v1 + 1);
}

}  // namespace

SensorFrame render_frame(const SceneSpec& scene, const CameraIntrinsics& intrinsics, const NoiseModel& noise,
                         uint64_t seed, const RenderOptions& options) {
    intrinsics.validate();
    SensorFrame f;
    f.intrinsics = intrinsics;
    f.width = intrinsics.width;
    f.height = intrinsics.height;
    f.timestamp = options.timestamp;
    const size_t n = static_cast<size_t>(f.width) * f.height;
    f.reflectivity.assign(n, 0);
    f.depth.assign(n, 0.0);

    // z-buffer of true surface distances; intensity decided per surface
    std::vector<double> surface(n, 0.0);
    std::vector<uint16_t> bright(n, 0);

    // precomputed unit-plane coordinates per row/column
    std::vector<double> ux(f.width), uy(f.height);
    for (int x = 0; x < f.width; ++x) ux[x] = intrinsics.unit_x(x);
    for (int y = 0; y < f.height; ++y) uy[y] = intrinsics.unit_y(y);

    auto put = [&](size_t i, double dist, uint16_t intensity) {
        if (surface[i] == 0.0 || dist < surface[i]) {
            surface[i] = dist;
            bright[i] = intensity;
        }
    };

    std::vector<Sphere> spheres;
    for (const auto& placed : scene.tools)
        for (const auto& m : placed.tool.markers)
            spheres.push_back({placed.pose(m), placed.tool.marker_radius});
    for (const auto& s : scene.strays) spheres.push_back({s.center, s.radius});

    const double span = options.marker_peak - options.marker_rim;
    for (const auto& s : spheres) {
        if (s.center.z() <= s.radius) continue;  // behind or enclosing the camera
        const double dist_c = s.center.norm();
        if (dist_c <= s.radius) continue;
        const PixelBox box = sphere_box(intrinsics, s);
        if (box.empty()) continue;
        const Vec3 chat = s.center / dist_c;
        const double sil = std::asin(std::min(1.0, s.radius / dist_c));  // silhouette half-angle
        for (int y = box.y0; y <= box.y1; ++y) {
            for (int x = box.x0; x <= box.x1; ++x) {
                Vec3 dir(ux[x], uy[y], 1.0);
                dir /= dir.norm();
                const double b = dir.dot(s.center);
                const double disc = b * b - (dist_c * dist_c - s.radius * s.radius);
                if (disc < 0) continue;
                const double t = b - std::sqrt(disc);
                if (t <= 0) continue;
                const double gamma = std::acos(std::clamp(dir.dot(chat), -1.0, 1.0));
                const double lambda = sil > 0 ? std::clamp(gamma / sil, 0.0, 1.0) : 0.0;
                const double intensity = options.marker_rim + span * std::cos(lambda * kPi / 2.0);
                put(f.index(x, y), t, static_cast<uint16_t>(std::lround(intensity)));
            }
        }
    }

    for (const auto& d : scene.distractors) {
        if (d.center.z() <= 0) continue;
        const Pixel left = project(intrinsics, d.center + Vec3(-d.half_x, 0, 0));
        const Pixel right = project(intrinsics, d.center + Vec3(d.half_x, 0, 0));
        const Pixel top = project(intrinsics, d.center + Vec3(0, -d.half_y, 0));
        const Pixel bottom = project(intrinsics, d.center + Vec3(0, d.half_y, 0));
        const PixelBox box = clip_box(intrinsics, std::min(left.u, right.u), std::min(top.v, bottom.v),
                                      std::max(left.u, right.u), std::max(top.v, bottom.v));
        if (box.empty()) continue;
        for (int y = box.y0; y <= box.y1; ++y) {
            for (int x = box.x0; x <= box.x1; ++x) {
                Vec3 dir(ux[x], uy[y], 1.0);
                const double norm = dir.norm();
                dir /= norm;
                const double t = d.center.z() * norm;  // ray length to the z = center.z plane
                const Vec3 hit = t * dir;
                if (std::abs(hit.x() - d.center.x()) > d.half_x || std::abs(hit.y() - d.center.y()) > d.half_y)
                    continue;
                put(f.index(x, y), t, d.intensity);
            }
        }
    }

    // single row-major pass: noise draws do not depend on draw order above
    Rng rng(mix_seed(seed, 0x52454e44));
    for (size_t i = 0; i < n; ++i) {
        if (surface[i] == 0.0) continue;
        f.reflectivity[i] = bright[i];
        double d = surface[i] + rng.gaussian() * noise.sigma_clamped(surface[i]);
        if (options.quantize) d = std::round(d);
        if (d < options.min_range || d > options.max_range) d = 0;
        f.depth[i] = d;
    }

    if (scene.background_max > 0) {
        const uint64_t bg_key = splitmix64(seed ^ 0xb46b46b4ull);
        for (size_t i = 0; i < n; ++i) {
            if (f.reflectivity[i] != 0) continue;
            f.reflectivity[i] = static_cast<uint16_t>(splitmix64(bg_key + i) % (scene.background_max + 1u));
        }
    }

    return f;
}

}  // namespace irtrack
