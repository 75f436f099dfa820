#pragma once

#include <Eigen/Dense>
#include <span>
#include <stdexcept>
#include <vector>

namespace irtrack {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

struct behind_camera : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct degenerate_geometry : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Continuous image coordinates; integer values are pixel centers.
struct Pixel {
    double u = 0;
    double v = 0;
};

// Pinhole model. Focal length in mm, pixel pitch in mm/px; the unit-plane
// coordinate of a pixel is (u - cx) * sx / fx.
struct CameraIntrinsics {
    double fx = 1, fy = 1;  // mm
    double sx = 1, sy = 1;  // mm/px
    double cx = 0, cy = 0;  // px
    int width = 0, height = 0;

    double unit_x(double u) const { return (u - cx) * sx / fx; }
    double unit_y(double v) const { return (v - cy) * sy / fy; }

    bool contains(const Pixel& p) const {
        return p.u >= -0.5 && p.u < width - 0.5 && p.v >= -0.5 && p.v < height - 0.5;
    }

    // FoV spanned by the outermost pixel centers of each axis.
    double fov_x_deg() const;
    double fov_y_deg() const;

    void validate() const;

    // Synthesized near-range ToF defaults: 512x512, 127x127 deg; nothing in
    // the device documentation fixes these numerically, see README.
    static CameraIntrinsics ahat_like();
};

// Depth is radial distance from the optical center along the pixel's ray,
// not the z coordinate. Result norm equals depth.
Vec3 back_project(const CameraIntrinsics& intr, const Pixel& px, double depth_mm);

// Inverse of back_project up to the depth (projection only needs direction).
Pixel project(const CameraIntrinsics& intr, const Vec3& p);

// Moves a surface point out to the sphere center along its ray: (d + r)/d * p.
Vec3 sphere_center_correct(const Vec3& surface_point, double depth_mm, double radius_mm);

struct RigidTransform {
    Mat3 R = Mat3::Identity();
    Vec3 t = Vec3::Zero();
    Vec3 operator()(const Vec3& p) const { return R * p + t; }
};

RigidTransform compose(const RigidTransform& a, const RigidTransform& b);  // p -> a(b(p))
RigidTransform invert(const RigidTransform& a);
bool is_rigid(const RigidTransform& a, double tol = 1e-9);

// Rotation by angle (radians) about a unit axis.
Mat3 axis_angle(const Vec3& axis, double angle_rad);
double rotation_angle_deg(const Mat3& r);

struct Registration {
    RigidTransform transform;
    double rmse = 0;  // mm
};

// Least-squares rigid fit src -> dst (Kabsch). det(R) = +1 is enforced by
// negating the smallest singular direction. Collinear sources are rejected:
// the middle singular value of the cross-covariance below 1e-9 of the
// largest means rotation about the line is unobservable.
Registration rigid_register(std::span<const Vec3> src, std::span<const Vec3> dst);

struct FieldOfView {
    double x_deg = 0;
    double y_deg = 0;
};

// Maximum pairwise angle between the rays (x_i, 0, 1) resp. (0, y_i, 1).
FieldOfView fov_estimate(std::span<const double> unit_plane_xs, std::span<const double> unit_plane_ys);

}  // namespace irtrack
