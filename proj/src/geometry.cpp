#include "irtrack/geometry.hpp"

#include <cmath>

namespace irtrack {

double CameraIntrinsics::fov_x_deg() const {
    return rad2deg(std::atan(unit_x(width - 1)) - std::atan(unit_x(0)));
}

double CameraIntrinsics::fov_y_deg() const {
    return rad2deg(std::atan(unit_y(height - 1)) - std::atan(unit_y(0)));
}

void CameraIntrinsics::validate() const {
    if (!(fx > 0 && fy > 0 && sx > 0 && sy > 0))
        throw std::invalid_argument("intrinsics: focal length and pixel pitch must be positive");
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("intrinsics: image dimensions must be positive");
    if (!(cx >= 0 && cx < width && cy >= 0 && cy < height))
        throw std::invalid_argument("intrinsics: principal point outside image");
}

CameraIntrinsics CameraIntrinsics::ahat_like() {
    CameraIntrinsics k;
    k.width = k.height = 512;
    k.cx = k.cy = 255.5;
    k.fx = k.fy = 1.0;
    k.sx = k.sy = std::tan(deg2rad(63.5)) / 255.5;
    return k;
}

Vec3 back_project(const CameraIntrinsics& intr, const Pixel& px, double depth_mm) {
    if (!(depth_mm > 0)) throw std::invalid_argument("back_project: depth must be positive");
    if (!std::isfinite(px.u) || !std::isfinite(px.v))
        throw std::invalid_argument("back_project: non-finite pixel");
    const Vec3 ray(intr.unit_x(px.u), intr.unit_y(px.v), 1.0);
    return (depth_mm / ray.norm()) * ray;
}

Pixel project(const CameraIntrinsics& intr, const Vec3& p) {
    if (!(p.z() > 0)) throw behind_camera("project: point has non-positive z");
    return {p.x() / p.z() * intr.fx / intr.sx + intr.cx,
            p.y() / p.z() * intr.fy / intr.sy + intr.cy};
}

Vec3 sphere_center_correct(const Vec3& surface_point, double depth_mm, double radius_mm) {
    if (!(depth_mm > 0)) throw std::invalid_argument("sphere_center_correct: depth must be positive");
    if (radius_mm < 0) throw std::invalid_argument("sphere_center_correct: negative radius");
    return ((depth_mm + radius_mm) / depth_mm) * surface_point;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
    return {a.R * b.R, a.R * b.t + a.t};
}

RigidTransform invert(const RigidTransform& a) {
    return {a.R.transpose(), -(a.R.transpose() * a.t)};
}

bool is_rigid(const RigidTransform& a, double tol) {
    const Mat3 should_be_identity = a.R.transpose() * a.R - Mat3::Identity();
    return should_be_identity.cwiseAbs().maxCoeff() <= tol && std::abs(a.R.determinant() - 1.0) <= tol;
}

Mat3 axis_angle(const Vec3& axis, double angle_rad) {
    return Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix();
}

double rotation_angle_deg(const Mat3& r) {
    const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
    return rad2deg(std::acos(c));
}

Registration rigid_register(std::span<const Vec3> src, std::span<const Vec3> dst) {
    if (src.size() != dst.size()) throw std::invalid_argument("rigid_register: point count mismatch");
    if (src.size() < 3) throw std::invalid_argument("rigid_register: needs at least 3 points");
    const auto n = static_cast<double>(src.size());

    Vec3 cs = Vec3::Zero(), cd = Vec3::Zero();
    for (size_t i = 0; i < src.size(); ++i) {
        cs += src[i];
        cd += dst[i];
    }
    cs /= n;
    cd /= n;

    Mat3 cov = Mat3::Zero();
    for (size_t i = 0; i < src.size(); ++i) cov += (src[i] - cs) * (dst[i] - cd).transpose();

    Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d sv = svd.singularValues();
    if (!(sv(0) > 0) || sv(1) < 1e-9 * sv(0))
        throw degenerate_geometry("rigid_register: source points are collinear or coincident");

    Mat3 d = Mat3::Identity();
    if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0) d(2, 2) = -1;

    Registration out;
    out.transform.R = svd.matrixV() * d * svd.matrixU().transpose();
    out.transform.t = cd - out.transform.R * cs;

    double ss = 0;
    for (size_t i = 0; i < src.size(); ++i)
        ss += (out.transform.R * src[i] + out.transform.t - dst[i]).squaredNorm();
    out.rmse = std::sqrt(ss / n);
    return out;
}

namespace {

double axis_fov_deg(std::span<const double> v, const char* axis) {
    if (v.size() < 2)
        throw std::invalid_argument(std::string("fov_estimate: need at least 2 samples on ") + axis);
    double lo = v[0], hi = v[0];
    for (double x : v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    // All rays lie in one plane, so the max pairwise angle is between the
    // extreme directions.
    return rad2deg(std::atan(hi) - std::atan(lo));
}

}  // namespace

FieldOfView fov_estimate(std::span<const double> xs, std::span<const double> ys) {
    return {axis_fov_deg(xs, "x"), axis_fov_deg(ys, "y")};
}

}  // namespace irtrack
