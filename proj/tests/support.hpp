#pragma once

#include <vector>

#include "irtrack/geometry.hpp"
#include "irtrack/random.hpp"

namespace irtrack::testing {

inline Mat3 random_rotation(Rng& rng) {
    Eigen::Vector4d q(rng.gaussian(), rng.gaussian(), rng.gaussian(), rng.gaussian());
    q.normalize();
    return Eigen::Quaterniond(q(0), q(1), q(2), q(3)).toRotationMatrix();
}

inline RigidTransform random_transform(Rng& rng, double translation_scale = 100.0) {
    RigidTransform t;
    t.R = random_rotation(rng);
    t.t = Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian()) * translation_scale;
    return t;
}

inline Vec3 random_point(Rng& rng, double scale = 100.0) {
    return Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian()) * scale;
}

inline std::vector<Vec3> random_noncoplanar_points(Rng& rng, int n, double scale = 100.0) {
    std::vector<Vec3> pts;
    while (true) {
        pts.clear();
        for (int i = 0; i < n; ++i) pts.push_back(random_point(rng, scale));
        Vec3 c = Vec3::Zero();
        for (const auto& p : pts) c += p;
        c /= n;
        Mat3 scatter = Mat3::Zero();
        for (const auto& p : pts) scatter += (p - c) * (p - c).transpose();
        Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);
        if (eig.eigenvalues()(0) > 1e-3 * eig.eigenvalues()(2)) return pts;
    }
}

}  // namespace irtrack::testing
