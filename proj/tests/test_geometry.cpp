#include "irtrack/geometry.hpp"

#include "doctest.h"
#include "support.hpp"

using namespace irtrack;
using irtrack::testing::random_noncoplanar_points;
using irtrack::testing::random_rotation;
using irtrack::testing::random_transform;

namespace {

CameraIntrinsics unit_plane_intrinsics() {
    // unit-plane coordinate == 0.01 * (pixel - 100)
    CameraIntrinsics k;
    k.fx = k.fy = 1.0;
    k.sx = k.sy = 0.01;
    k.cx = k.cy = 100;
    k.width = k.height = 200;
    return k;
}

}  // namespace

TEST_CASE("back_project on-axis ray") {
    const auto k = unit_plane_intrinsics();
    const Vec3 p = back_project(k, {100, 100}, 500.0);
    CHECK(p.x() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p.y() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p.z() == doctest::Approx(500.0).epsilon(1e-12));
}

TEST_CASE("back_project unit-plane (1,0) at depth 100") {
    const auto k = unit_plane_intrinsics();
    const Vec3 p = back_project(k, {200, 100}, 100.0);  // unit-plane x = 1
    const double expected = 100.0 / std::sqrt(2.0);
    CHECK(p.x() == doctest::Approx(expected).epsilon(1e-12));
    CHECK(p.y() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p.z() == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("back_project preserves ray distance") {
    Rng rng(11);
    const auto k = CameraIntrinsics::ahat_like();
    for (int i = 0; i < 200; ++i) {
        const Pixel px{rng.uniform(0, 511), rng.uniform(0, 511)};
        const double d = rng.uniform(50, 1100);
        CHECK(back_project(k, px, d).norm() == doctest::Approx(d).epsilon(1e-12));
    }
}

TEST_CASE("back_project rejects non-positive depth") {
    const auto k = unit_plane_intrinsics();
    CHECK_THROWS_AS(back_project(k, {100, 100}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(back_project(k, {100, 100}, -5.0), std::invalid_argument);
}

TEST_CASE("sphere_center_correct") {
    CHECK((sphere_center_correct({0, 0, 100}, 100, 0) - Vec3(0, 0, 100)).norm() < 1e-12);
    CHECK((sphere_center_correct({0, 0, 100}, 100, 5) - Vec3(0, 0, 105)).norm() < 1e-12);
    CHECK((sphere_center_correct({30, 0, 40}, 50, 5) - Vec3(33, 0, 44)).norm() < 1e-12);
    CHECK_THROWS_AS(sphere_center_correct({0, 0, 100}, 100, -1), std::invalid_argument);
}

TEST_CASE("project hits the principal point on-axis") {
    const auto k = unit_plane_intrinsics();
    const Pixel px = project(k, {0, 0, 500});
    CHECK(px.u == doctest::Approx(100.0));
    CHECK(px.v == doctest::Approx(100.0));
    CHECK_THROWS_AS(project(k, {0, 0, -1}), behind_camera);
    CHECK_THROWS_AS(project(k, {0, 0, 0}), behind_camera);
}

TEST_CASE("project/back_project round trip") {
    Rng rng(12);
    const auto k = CameraIntrinsics::ahat_like();
    for (int i = 0; i < 200; ++i) {
        const Pixel px{rng.uniform(0, 511), rng.uniform(0, 511)};
        const double d = rng.uniform(100, 1100);
        const Vec3 p = back_project(k, px, d);
        const Pixel round = project(k, p);
        CHECK(round.u == doctest::Approx(px.u).epsilon(1e-9));
        CHECK(round.v == doctest::Approx(px.v).epsilon(1e-9));
        CHECK((back_project(k, round, p.norm()) - p).norm() < 1e-6);
    }
}

TEST_CASE("project lands border points on border pixels") {
    const auto k = CameraIntrinsics::ahat_like();
    const Vec3 p = back_project(k, {511, 255.5}, 600.0);
    const Pixel px = project(k, p);
    CHECK(px.u == doctest::Approx(511.0).epsilon(1e-9));
    CHECK(px.v == doctest::Approx(255.5).epsilon(1e-9));
}

TEST_CASE("rigid_register identity") {
    const std::vector<Vec3> pts{{0, 0, 0}, {10, 0, 0}, {0, 12, 0}, {3, 4, 9}};
    const Registration reg = rigid_register(pts, pts);
    CHECK(reg.rmse < 1e-12);
    CHECK((reg.transform.R - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(reg.transform.t.norm() < 1e-12);
}

TEST_CASE("rigid_register recovers a 90 degree z rotation") {
    const Mat3 rot = axis_angle({0, 0, 1}, kPi / 2);
    const std::vector<Vec3> src{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {2, 1, 0}};
    std::vector<Vec3> dst;
    for (const auto& p : src) dst.push_back(rot * p);
    const Registration reg = rigid_register(src, dst);
    CHECK(reg.rmse < 1e-9);
    CHECK((reg.transform.R - rot).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((reg.transform({1, 0, 0}) - Vec3(0, 1, 0)).norm() < 1e-9);
}

TEST_CASE("rigid_register construct-then-solve on random sets") {
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const auto src = random_noncoplanar_points(rng, 4 + static_cast<int>(rng.integer(4)));
        const RigidTransform truth = random_transform(rng);
        std::vector<Vec3> dst;
        for (const auto& p : src) dst.push_back(truth(p));
        const Registration reg = rigid_register(src, dst);
        CHECK(reg.rmse < 1e-9);
        CHECK((reg.transform.R - truth.R).norm() < 1e-9);
        CHECK((reg.transform.t - truth.t).norm() < 1e-9);
        CHECK(is_rigid(reg.transform));
    }
}

TEST_CASE("rigid_register keeps det(R)=+1 on planar reflection hazards") {
    Rng rng(14);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Vec3> src;
        for (int i = 0; i < 5; ++i) src.emplace_back(rng.gaussian() * 50, rng.gaussian() * 50, 0.0);
        const RigidTransform truth = random_transform(rng);
        std::vector<Vec3> dst;
        for (const auto& p : src) dst.push_back(truth(p));
        const Registration reg = rigid_register(src, dst);
        CHECK(reg.transform.R.determinant() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(reg.rmse < 1e-9);
        CHECK((reg.transform.R - truth.R).norm() < 1e-7);
    }
}

TEST_CASE("rigid_register rejects degenerate input") {
    const std::vector<Vec3> line{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {3, 3, 3}};
    CHECK_THROWS_AS(rigid_register(line, line), degenerate_geometry);
    const std::vector<Vec3> a{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    const std::vector<Vec3> b{{0, 0, 0}, {1, 0, 0}};
    CHECK_THROWS_AS(rigid_register(a, b), std::invalid_argument);
    CHECK_THROWS_AS(rigid_register(b, b), std::invalid_argument);
}

TEST_CASE("rigid_register residual is invariant under a common rigid motion") {
    Rng rng(15);
    auto src = random_noncoplanar_points(rng, 5);
    auto dst = src;
    for (auto& p : dst) p += Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian());  // noisy target
    const double base = rigid_register(src, dst).rmse;

    const RigidTransform g = random_transform(rng);
    std::vector<Vec3> src_g, dst_g;
    for (const auto& p : src) src_g.push_back(g(p));
    for (const auto& p : dst) dst_g.push_back(g(p));
    CHECK(rigid_register(src_g, dst_g).rmse == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("compose and invert") {
    Rng rng(16);
    const RigidTransform x = random_transform(rng);
    const RigidTransform id;
    CHECK((compose(id, x).R - x.R).norm() < 1e-12);
    CHECK((compose(id, x).t - x.t).norm() < 1e-12);

    const RigidTransform twice = invert(invert(x));
    CHECK((twice.R - x.R).norm() < 1e-12);
    CHECK((twice.t - x.t).norm() < 1e-12);

    const RigidTransform xi = compose(invert(x), x);
    CHECK((xi.R - Mat3::Identity()).norm() < 1e-9);
    CHECK(xi.t.norm() < 1e-9);

    // chain of 4 equals stepwise application
    const RigidTransform a = random_transform(rng), b = random_transform(rng), c = random_transform(rng),
                         d = random_transform(rng);
    const RigidTransform chain = compose(compose(compose(a, b), c), d);
    const Vec3 p = irtrack::testing::random_point(rng);
    CHECK((chain(p) - a(b(c(d(p))))).norm() < 1e-7);
}

TEST_CASE("fov_estimate") {
    const std::vector<double> sym{-1.0, 0.2, 1.0};
    const std::vector<double> ys{-0.5, 0.5};
    CHECK(fov_estimate(sym, ys).x_deg == doctest::Approx(90.0).epsilon(1e-12));

    // reported sensor width: about six times the RGB camera's 40 degrees
    const double wide = std::tan(deg2rad(63.5));
    const std::vector<double> ahat{-wide, 0.0, wide};
    CHECK(fov_estimate(ahat, ahat).x_deg == doctest::Approx(127.0).epsilon(1e-9));

    const std::vector<double> single_sided{0.0, 1.0};
    CHECK(fov_estimate(single_sided, single_sided).y_deg == doctest::Approx(45.0).epsilon(1e-12));

    CHECK_THROWS_AS(fov_estimate(std::vector<double>{1.0}, ys), std::invalid_argument);
}

TEST_CASE("fov_estimate is order-invariant and monotone under new samples") {
    Rng rng(17);
    std::vector<double> xs;
    for (int i = 0; i < 10; ++i) xs.push_back(rng.uniform(-2, 2));
    std::vector<double> shuffled = xs;
    std::reverse(shuffled.begin(), shuffled.end());
    const std::vector<double> ys{-1.0, 1.0};
    CHECK(fov_estimate(xs, ys).x_deg == doctest::Approx(fov_estimate(shuffled, ys).x_deg));

    double previous = fov_estimate(std::vector<double>{xs[0], xs[1]}, ys).x_deg;
    for (size_t n = 3; n <= xs.size(); ++n) {
        const double next = fov_estimate(std::span<const double>(xs.data(), n), ys).x_deg;
        CHECK(next >= previous - 1e-12);
        previous = next;
    }
}

TEST_CASE("ahat-like intrinsics span the reported field of view") {
    const auto k = CameraIntrinsics::ahat_like();
    k.validate();
    CHECK(k.fov_x_deg() == doctest::Approx(127.0).epsilon(1e-6));
    CHECK(k.fov_y_deg() == doctest::Approx(127.0).epsilon(1e-6));
    CHECK(k.width == 512);
}

TEST_CASE("intrinsics validation") {
    auto k = CameraIntrinsics::ahat_like();
    k.fx = 0;
    CHECK_THROWS_AS(k.validate(), std::invalid_argument);
    k = CameraIntrinsics::ahat_like();
    k.cx = 600;
    CHECK_THROWS_AS(k.validate(), std::invalid_argument);
}

TEST_CASE("rotation_angle_deg") {
    CHECK(rotation_angle_deg(Mat3::Identity()) == doctest::Approx(0.0));
    CHECK(rotation_angle_deg(axis_angle({0, 1, 0}, deg2rad(50))) == doctest::Approx(50.0).epsilon(1e-9));
}
