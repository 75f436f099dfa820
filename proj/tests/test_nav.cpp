#include "irtrack/nav.hpp"

#include "doctest.h"
#include "support.hpp"

using namespace irtrack;
using irtrack::testing::random_transform;

TEST_CASE("chain_pose composes along the path") {
    Rng rng(71);
    const RigidTransform t_h_w = random_transform(rng);
    const RigidTransform t_a_h = random_transform(rng);
    const RigidTransform t_sp_a = random_transform(rng);
    const RigidTransform t_i_sp = random_transform(rng);

    FrameGraph g;
    g.add_edge("H", "W", t_h_w);
    g.add_edge("A", "H", t_a_h);
    g.add_edge("SP", "A", t_sp_a);
    g.add_edge("I", "SP", t_i_sp);

    const RigidTransform chained = g.chain_pose({"W", "H", "A", "SP", "I"});
    const RigidTransform direct = compose(compose(compose(t_h_w, t_a_h), t_sp_a), t_i_sp);
    CHECK((chained.R - direct.R).norm() < 1e-9);
    CHECK((chained.t - direct.t).norm() < 1e-9);

    // a path and its reverse compose to the identity
    const RigidTransform reverse = g.chain_pose({"I", "SP", "A", "H", "W"});
    const RigidTransform round = compose(chained, reverse);
    CHECK((round.R - Mat3::Identity()).norm() < 1e-6);
    CHECK(round.t.norm() < 1e-6);
}

TEST_CASE("chain_pose with identity edges is identity") {
    FrameGraph g;
    g.add_edge("B", "A", RigidTransform{});
    g.add_edge("C", "B", RigidTransform{});
    const RigidTransform t = g.chain_pose({"A", "B", "C"});
    CHECK((t.R - Mat3::Identity()).norm() < 1e-12);
    CHECK(t.t.norm() < 1e-12);
}

TEST_CASE("chain_pose names the missing hop") {
    FrameGraph g;
    g.add_edge("B", "A", RigidTransform{});
    try {
        g.chain_pose({"A", "B", "C"});
        FAIL("expected path_not_found");
    } catch (const path_not_found& e) {
        CHECK(std::string(e.what()).find("'B' and 'C'") != std::string::npos);
    }
}

TEST_CASE("chain_pose uses the latest edge at or before the query time") {
    Rng rng(72);
    const RigidTransform early = random_transform(rng);
    const RigidTransform late = random_transform(rng);
    FrameGraph g;
    g.add_edge("B", "A", early, 1.0);
    g.add_edge("B", "A", late, 2.0);
    CHECK((g.chain_pose({"A", "B"}, 1.5).t - early.t).norm() < 1e-12);
    CHECK((g.chain_pose({"A", "B"}, 2.5).t - late.t).norm() < 1e-12);
    CHECK((g.chain_pose({"A", "B"}).t - late.t).norm() < 1e-12);
    CHECK_THROWS_AS(g.chain_pose({"A", "B"}, 0.5), path_not_found);
}

TEST_CASE("chain_pose grouping does not matter") {
    Rng rng(73);
    const RigidTransform a = random_transform(rng), b = random_transform(rng), c = random_transform(rng);
    const RigidTransform left = compose(compose(a, b), c);
    const RigidTransform right = compose(a, compose(b, c));
    CHECK((left.R - right.R).norm() < 1e-9);
    CHECK((left.t - right.t).norm() < 1e-9);
}

TEST_CASE("display registration solve") {
    const RigidTransform id;
    const RigidTransform out = solve_display_registration(id, id, id);
    CHECK((out.R - Mat3::Identity()).norm() < 1e-12);
    CHECK(out.t.norm() < 1e-12);

    Rng rng(74);
    for (int trial = 0; trial < 20; ++trial) {
        const RigidTransform truth = random_transform(rng);
        const RigidTransform t_h_w = random_transform(rng);
        const RigidTransform t_sm_a = random_transform(rng);
        // consistent synthetic input: T_M^W = T_H^W * truth * T_SM^A
        const RigidTransform t_m_w = compose(compose(t_h_w, truth), t_sm_a);
        const RigidTransform solved = solve_display_registration(t_h_w, t_m_w, t_sm_a);
        CHECK((solved.R - truth.R).norm() < 1e-9);
        CHECK((solved.t - truth.t).norm() < 1e-9);
    }
}

TEST_CASE("display registration error propagates as a conjugated offset") {
    Rng rng(75);
    const RigidTransform t_h_w = random_transform(rng);
    const RigidTransform t_m_w = random_transform(rng);
    const RigidTransform t_sm_a = random_transform(rng);
    const RigidTransform base = solve_display_registration(t_h_w, t_m_w, t_sm_a);

    const RigidTransform offset = random_transform(rng, 5.0);
    const RigidTransform perturbed = solve_display_registration(t_h_w, compose(t_m_w, offset), t_sm_a);
    const RigidTransform expected = compose(base, compose(compose(t_sm_a, offset), invert(t_sm_a)));
    CHECK((perturbed.R - expected.R).norm() < 1e-9);
    CHECK((perturbed.t - expected.t).norm() < 1e-9);
}

namespace {

std::vector<RigidTransform> pivot_poses(const Vec3& tip, const Vec3& pivot, int count, uint64_t seed,
                                        double noise = 0.0) {
    Rng rng(seed);
    std::vector<RigidTransform> poses;
    for (int i = 0; i < count; ++i) {
        RigidTransform t;
        t.R = irtrack::testing::random_rotation(rng);
        t.t = pivot - t.R * tip;
        if (noise > 0) t.t += Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian()) * noise;
        poses.push_back(t);
    }
    return poses;
}

}  // namespace

TEST_CASE("pivot calibration recovers a noiseless tip") {
    const Vec3 tip(12, -3, 160);
    const Vec3 pivot(40, 25, 480);
    const auto poses = pivot_poses(tip, pivot, 24, 76);
    const PivotResult out = pivot_calibrate(poses);
    CHECK((out.tip_offset - tip).norm() < 1e-9);
    CHECK((out.pivot_point - pivot).norm() < 1e-9);
    CHECK(out.rms < 1e-9);
}

TEST_CASE("pivot calibration of a tip at the tool origin") {
    const auto poses = pivot_poses(Vec3::Zero(), {10, 20, 500}, 12, 77);
    const PivotResult out = pivot_calibrate(poses);
    CHECK(out.tip_offset.norm() < 1e-9);
}

TEST_CASE("pivot calibration under pose noise") {
    const Vec3 tip(5, 80, -22);
    const auto poses = pivot_poses(tip, {0, 0, 500}, 100, 78, 0.2);
    const PivotResult out = pivot_calibrate(poses);
    CHECK((out.tip_offset - tip).norm() < 0.3);
    CHECK(out.rms < 0.6);
    CHECK(out.rms > 0.05);  // inconsistent poses leave a residual
}

TEST_CASE("pivot calibration needs rotational diversity") {
    // rotations about a single axis leave one tip component unobservable
    Rng rng(79);
    const Vec3 tip(10, 0, 100), pivot(0, 0, 400);
    std::vector<RigidTransform> poses;
    for (int i = 0; i < 20; ++i) {
        RigidTransform t;
        t.R = axis_angle({0, 0, 1}, rng.uniform(0, 2 * kPi));
        t.t = pivot - t.R * tip;
        poses.push_back(t);
    }
    CHECK_THROWS_AS(pivot_calibrate(poses), degenerate_pivot);
    CHECK_THROWS_AS(pivot_calibrate(std::vector<RigidTransform>{poses[0], poses[1]}), std::invalid_argument);
}

TEST_CASE("trajectory_error analytic cases") {
    const Trajectory straight{{0, 0, 0}, {0, 0, 1}};
    const TrajectoryError same = trajectory_error(straight, straight);
    CHECK(same.translation_mm == doctest::Approx(0.0));
    CHECK(same.angle_deg == doctest::Approx(0.0));

    const Trajectory offset{{2, 0, 0}, {0, 0, 1}};
    const TrajectoryError lateral = trajectory_error(straight, offset);
    CHECK(lateral.translation_mm == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(lateral.angle_deg == doctest::Approx(0.0));

    const Trajectory tilted{{0, 0, 0}, {0, std::sin(deg2rad(5)), std::cos(deg2rad(5))}};
    const TrajectoryError angled = trajectory_error(straight, tilted);
    CHECK(angled.translation_mm == doctest::Approx(0.0));
    CHECK(angled.angle_deg == doctest::Approx(5.0).epsilon(1e-9));

    CHECK_THROWS_AS(trajectory_error(straight, Trajectory{{0, 0, 0}, {0, 0, 2}}), std::invalid_argument);
}

TEST_CASE("trajectory_error is invariant under a common rigid transform") {
    Rng rng(80);
    const Trajectory planned{{3, 4, 5}, Vec3(0.3, -0.2, 1).normalized()};
    const Trajectory executed{{5, 3, 4}, Vec3(0.25, -0.1, 1).normalized()};
    const TrajectoryError base = trajectory_error(planned, executed);

    const RigidTransform g = random_transform(rng);
    const Trajectory planned_g{g(planned.entry), g.R * planned.direction};
    const Trajectory executed_g{g(executed.entry), g.R * executed.direction};
    const TrajectoryError moved = trajectory_error(planned_g, executed_g);
    CHECK(moved.translation_mm == doctest::Approx(base.translation_mm).epsilon(1e-9));
    CHECK(moved.angle_deg == doctest::Approx(base.angle_deg).epsilon(1e-9));
}

TEST_CASE("trajectory_error disambiguates the insertion sense") {
    const Trajectory planned{{0, 0, 0}, {0, 0, 1}};
    const Trajectory flipped{{0, 0, 0}, {0, 0, -1}};
    CHECK(trajectory_error(planned, flipped).angle_deg == doctest::Approx(0.0));
}
