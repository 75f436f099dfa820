#include "irtrack/eval.hpp"

#include "doctest.h"
#include "irtrack/stats.hpp"
#include "support.hpp"

using namespace irtrack;
using irtrack::testing::random_rotation;

TEST_CASE("fit_plane on an exact plane") {
    std::vector<Vec3> pts;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) pts.emplace_back(i * 10.0 - 20.0, j * 10.0 - 20.0, 500.0);
    const PlaneFit fit = fit_plane(pts);
    CHECK(std::abs(fit.normal.z()) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.offset == doctest::Approx(500.0).epsilon(1e-12));
    CHECK(fit.rms < 1e-9);
}

TEST_CASE("fit_plane rms approaches the injected noise") {
    Rng rng(61);
    std::vector<Vec3> pts;
    const double sigma = 0.8;
    for (int i = 0; i < 10000; ++i)
        pts.emplace_back(rng.uniform(-100, 100), rng.uniform(-100, 100), 400.0 + sigma * rng.gaussian());
    const PlaneFit fit = fit_plane(pts);
    CHECK(fit.rms == doctest::Approx(sigma).epsilon(0.1));
}

TEST_CASE("fit_plane is rotation invariant") {
    Rng rng(62);
    std::vector<Vec3> pts;
    for (int i = 0; i < 500; ++i)
        pts.emplace_back(rng.uniform(-50, 50), rng.uniform(-50, 50), 300.0 + 0.5 * rng.gaussian());
    const double base = fit_plane(pts).rms;
    const Mat3 rot = random_rotation(rng);
    for (auto& p : pts) p = rot * p;
    CHECK(fit_plane(pts).rms == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("fit_plane rejects collinear points") {
    std::vector<Vec3> line;
    for (int i = 0; i < 10; ++i) line.emplace_back(i, 2.0 * i, 3.0 * i);
    CHECK_THROWS_AS(fit_plane(line), degenerate_geometry);
    CHECK_THROWS_AS(fit_plane(std::vector<Vec3>{{0, 0, 0}, {1, 0, 0}}), std::invalid_argument);
}

TEST_CASE("plane_ray_depth predicts ray lengths") {
    std::vector<Vec3> pts;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) pts.emplace_back(i * 10.0, j * 10.0, 600.0);
    const PlaneFit fit = fit_plane(pts);
    const Vec3 ray = Vec3(0.2, -0.1, 1.0).normalized();
    CHECK(plane_ray_depth(fit, ray) == doctest::Approx(600.0 / ray.z()).epsilon(1e-9));
}

TEST_CASE("normality statistic accepts gaussian samples") {
    int rejects = 0;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(100 + seed);
        std::vector<double> samples(10000);
        for (auto& s : samples) s = rng.gaussian();
        if (normality_statistic(samples).reject_at_5pct) ++rejects;
    }
    CHECK(rejects <= 2);  // >= 90% non-reject
}

TEST_CASE("normality statistic rejects uniform samples") {
    Rng rng(63);
    std::vector<double> samples(10000);
    for (auto& s : samples) s = rng.uniform();
    const NormalityTest t = normality_statistic(samples);
    CHECK(t.reject_at_5pct);
    CHECK(t.a2_star > 0.787);
}

TEST_CASE("plane residuals keep their noise character") {
    // gaussian ray noise -> non-reject; uniform ray noise -> reject
    Rng rng(64);
    auto residuals_with = [&](bool uniform) {
        std::vector<Vec3> cloud;
        std::vector<Vec3> rays;
        std::vector<double> depths;
        for (int i = 0; i < 12000; ++i) {
            Vec3 dir(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), 1.0);
            dir.normalize();
            const double true_depth = 500.0 / dir.z();
            const double noise = uniform ? rng.uniform(-1.0, 1.0) : 0.5 * rng.gaussian();
            rays.push_back(dir);
            depths.push_back(true_depth + noise);
            cloud.push_back(dir * depths.back());
        }
        const PlaneFit fit = fit_plane(cloud);
        std::vector<double> out;
        for (size_t i = 0; i < cloud.size(); ++i) out.push_back(depths[i] - plane_ray_depth(fit, rays[i]));
        return out;
    };
    CHECK_FALSE(normality_statistic(residuals_with(false)).reject_at_5pct);
    CHECK(normality_statistic(residuals_with(true)).reject_at_5pct);
}

TEST_CASE("normality statistic rejects degenerate input") {
    const std::vector<double> constant(100, 3.5);
    CHECK_THROWS_AS(normality_statistic(constant), std::invalid_argument);
    const std::vector<double> few{1, 2, 3};
    CHECK_THROWS_AS(normality_statistic(few), std::invalid_argument);
}

TEST_CASE("fit_noise_quadratic recovers exact coefficients") {
    std::vector<double> depths, sigmas;
    for (double d = 150; d <= 950; d += 25) {
        depths.push_back(d);
        sigmas.push_back(0.05 + 2e-4 * d + 1.2e-6 * d * d);
    }
    const NoiseFit fit = fit_noise_quadratic(depths, sigmas);
    CHECK(fit.model.a == doctest::Approx(0.05).epsilon(1e-6));
    CHECK(fit.model.b == doctest::Approx(2e-4).epsilon(1e-6));
    CHECK(fit.model.c == doctest::Approx(1.2e-6).epsilon(1e-6));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fit.model.d_min == doctest::Approx(150.0));
}

TEST_CASE("fit_noise_quadratic on linear data leaves c near zero") {
    std::vector<double> depths, sigmas;
    for (double d = 200; d <= 900; d += 50) {
        depths.push_back(d);
        sigmas.push_back(0.1 + 5e-4 * d);
    }
    const NoiseFit fit = fit_noise_quadratic(depths, sigmas);
    CHECK(std::abs(fit.model.c) < 1e-12);
}

TEST_CASE("fit_noise_quadratic needs three distinct depths") {
    const std::vector<double> d{500, 500, 600};
    const std::vector<double> s{0.5, 0.5, 0.6};
    CHECK_THROWS_AS(fit_noise_quadratic(d, s), degenerate_fit);
}

namespace {

MotionTrace sinusoid(double rate_hz, double duration, double delay, double amplitude, double offset) {
    MotionTrace t;
    for (double time = 0; time <= duration; time += 1.0 / rate_hz) {
        t.t.push_back(time);
        t.x.push_back(offset + amplitude * std::sin(2 * kPi * (time - delay) / 7.0));
    }
    return t;
}

}  // namespace

TEST_CASE("estimate_latency of identical traces is zero") {
    const MotionTrace ref = sinusoid(100, 30, 0, 40, 0);
    CHECK(estimate_latency(ref, ref, 5.0) == doctest::Approx(0.0));
}

TEST_CASE("estimate_latency recovers known delays within one sample") {
    const MotionTrace ref = sinusoid(100, 30, 0, 40, 0);
    for (double delay : {0.05, 0.103, 0.4}) {
        const MotionTrace delayed = sinusoid(100, 30, delay, 40, 0);
        CHECK(estimate_latency(ref, delayed, 5.0) == doctest::Approx(delay).epsilon(0.2));
        CHECK(std::abs(estimate_latency(ref, delayed, 5.0) - delay) <= 0.01 + 1e-12);
    }
}

TEST_CASE("estimate_latency ignores a constant amplitude offset") {
    const MotionTrace ref = sinusoid(100, 30, 0, 40, 0);
    const MotionTrace shifted = sinusoid(100, 30, 0.103, 40, 17.5);
    CHECK(std::abs(estimate_latency(ref, shifted, 5.0) - 0.103) <= 0.01 + 1e-12);
}

TEST_CASE("estimate_latency rejects an oversized search window") {
    const MotionTrace ref = sinusoid(100, 10, 0, 40, 0);
    CHECK_THROWS_AS(estimate_latency(ref, ref, 20.0), std::invalid_argument);
    MotionTrace bad = ref;
    bad.t[5] = bad.t[4];
    CHECK_THROWS_AS(estimate_latency(ref, bad, 5.0), std::invalid_argument);
}

TEST_CASE("quantile and iqr helpers") {
    std::vector<double> v{4, 1, 3, 2};
    CHECK(median(v) == doctest::Approx(2.5));
    CHECK(quantile(v, 0.0) == doctest::Approx(1.0));
    CHECK(quantile(v, 1.0) == doctest::Approx(4.0));
    CHECK(iqr(v) == doctest::Approx(1.5));  // 3.25 - 1.75
}
