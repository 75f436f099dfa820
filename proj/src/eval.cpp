#include "irtrack/eval.hpp"

#include <algorithm>
#include <cmath>

#include "irtrack/stats.hpp"

namespace irtrack {

PlaneFit fit_plane(std::span<const Vec3> points) {
    if (points.size() < 3) throw std::invalid_argument("fit_plane: needs at least 3 points");
    Vec3 centroid = Vec3::Zero();
    for (const auto& p : points) centroid += p;
    centroid /= static_cast<double>(points.size());

    Mat3 scatter = Mat3::Zero();
    for (const auto& p : points) {
        const Vec3 q = p - centroid;
        scatter += q * q.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);  // ascending
    const auto& ev = eig.eigenvalues();
    if (!(ev(2) > 0) || ev(1) < 1e-12 * ev(2))
        throw degenerate_geometry("fit_plane: points are collinear");

    PlaneFit fit;
    fit.normal = eig.eigenvectors().col(0);
    // orient toward positive offset for a stable sign
    if (fit.normal.dot(centroid) < 0) fit.normal = -fit.normal;
    fit.offset = fit.normal.dot(centroid);
    fit.rms = std::sqrt(std::max(0.0, ev(0)) / static_cast<double>(points.size()));
    return fit;
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

NormalityTest normality_statistic(std::span<const double> samples) {
    const size_t n = samples.size();
    if (n < 8) throw std::invalid_argument("normality_statistic: needs at least 8 samples");
    const double m = mean(samples);
    const double sd = stddev(samples);
    if (!(sd > 0)) throw std::invalid_argument("normality_statistic: zero sample variance");

    std::vector<double> z(n);
    for (size_t i = 0; i < n; ++i) z[i] = (samples[i] - m) / sd;
    std::sort(z.begin(), z.end());

    double s = 0;
    const double nd = static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) {
        const double lo = std::clamp(normal_cdf(z[i]), 1e-300, 1.0 - 1e-16);
        const double hi = std::clamp(normal_cdf(z[n - 1 - i]), 1e-300, 1.0 - 1e-16);
        s += (2.0 * static_cast<double>(i) + 1.0) * (std::log(lo) + std::log1p(-hi));
    }
    const double a2 = -nd - s / nd;

    NormalityTest out;
    out.a2_star = a2 * (1.0 + 4.0 / nd - 25.0 / (nd * nd));
    out.reject_at_5pct = out.a2_star > 0.787;
    return out;
}

NoiseFit fit_noise_quadratic(std::span<const double> depths, std::span<const double> sigmas) {
    if (depths.size() != sigmas.size())
        throw std::invalid_argument("fit_noise_quadratic: mismatched observation lists");
    std::vector<double> distinct(depths.begin(), depths.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 3) throw degenerate_fit("fit_noise_quadratic: needs at least 3 distinct depths");

    const auto n = static_cast<Eigen::Index>(depths.size());
    Eigen::MatrixXd design(n, 3);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        design(i, 0) = 1.0;
        design(i, 1) = depths[i];
        design(i, 2) = depths[i] * depths[i];
        rhs(i) = sigmas[i];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < 3) throw degenerate_fit("fit_noise_quadratic: rank-deficient design");
    const Eigen::Vector3d coeff = qr.solve(rhs);

    const double sigma_mean = rhs.mean();
    double ss_res = 0, ss_tot = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double fitted = coeff(0) + coeff(1) * depths[i] + coeff(2) * depths[i] * depths[i];
        ss_res += (sigmas[i] - fitted) * (sigmas[i] - fitted);
        ss_tot += (sigmas[i] - sigma_mean) * (sigmas[i] - sigma_mean);
    }

    NoiseFit out;
    out.model.a = coeff(0);
    out.model.b = coeff(1);
    out.model.c = coeff(2);
    out.model.d_min = distinct.front();
    out.model.d_max = distinct.back();
    out.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return out;
}

namespace {

double interp(const MotionTrace& trace, double t) {
    const auto& ts = trace.t;
    auto it = std::lower_bound(ts.begin(), ts.end(), t);
    if (it == ts.begin()) return trace.x.front();
    if (it == ts.end()) return trace.x.back();
    const size_t hi = static_cast<size_t>(it - ts.begin());
    const size_t lo = hi - 1;
    const double f = (t - ts[lo]) / (ts[hi] - ts[lo]);
    return trace.x[lo] + f * (trace.x[hi] - trace.x[lo]);
}

double median_step(const std::vector<double>& t) {
    std::vector<double> dt;
    dt.reserve(t.size());
    for (size_t i = 1; i < t.size(); ++i) dt.push_back(t[i] - t[i - 1]);
    std::nth_element(dt.begin(), dt.begin() + dt.size() / 2, dt.end());
    return dt[dt.size() / 2];
}

void check_trace(const MotionTrace& m, const char* label) {
    if (m.t.size() != m.x.size() || m.t.size() < 2)
        throw std::invalid_argument(std::string("estimate_latency: bad trace ") + label);
    for (size_t i = 1; i < m.t.size(); ++i)
        if (!(m.t[i] > m.t[i - 1]))
            throw std::invalid_argument(std::string("estimate_latency: non-increasing timestamps in ") + label);
}

}  // namespace

double estimate_latency(const MotionTrace& reference, const MotionTrace& test, double t_mov) {
    check_trace(reference, "reference");
    check_trace(test, "test");
    if (!(t_mov > 0)) throw std::invalid_argument("estimate_latency: t_mov must be positive");
    const double ref_span = reference.t.back() - reference.t.front();
    if (t_mov >= ref_span)
        throw std::invalid_argument("estimate_latency: search window exceeds the reference trace length");

    // midrange adjustment of the test trace onto the reference
    const auto midrange2 = [](const MotionTrace& m) {
        const auto [lo, hi] = std::minmax_element(m.x.begin(), m.x.end());
        return *lo + *hi;
    };
    MotionTrace adjusted = test;
    const double shift = (midrange2(reference) - midrange2(test)) / 2.0;
    for (auto& x : adjusted.x) x += shift;

    const double step = std::min(median_step(reference.t), median_step(test.t));

    // the test signal lags the reference: advancing its sample time by the
    // candidate delay should superimpose the traces
    double best_delay = 0, best_err = std::numeric_limits<double>::infinity();
    for (double delay = 0; delay < t_mov; delay += step) {
        double err = 0;
        size_t count = 0;
        for (size_t i = 0; i < reference.t.size(); ++i) {
            const double ts = reference.t[i] + delay;
            if (ts < adjusted.t.front() || ts > adjusted.t.back()) continue;
            const double d = reference.x[i] - interp(adjusted, ts);
            err += d * d;
            ++count;
        }
        if (count == 0) continue;
        err /= static_cast<double>(count);
        if (err < best_err) {
            best_err = err;
            best_delay = delay;
        }
    }
    return best_delay;
}

}  // namespace irtrack
