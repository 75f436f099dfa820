#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace irtrack {

inline double mean(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("mean: empty sample");
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double stddev(std::span<const double> v, int ddof = 1) {
    if (static_cast<int>(v.size()) <= ddof) throw std::invalid_argument("stddev: too few samples");
    const double m = mean(v);
    double ss = 0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - ddof));
}

// Linear-interpolation quantile (numpy's default), q in [0, 1]. Takes the
// sample by value; callers keep their data unsorted.
inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw std::invalid_argument("quantile: empty sample");
    if (q < 0 || q > 1) throw std::invalid_argument("quantile: q outside [0, 1]");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<size_t>(pos);
    if (lo + 1 >= v.size()) return v.back();
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[lo + 1] - v[lo]);
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

inline double iqr(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto q = [&](double p) {
        const double pos = p * static_cast<double>(v.size() - 1);
        const auto lo = static_cast<size_t>(pos);
        if (lo + 1 >= v.size()) return v.back();
        const double frac = pos - static_cast<double>(lo);
        return v[lo] + frac * (v[lo + 1] - v[lo]);
    };
    if (v.empty()) throw std::invalid_argument("iqr: empty sample");
    return q(0.75) - q(0.25);
}

}  // namespace irtrack
