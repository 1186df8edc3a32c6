#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace lqg::stats {

inline double mean(const std::vector<double>& xs) {
    if (xs.empty()) throw std::invalid_argument("mean of empty sample");
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc / static_cast<double>(xs.size());
}

inline double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) throw std::invalid_argument("quantile of empty sample");
    std::sort(xs.begin(), xs.end());
    double pos = q * static_cast<double>(xs.size() - 1);
    size_t lo = static_cast<size_t>(std::floor(pos));
    size_t hi = static_cast<size_t>(std::ceil(pos));
    double t = pos - static_cast<double>(lo);
    return (1.0 - t) * xs[lo] + t * xs[hi];
}

inline double median(const std::vector<double>& xs) { return quantile(xs, 0.5); }

inline double iqr(const std::vector<double>& xs) {
    return quantile(xs, 0.75) - quantile(xs, 0.25);
}

inline double sample_variance(const std::vector<double>& xs) {
    if (xs.size() < 2) throw std::invalid_argument("variance needs >= 2 points");
    double m = mean(xs), acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return acc / static_cast<double>(xs.size() - 1);
}

struct WilsonInterval {
    double lower = 0.0;
    double upper = 0.0;
};

/// 95% Wilson score interval for a binomial proportion.
inline WilsonInterval wilson(double successes, double n) {
    if (!(n > 0.0)) throw std::invalid_argument("wilson: n must be > 0");
    const double z = 1.959963984540054;
    double phat = successes / n;
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (phat + z2 / (2.0 * n)) / denom;
    double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

/// Least-squares slope of y against x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("ls_slope: need matching samples of size >= 2");
    double mx = mean(x), my = mean(y), num = 0.0, den = 0.0;
    for (size_t k = 0; k < x.size(); ++k) {
        num += (x[k] - mx) * (y[k] - my);
        den += (x[k] - mx) * (x[k] - mx);
    }
    return num / den;
}

}  // namespace lqg::stats
