#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace chainsde::stats {

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
};

inline MeanStderr mean_stderr(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("mean_stderr: empty sample");
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    v /= static_cast<double>(xs.size() > 1 ? xs.size() - 1 : 1);
    return {m, std::sqrt(v / static_cast<double>(xs.size()))};
}

// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
inline double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const std::size_t n = a.size(), m = b.size();
    if (n == 0 || m == 0) throw std::invalid_argument("ks: empty sample");
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < n && j < m) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        const double fa = static_cast<double>(i) / n;
        const double fb = static_cast<double>(j) / m;
        d = std::max(d, std::abs(fa - fb));
    }
    const double ne = static_cast<double>(n) * m / static_cast<double>(n + m);
    const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    // Kolmogorov tail series
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * lambda * lambda);
        p += term;
        if (std::abs(term) < 1e-12) break;
    }
    return std::clamp(p, 0.0, 1.0);
}

// Regularized lower incomplete gamma P(a,x) by series / continued fraction.
inline double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_p domain");
    if (x == 0.0) return 0.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        return sum * std::exp(-x + a * std::log(x) - gln);
    }
    double b = x + 1.0 - a, c = 1e308, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return 1.0 - std::exp(-x + a * std::log(x) - gln) * h;
}

// P(Chi2_k > x)
inline double chi2_sf(double x, double dof) { return 1.0 - gamma_p(dof / 2.0, x / 2.0); }

// Pearson chi-square p-value for observed counts vs expected probabilities.
inline double chi2_test_pvalue(std::span<const std::size_t> observed,
                               std::span<const double> expected_counts) {
    if (observed.size() != expected_counts.size())
        throw std::invalid_argument("chi2: size mismatch");
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected_counts[i] <= 0.0) throw std::invalid_argument("chi2: nonpositive expected");
        const double diff = static_cast<double>(observed[i]) - expected_counts[i];
        stat += diff * diff / expected_counts[i];
    }
    return chi2_sf(stat, static_cast<double>(observed.size() - 1));
}

// Wilson score interval lower bound for a binomial proportion.
inline double wilson_lower(std::size_t successes, std::size_t trials, double z) {
    if (trials == 0) throw std::invalid_argument("wilson: no trials");
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = p + z2 / (2.0 * n);
    const double rad = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    return (center - rad) / denom;
}

// Hill tail-index estimator from the top k order statistics of |X|.
inline double hill_estimator(std::vector<double> abs_samples, std::size_t k) {
    if (k + 1 > abs_samples.size()) throw std::invalid_argument("hill: k too large");
    std::nth_element(abs_samples.begin(), abs_samples.end() - static_cast<long>(k + 1),
                     abs_samples.end());
    std::vector<double> top(abs_samples.end() - static_cast<long>(k + 1), abs_samples.end());
    std::sort(top.begin(), top.end());
    const double x_k = top.front();
    double s = 0.0;
    for (std::size_t i = 1; i <= k; ++i) s += std::log(top[i] / x_k);
    return static_cast<double>(k) / s;
}

// Least-squares slope of y against x.
inline double fit_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_slope: bad input");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    return num / den;
}

}  // namespace chainsde::stats
