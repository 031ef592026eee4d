#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace amisec {

namespace detail {

// Regularized lower incomplete gamma P(a, x); series for x < a+1, continued
// fraction otherwise.
inline double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::domain_error("gamma_p: bad arguments");
    if (x == 0.0) return 0.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        return sum * std::exp(-x + a * std::log(x) - gln);
    }
    // Lentz continued fraction for Q(a, x)
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    double q = std::exp(-x + a * std::log(x) - gln) * h;
    return 1.0 - q;
}

}  // namespace detail

inline double chi2_cdf(double x, int df) {
    return detail::gamma_p(df / 2.0, x / 2.0);
}

// Inverse chi-square CDF by bisection; p = 1 maps to +infinity.
inline double chi2_quantile(double p, int df) {
    if (p < 0.0 || p > 1.0) throw std::domain_error("chi2_quantile: p in [0, 1]");
    if (df < 1) throw std::domain_error("chi2_quantile: df >= 1");
    if (p >= 1.0) return std::numeric_limits<double>::infinity();
    if (p <= 0.0) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (chi2_cdf(hi, df) < p) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (chi2_cdf(mid, df) < p) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

namespace detail {

struct MeanCov {
    std::vector<double> mean;
    std::vector<double> cov;  // row-major dim x dim
};

inline MeanCov fit_mean_cov(const std::vector<std::vector<double>>& data,
                            const std::vector<size_t>& idx) {
    const size_t dim = data[0].size();
    MeanCov mc;
    mc.mean.assign(dim, 0.0);
    mc.cov.assign(dim * dim, 0.0);
    for (size_t i : idx)
        for (size_t d = 0; d < dim; ++d) mc.mean[d] += data[i][d];
    for (double& m : mc.mean) m /= static_cast<double>(idx.size());
    for (size_t i : idx) {
        for (size_t r = 0; r < dim; ++r) {
            for (size_t c = 0; c < dim; ++c) {
                mc.cov[r * dim + c] +=
                    (data[i][r] - mc.mean[r]) * (data[i][c] - mc.mean[c]);
            }
        }
    }
    const double denom = static_cast<double>(idx.size() - 1);
    for (double& v : mc.cov) v /= denom;
    return mc;
}

// Cholesky factorization with a ridge retry on failure.
inline std::vector<double> cholesky_ridged(std::vector<double> a, size_t dim) {
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::vector<double> l(a);
        bool ok = true;
        for (size_t i = 0; i < dim && ok; ++i) {
            for (size_t j = 0; j <= i && ok; ++j) {
                double s = l[i * dim + j];
                for (size_t k = 0; k < j; ++k) s -= l[i * dim + k] * l[j * dim + k];
                if (i == j) {
                    if (s <= 0.0) {
                        ok = false;
                        break;
                    }
                    l[i * dim + i] = std::sqrt(s);
                } else {
                    l[i * dim + j] = s / l[j * dim + j];
                }
            }
        }
        if (ok) {
            for (size_t i = 0; i < dim; ++i)
                for (size_t j = i + 1; j < dim; ++j) l[i * dim + j] = 0.0;
            return l;
        }
        for (size_t d = 0; d < dim; ++d) a[d * dim + d] += 1e-6;  // ridge
    }
    throw std::runtime_error("cholesky_ridged: matrix not positive definite");
}

// Squared Mahalanobis distance via two triangular solves.
inline double mahalanobis2(const std::vector<double>& l, size_t dim,
                           const std::vector<double>& mean, const std::vector<double>& x) {
    std::vector<double> y(dim);
    for (size_t i = 0; i < dim; ++i) {
        double s = x[i] - mean[i];
        for (size_t k = 0; k < i; ++k) s -= l[i * dim + k] * y[k];
        y[i] = s / l[i * dim + i];
    }
    double d2 = 0.0;
    for (double v : y) d2 += v * v;
    return d2;
}

}  // namespace detail

// Simplified trimmed covariance outlier labeling: fit, drop the
// contamination-fraction largest Mahalanobis distances, refit once, then
// label everything past the (1 - contamination) chi-square quantile as -1.
inline std::vector<int> robust_cov_outliers(const std::vector<std::vector<double>>& data,
                                            double contamination) {
    const size_t n = data.size();
    if (n == 0) throw std::invalid_argument("robust_cov_outliers: empty data");
    const size_t dim = data[0].size();
    if (n <= dim + 1)
        throw std::invalid_argument("robust_cov_outliers: need n > dim + 1");
    if (contamination < 0.0 || contamination >= 0.5)
        throw std::invalid_argument("robust_cov_outliers: contamination in [0, 0.5)");

    std::vector<size_t> all(n);
    std::iota(all.begin(), all.end(), size_t{0});
    detail::MeanCov mc = detail::fit_mean_cov(data, all);
    std::vector<double> l = detail::cholesky_ridged(mc.cov, dim);

    const size_t drop = static_cast<size_t>(std::llround(contamination * static_cast<double>(n)));
    if (drop > 0 && n - drop > dim + 1) {
        std::vector<std::pair<double, size_t>> scored(n);
        for (size_t i = 0; i < n; ++i)
            scored[i] = {detail::mahalanobis2(l, dim, mc.mean, data[i]), i};
        std::sort(scored.begin(), scored.end());
        std::vector<size_t> kept;
        kept.reserve(n - drop);
        for (size_t i = 0; i < n - drop; ++i) kept.push_back(scored[i].second);
        mc = detail::fit_mean_cov(data, kept);
        l = detail::cholesky_ridged(mc.cov, dim);
    }

    const double threshold = chi2_quantile(1.0 - contamination, static_cast<int>(dim));
    std::vector<int> labels(n);
    for (size_t i = 0; i < n; ++i) {
        double d2 = detail::mahalanobis2(l, dim, mc.mean, data[i]);
        labels[i] = d2 > threshold ? -1 : +1;
    }
    return labels;
}

}  // namespace amisec
