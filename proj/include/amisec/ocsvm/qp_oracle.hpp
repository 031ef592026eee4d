#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "amisec/ocsvm/kernel.hpp"

namespace amisec {

// Euclidean projection onto { 0 <= a_i <= cap, sum a_i = 1 } by bisection on
// the shift of the clipped simplex map.
inline std::vector<double> project_box_simplex(std::vector<double> v, double cap) {
    if (v.empty()) throw std::invalid_argument("project_box_simplex: empty vector");
    if (cap * static_cast<double>(v.size()) < 1.0)
        throw std::invalid_argument("project_box_simplex: infeasible cap");
    double lo = *std::min_element(v.begin(), v.end()) - cap - 1.0;
    double hi = *std::max_element(v.begin(), v.end());
    auto mass = [&](double tau) {
        double s = 0.0;
        for (double x : v) s += std::clamp(x - tau, 0.0, cap);
        return s;
    };
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mass(mid) > 1.0) lo = mid;
        else hi = mid;
    }
    double tau = 0.5 * (lo + hi);
    for (double& x : v) x = std::clamp(x - tau, 0.0, cap);
    return v;
}

struct QpSolution {
    std::vector<double> alphas;
    double objective = 0.0;
    long iterations = 0;
};

// Ground-truth solver for small instances: projected gradient descent with a
// Gershgorin step bound, run to a fixed point (up to 10^6 iterations). Shares
// no code with the coordinate solver it certifies.
inline QpSolution qp_oracle(const std::vector<std::vector<double>>& data, double nu,
                            const Kernel& kernel) {
    const size_t n = data.size();
    if (n < 2 || n > 12) throw std::invalid_argument("qp_oracle: n must be in [2, 12]");
    if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("qp_oracle: nu in (0, 1]");
    const double cap = 1.0 / (nu * static_cast<double>(n));

    std::vector<double> q(n * n);
    double max_row_sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (size_t j = 0; j < n; ++j) {
            q[i * n + j] = kernel_eval(kernel, data[i], data[j]);
            row += std::abs(q[i * n + j]);
        }
        max_row_sum = std::max(max_row_sum, row);
    }
    const double step = 1.0 / std::max(max_row_sum, 1e-12);

    std::vector<double> a(n, 1.0 / static_cast<double>(n));
    a = project_box_simplex(a, cap);
    std::vector<double> next(n), g(n);
    long it = 0;
    const long max_iters = 1000000;
    for (; it < max_iters; ++it) {
        for (size_t i = 0; i < n; ++i) {
            double gi = 0.0;
            for (size_t j = 0; j < n; ++j) gi += q[i * n + j] * a[j];
            g[i] = gi;
        }
        for (size_t i = 0; i < n; ++i) next[i] = a[i] - step * g[i];
        next = project_box_simplex(std::move(next), cap);
        double delta = 0.0;
        for (size_t i = 0; i < n; ++i) delta = std::max(delta, std::abs(next[i] - a[i]));
        a.swap(next);
        if (delta < 1e-15) break;
    }

    double obj = 0.0;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) obj += a[i] * a[j] * q[i * n + j];
    return {a, 0.5 * obj, it};
}

}  // namespace amisec
