#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "amisec/core/rng.hpp"

namespace amisec {

struct PsoBounds {
    double lo = 0.0;
    double hi = 0.0;
};

struct PsoConfig {
    int swarm_size = 40;
    int max_iters = 300;
    double inertia = 0.72;
    double cognitive = 1.49;
    double social = 1.49;
    std::vector<PsoBounds> bounds;
    double tolerance = 0.0;  // > 0 enables early stop on stalled global best

    void validate() const {
        if (swarm_size < 5) throw std::invalid_argument("PsoConfig: swarm_size >= 5");
        if (inertia <= 0.0 || inertia >= 1.0)
            throw std::invalid_argument("PsoConfig: inertia in (0, 1)");
        if (bounds.empty()) throw std::invalid_argument("PsoConfig: bounds required");
        for (const auto& b : bounds)
            if (!(b.lo < b.hi)) throw std::invalid_argument("PsoConfig: lo < hi per dimension");
    }
};

struct PsoResult {
    std::vector<double> position;
    double value = 0.0;
    int iterations = 0;
};

using Objective = std::function<double(std::span<const double>)>;

// Global-best particle swarm: v <- w v + c1 r1 (pbest - x) + c2 r2 (gbest - x),
// positions clamped to bounds. Returns the best point ever evaluated;
// deterministic for a fixed stream.
inline PsoResult pso_minimize(const Objective& objective, const PsoConfig& cfg,
                              RngStream& rng) {
    cfg.validate();
    const size_t dim = cfg.bounds.size();
    const int n = cfg.swarm_size;

    std::vector<std::vector<double>> x(n, std::vector<double>(dim));
    std::vector<std::vector<double>> v(n, std::vector<double>(dim));
    std::vector<std::vector<double>> pbest(n, std::vector<double>(dim));
    std::vector<double> pbest_val(n);
    std::vector<double> gbest(dim);
    double gbest_val = std::numeric_limits<double>::infinity();

    for (int i = 0; i < n; ++i) {
        for (size_t d = 0; d < dim; ++d) {
            const auto& b = cfg.bounds[d];
            x[i][d] = rng.uniform(b.lo, b.hi);
            double range = b.hi - b.lo;
            v[i][d] = rng.uniform(-range / 2.0, range / 2.0);
        }
        pbest[i] = x[i];
        pbest_val[i] = objective(x[i]);
        if (pbest_val[i] < gbest_val) {
            gbest_val = pbest_val[i];
            gbest = x[i];
        }
    }

    int stall = 0;
    int iter = 0;
    for (; iter < cfg.max_iters; ++iter) {
        double before = gbest_val;
        for (int i = 0; i < n; ++i) {
            for (size_t d = 0; d < dim; ++d) {
                const auto& b = cfg.bounds[d];
                double r1 = rng.uniform();
                double r2 = rng.uniform();
                v[i][d] = cfg.inertia * v[i][d] + cfg.cognitive * r1 * (pbest[i][d] - x[i][d]) +
                          cfg.social * r2 * (gbest[d] - x[i][d]);
                double vmax = (b.hi - b.lo) / 2.0;
                if (v[i][d] > vmax) v[i][d] = vmax;
                if (v[i][d] < -vmax) v[i][d] = -vmax;
                x[i][d] += v[i][d];
                if (x[i][d] < b.lo) x[i][d] = b.lo;
                if (x[i][d] > b.hi) x[i][d] = b.hi;
            }
            double val = objective(x[i]);
            if (val < pbest_val[i]) {
                pbest_val[i] = val;
                pbest[i] = x[i];
                if (val < gbest_val) {
                    gbest_val = val;
                    gbest = x[i];
                }
            }
        }
        if (cfg.tolerance > 0.0) {
            if (before - gbest_val < cfg.tolerance) {
                if (++stall >= 60) break;
            } else {
                stall = 0;
            }
        }
    }
    return {gbest, gbest_val, iter};
}

// Deterministic compass search used to sharpen a candidate; step halves until
// it drops below step_min.
inline PsoResult compass_refine(const Objective& objective, std::vector<double> point,
                                std::span<const PsoBounds> bounds, double step0 = 2.0,
                                double step_min = 1e-7) {
    double value = objective(point);
    double step = step0;
    int iters = 0;
    while (step > step_min) {
        bool improved = false;
        for (size_t d = 0; d < point.size(); ++d) {
            for (double dir : {+1.0, -1.0}) {
                std::vector<double> cand = point;
                cand[d] += dir * step;
                if (cand[d] < bounds[d].lo) cand[d] = bounds[d].lo;
                if (cand[d] > bounds[d].hi) cand[d] = bounds[d].hi;
                double cv = objective(cand);
                ++iters;
                if (cv < value) {
                    value = cv;
                    point = std::move(cand);
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return {point, value, iters};
}

}  // namespace amisec
