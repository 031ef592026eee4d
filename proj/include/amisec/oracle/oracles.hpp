#pragma once

// Independent reference implementations used to cross-check the production
// code paths. Everything here is deliberately brute force and shares no code
// with the implementation it verifies.

#include <cmath>
#include <span>
#include <vector>

#include "amisec/localization/rss.hpp"

namespace amisec::oracle {

// Straight re-derivation of the RSS objective, written separately from
// neg_log_likelihood on purpose.
inline double reference_nll(double x, double y, double z,
                            std::span<const RssMeasurement> meas,
                            std::span<const Anchor> anchors, double gamma, double sigma) {
    double total = 0.0;
    for (size_t l = 0; l < meas.size(); ++l) {
        double dx = x - anchors[l].x;
        double dy = y - anchors[l].y;
        double d = std::sqrt(dx * dx + dy * dy);
        if (d < 0.1) d = 0.1;
        double residual = meas[l].psi - z + 10.0 * gamma * (std::log(d) / std::log(10.0));
        total += residual * residual / (2.0 * sigma * sigma);
    }
    return total;
}

struct GridBest {
    double x = 0.0, y = 0.0, z = 0.0;
    double value = 0.0;
};

// Exhaustive 1 m grid over (x, y) with the per-point optimal z computed in
// closed form (the objective is quadratic in z).
inline GridBest grid_search_localize(std::span<const RssMeasurement> meas,
                                     std::span<const Anchor> anchors, double gamma,
                                     double sigma, double lo = -50.0, double hi = 150.0,
                                     double step = 1.0) {
    GridBest best;
    best.value = std::numeric_limits<double>::infinity();
    for (double x = lo; x <= hi; x += step) {
        for (double y = lo; y <= hi; y += step) {
            double zsum = 0.0;
            for (size_t l = 0; l < meas.size(); ++l) {
                double dx = x - anchors[l].x;
                double dy = y - anchors[l].y;
                double d = std::sqrt(dx * dx + dy * dy);
                if (d < 0.1) d = 0.1;
                zsum += meas[l].psi + 10.0 * gamma * (std::log(d) / std::log(10.0));
            }
            double z = zsum / static_cast<double>(meas.size());
            double v = reference_nll(x, y, z, meas, anchors, gamma, sigma);
            if (v < best.value) best = {x, y, z, v};
        }
    }
    return best;
}

}  // namespace amisec::oracle
