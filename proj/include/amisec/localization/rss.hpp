#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "amisec/core/rng.hpp"
#include "amisec/core/wire.hpp"

namespace amisec {

struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Log-distance path-loss model. gamma ~ 2.93 suits a residential area;
// lossy environments run 4-6.
struct RssConfig {
    double gamma = 2.93;    // path loss exponent
    double sigma_l = 12.0;  // noise std dev per anchor, dB
    double c_true = 30.0;   // transmit-power constant, dB, used when simulating
};

struct Anchor {
    double x = 0.0;
    double y = 0.0;
    MeterId id;
};

struct RssMeasurement {
    MeterId anchor;
    double psi = 0.0;  // received power, dB
};

// Estimated (x, y) plus the reference power z standing in for the unknown c.
struct ThetaEstimate {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

// Log singularity guard: distances are clamped to this floor inside the
// objective, and simulation refuses emitters this close to an anchor.
inline constexpr double kMinDistance = 0.1;

inline double euclid(double x1, double y1, double x2, double y2) {
    return std::sqrt((x1 - x2) * (x1 - x2) + (y1 - y2) * (y1 - y2));
}

// psi_l = c - 10 gamma log10(d_l) + w_l,  w_l ~ N(0, sigma_l^2)
inline std::vector<RssMeasurement> simulate_rss(double x, double y, const RssConfig& cfg,
                                                std::span<const Anchor> anchors,
                                                RngStream& rng) {
    std::vector<RssMeasurement> out;
    out.reserve(anchors.size());
    for (const Anchor& a : anchors) {
        double d = euclid(x, y, a.x, a.y);
        if (d <= kMinDistance)
            throw GeometryError("simulate_rss: anchor coincident with emitter");
        double noise = cfg.sigma_l > 0 ? rng.gauss(0.0, cfg.sigma_l) : 0.0;
        out.push_back({a.id, cfg.c_true - 10.0 * cfg.gamma * std::log10(d) + noise});
    }
    return out;
}

// sum_l {psi_l - z + 10 gamma log10(d_l(theta))}^2 / (2 sigma_l^2)
inline double neg_log_likelihood(const ThetaEstimate& theta,
                                 std::span<const RssMeasurement> meas,
                                 std::span<const Anchor> anchors, const RssConfig& cfg) {
    if (meas.size() != anchors.size())
        throw std::invalid_argument("neg_log_likelihood: measurement/anchor count mismatch");
    const double denom = 2.0 * cfg.sigma_l * cfg.sigma_l;
    double total = 0.0;
    for (size_t l = 0; l < meas.size(); ++l) {
        if (meas[l].anchor != anchors[l].id)
            throw std::invalid_argument("neg_log_likelihood: anchor ids misaligned");
        double d = euclid(theta.x, theta.y, anchors[l].x, anchors[l].y);
        if (d < kMinDistance) d = kMinDistance;
        double r = meas[l].psi - theta.z + 10.0 * cfg.gamma * std::log10(d);
        total += cfg.sigma_l > 0 ? r * r / denom : r * r / 2.0;
    }
    return total;
}

// Closed-form optimum of z for a fixed (x, y): with homoscedastic noise the
// objective is quadratic in z, minimized at the mean adjusted residual.
inline double best_z_for_xy(double x, double y, std::span<const RssMeasurement> meas,
                            std::span<const Anchor> anchors, const RssConfig& cfg) {
    double acc = 0.0;
    for (size_t l = 0; l < meas.size(); ++l) {
        double d = euclid(x, y, anchors[l].x, anchors[l].y);
        if (d < kMinDistance) d = kMinDistance;
        acc += meas[l].psi + 10.0 * cfg.gamma * std::log10(d);
    }
    return acc / static_cast<double>(meas.size());
}

}  // namespace amisec
