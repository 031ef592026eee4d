#pragma once

#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "amisec/localization/pso.hpp"
#include "amisec/localization/rss.hpp"

namespace amisec {

struct UnderdeterminedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::vector<PsoBounds> default_localize_bounds() {
    return {{-50.0, 150.0}, {-50.0, 150.0}, {-60.0, 60.0}};
}

// ML position estimate: minimize the negative log-likelihood over (x, y, z)
// with PSO, then sharpen the winner with a deterministic compass pass.
inline ThetaEstimate localize(std::span<const RssMeasurement> meas,
                              std::span<const Anchor> anchors, const RssConfig& cfg,
                              const PsoConfig& pso, RngStream& rng) {
    if (anchors.size() < 3)
        throw UnderdeterminedError("localize: need >= 3 anchors with c unknown");
    PsoConfig p = pso;
    if (p.bounds.empty()) p.bounds = default_localize_bounds();
    if (p.bounds.size() != 3)
        throw std::invalid_argument("localize: bounds must cover (x, y, z)");

    Objective obj = [&](std::span<const double> t) {
        return neg_log_likelihood({t[0], t[1], t[2]}, meas, anchors, cfg);
    };

    // Joint (x, y, z) likelihoods develop a spurious far-field valley (exact
    // for cocyclic anchors, approximate otherwise) that can trap a single
    // swarm. A deterministic coarse lattice scan with z profiled out supplies
    // an independent candidate anchored to the true basin.
    std::vector<double> lattice_best(3, 0.0);
    double lattice_val = std::numeric_limits<double>::infinity();
    for (double x = p.bounds[0].lo; x <= p.bounds[0].hi; x += 10.0) {
        for (double y = p.bounds[1].lo; y <= p.bounds[1].hi; y += 10.0) {
            double z = best_z_for_xy(x, y, meas, anchors, cfg);
            if (z < p.bounds[2].lo) z = p.bounds[2].lo;
            if (z > p.bounds[2].hi) z = p.bounds[2].hi;
            double v = neg_log_likelihood({x, y, z}, meas, anchors, cfg);
            if (v < lattice_val) {
                lattice_val = v;
                lattice_best = {x, y, z};
            }
        }
    }
    PsoResult from_lattice = compass_refine(obj, lattice_best, p.bounds);

    RngStream swarm_rng = rng.derive(1);
    PsoResult swarm = pso_minimize(obj, p, swarm_rng);
    PsoResult from_swarm = compass_refine(obj, swarm.position, p.bounds);

    const PsoResult& win = from_swarm.value <= from_lattice.value ? from_swarm : from_lattice;
    return {win.position[0], win.position[1], win.position[2]};
}

struct MseRow {
    int n_anchors = 0;
    double sigma2 = 0.0;
    int trials = 0;
    double mean_mse = 0.0;
    double stderr_mse = 0.0;
};

// Manhattan-grid anchor layout: block corners and mid-edges interleaved so
// that every prefix of four or more anchors surrounds the emitter and is
// never cocyclic (cocyclic anchors leave the joint (x, y, z) estimate with a
// mirror solution under inversion).
inline std::vector<Anchor> manhattan_anchors(int n) {
    static const std::vector<std::pair<double, double>> layout = {
        {0, 0},    {100, 0},  {100, 100}, {0, 50},    // 3 corners + a mid-edge
        {0, 100},  {50, 0},   {100, 50},  {50, 100},  // remaining corner + mid-edges
        {150, 50}, {50, 150}, {150, 0},   {0, 150},   // next street intersections
    };
    if (n < 3 || n > static_cast<int>(layout.size()))
        throw std::invalid_argument("manhattan_anchors: n out of range");
    std::vector<Anchor> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i)
        out.push_back({layout[i].first, layout[i].second, MeterId{100u + static_cast<uint32_t>(i)}});
    return out;
}

// Monte-Carlo mean squared position error over a grid of anchor counts and
// noise variances. Noise draws are shared across anchor counts within a
// trial (common random numbers), which pairs the comparisons. The search is
// confined to the anchor bounding box: the emitter sits inside the area of
// interest by construction, and an unconstrained search lets heavy noise
// throw estimates into the spurious far-field valley.
inline std::vector<MseRow> mse_curve(std::span<const int> n_list,
                                     std::span<const double> sigma2_list, int trials,
                                     const RssConfig& base_cfg, const PsoConfig& pso_base,
                                     RngStream& rng) {
    if (trials < 1) throw std::invalid_argument("mse_curve: trials >= 1");
    int max_n = 0;
    for (int n : n_list) max_n = std::max(max_n, n);
    std::vector<Anchor> all_anchors = manhattan_anchors(max_n);

    std::vector<MseRow> rows;
    for (size_t si = 0; si < sigma2_list.size(); ++si) {
        const double s2 = sigma2_list[si];
        RssConfig cfg = base_cfg;
        cfg.sigma_l = std::sqrt(s2);
        for (int n : n_list) {
            PsoConfig pso = pso_base;
            if (pso.bounds.empty()) {
                // the emitter lives inside the city block; anchors beyond the
                // block add information without widening the search
                pso.bounds = {{-10.0, 110.0}, {-10.0, 110.0}, {-60.0, 60.0}};
            }
            double sum = 0.0, sumsq = 0.0;
            for (int t = 0; t < trials; ++t) {
                // Trial streams keyed by (sigma index, trial) only, never by
                // anchor count: the n sweep sees identical emitters and
                // identical noise on shared anchors.
                RngStream trial =
                    rng.derive((static_cast<uint64_t>(si) << 32) ^ static_cast<uint64_t>(t));
                RngStream pos_rng = trial.derive(1);
                RngStream noise_rng = trial.derive(2);
                RngStream pso_rng = trial.derive(static_cast<uint64_t>(3 + n));
                double ex = pos_rng.uniform(30.0, 70.0);
                double ey = pos_rng.uniform(30.0, 70.0);
                std::vector<RssMeasurement> meas =
                    simulate_rss(ex, ey, cfg, std::span(all_anchors.data(), n), noise_rng);
                ThetaEstimate est =
                    localize(meas, std::span(all_anchors.data(), n), cfg, pso, pso_rng);
                double err2 = (est.x - ex) * (est.x - ex) + (est.y - ey) * (est.y - ey);
                sum += err2;
                sumsq += err2 * err2;
            }
            double mean = sum / trials;
            double var = trials > 1 ? (sumsq - trials * mean * mean) / (trials - 1) : 0.0;
            if (var < 0) var = 0;
            rows.push_back({n, s2, trials, mean, std::sqrt(var / trials)});
        }
    }
    return rows;
}

inline std::string mse_csv_header() {
    return "n_anchors,sigma2_db,trials,mean_mse_m2,stderr";
}

}  // namespace amisec
