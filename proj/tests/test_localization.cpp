#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "amisec/localization/localize.hpp"
#include "amisec/localization/pso.hpp"
#include "amisec/localization/rss.hpp"
#include "amisec/oracle/oracles.hpp"

#include <algorithm>
#include <cmath>

using namespace amisec;

namespace {

std::vector<Anchor> hexagon_anchors(double cx, double cy, double radius) {
    std::vector<Anchor> out;
    for (int i = 0; i < 6; ++i) {
        double a = i * 3.14159265358979323846 / 3.0;
        out.push_back({cx + radius * std::cos(a), cy + radius * std::sin(a),
                       MeterId{200u + static_cast<uint32_t>(i)}});
    }
    return out;
}

}  // namespace

TEST_CASE("simulate_rss noiseless values") {
    RssConfig cfg;
    cfg.sigma_l = 0.0;
    cfg.c_true = 7.5;
    RngStream rng(1, StreamId::Noise);

    // d = 1: psi equals c exactly
    std::vector<Anchor> a1{{1.0, 0.0, MeterId{100}}};
    auto m1 = simulate_rss(0.0, 0.0, cfg, a1, rng);
    CHECK(m1[0].psi == doctest::Approx(7.5).epsilon(1e-15));

    // gamma = 2.93, d = 10, c = 0 -> -29.3 dB
    cfg.c_true = 0.0;
    cfg.gamma = 2.93;
    std::vector<Anchor> a10{{10.0, 0.0, MeterId{100}}};
    auto m10 = simulate_rss(0.0, 0.0, cfg, a10, rng);
    CHECK(m10[0].psi == doctest::Approx(-29.3).epsilon(1e-12));
}

TEST_CASE("simulate_rss rejects coincident anchors") {
    RssConfig cfg;
    RngStream rng(2, StreamId::Noise);
    std::vector<Anchor> bad{{0.05, 0.0, MeterId{100}}};
    CHECK_THROWS_AS(simulate_rss(0.0, 0.0, cfg, bad, rng), GeometryError);
}

TEST_CASE("simulate_rss noise statistics match sigma") {
    RssConfig cfg;
    cfg.sigma_l = 12.0;
    cfg.c_true = 0.0;
    RngStream rng(3, StreamId::Noise);
    std::vector<Anchor> a{{10.0, 0.0, MeterId{100}}};
    const int n = 100000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
        double v = simulate_rss(0.0, 0.0, cfg, a, rng)[0].psi;
        sum += v;
        sq += v * v;
    }
    double mean = sum / n;
    double sd = std::sqrt(sq / n - mean * mean);
    CHECK(std::abs(sd - 12.0) / 12.0 < 0.01);
}

TEST_CASE("objective is zero at truth under zero noise") {
    RssConfig cfg;
    cfg.sigma_l = 0.0;
    cfg.c_true = 20.0;
    RngStream rng(4, StreamId::Noise);
    auto anchors = hexagon_anchors(50, 50, 40);
    auto meas = simulate_rss(50, 50, cfg, anchors, rng);
    cfg.sigma_l = 1.0;  // evaluation sigma
    CHECK(neg_log_likelihood({50, 50, 20}, meas, anchors, cfg) ==
          doctest::Approx(0.0).epsilon(1e-18));
}

TEST_CASE("single-anchor residual r gives r^2/2 at sigma 1") {
    RssConfig cfg;
    cfg.gamma = 2.0;
    cfg.sigma_l = 1.0;
    std::vector<Anchor> a{{1.0, 0.0, MeterId{100}}};
    // theta at origin, d=1 so the model term vanishes; psi = r gives residual r.
    std::vector<RssMeasurement> meas{{MeterId{100}, 3.0}};
    double v = neg_log_likelihood({0, 0, 0}, meas, a, cfg);
    CHECK(v == doctest::Approx(4.5).epsilon(1e-12));
}

TEST_CASE("objective matches the independent recomputation on random instances") {
    RngStream rng(5, StreamId::Test);
    for (int i = 0; i < 100; ++i) {
        RssConfig cfg;
        cfg.gamma = rng.uniform(1.5, 6.0);
        cfg.sigma_l = rng.uniform(0.5, 15.0);
        cfg.c_true = rng.uniform(-20, 40);
        int n = 3 + static_cast<int>(rng.uniform_int(6));
        std::vector<Anchor> anchors;
        for (int k = 0; k < n; ++k)
            anchors.push_back({rng.uniform(-40, 140), rng.uniform(-40, 140),
                               MeterId{100u + static_cast<uint32_t>(k)}});
        std::vector<RssMeasurement> meas;
        for (int k = 0; k < n; ++k)
            meas.push_back({anchors[k].id, rng.uniform(-80, 40)});
        ThetaEstimate theta{rng.uniform(-50, 150), rng.uniform(-50, 150), rng.uniform(-60, 60)};
        double mine = neg_log_likelihood(theta, meas, anchors, cfg);
        double ref = oracle::reference_nll(theta.x, theta.y, theta.z, meas, anchors,
                                           cfg.gamma, cfg.sigma_l);
        CHECK(mine == doctest::Approx(ref).epsilon(1e-10));
    }
}

TEST_CASE("objective is invariant under anchor relabeling") {
    RssConfig cfg;
    RngStream rng(6, StreamId::Noise);
    auto anchors = hexagon_anchors(50, 50, 40);
    auto meas = simulate_rss(42, 58, cfg, anchors, rng);
    double v1 = neg_log_likelihood({40, 60, 25}, meas, anchors, cfg);
    std::reverse(anchors.begin(), anchors.end());
    std::reverse(meas.begin(), meas.end());
    double v2 = neg_log_likelihood({40, 60, 25}, meas, anchors, cfg);
    CHECK(v1 == doctest::Approx(v2).epsilon(1e-12));
}

TEST_CASE("pso finds the sphere optimum") {
    PsoConfig cfg;
    cfg.swarm_size = 40;
    cfg.max_iters = 200;
    cfg.bounds = {{-5, 5}, {-5, 5}, {-5, 5}};
    RngStream rng(7, StreamId::Pso);
    auto r = pso_minimize(
        [](std::span<const double> x) {
            double s = 0;
            for (double v : x) s += v * v;
            return s;
        },
        cfg, rng);
    for (double v : r.position) CHECK(std::abs(v) < 1e-3);
}

TEST_CASE("pso on a constant objective returns a feasible point") {
    PsoConfig cfg;
    cfg.bounds = {{-2, 2}};
    RngStream rng(8, StreamId::Pso);
    auto r = pso_minimize([](std::span<const double>) { return 3.25; }, cfg, rng);
    CHECK(r.value == 3.25);
    CHECK(r.position[0] >= -2.0);
    CHECK(r.position[0] <= 2.0);
}

TEST_CASE("pso solves rosenbrock to 1e-2") {
    PsoConfig cfg;
    cfg.swarm_size = 40;
    cfg.max_iters = 500;
    cfg.bounds = {{-2, 2}, {-1, 3}};
    RngStream rng(9, StreamId::Pso);
    auto r = pso_minimize(
        [](std::span<const double> x) {
            double a = 1 - x[0];
            double b = x[1] - x[0] * x[0];
            return a * a + 100 * b * b;
        },
        cfg, rng);
    CHECK(r.value < 1e-2);
}

TEST_CASE("pso is deterministic per seed and validates config") {
    PsoConfig cfg;
    cfg.bounds = {{-1, 1}};
    RngStream a(10, StreamId::Pso), b(10, StreamId::Pso);
    auto obj = [](std::span<const double> x) { return x[0] * x[0]; };
    CHECK(pso_minimize(obj, cfg, a).position[0] == pso_minimize(obj, cfg, b).position[0]);

    PsoConfig bad;
    bad.swarm_size = 2;
    bad.bounds = {{-1, 1}};
    RngStream c(1, StreamId::Pso);
    CHECK_THROWS_AS(pso_minimize(obj, bad, c), std::invalid_argument);
}

TEST_CASE("noiseless localization recovers the hexagon center") {
    RssConfig cfg;
    cfg.sigma_l = 0.0;
    cfg.c_true = 30.0;
    auto anchors = hexagon_anchors(50, 50, 50);
    RngStream noise(11, StreamId::Noise);
    auto meas = simulate_rss(50, 50, cfg, anchors, noise);
    RssConfig eval_cfg = cfg;
    eval_cfg.sigma_l = 1.0;
    PsoConfig pso;
    RngStream rng(12, StreamId::Pso);
    ThetaEstimate est = localize(meas, anchors, eval_cfg, pso, rng);
    double err = euclid(est.x, est.y, 50, 50);
    CHECK(err < 1e-2);
    CHECK(std::abs(est.z - 30.0) < 0.1);
}

TEST_CASE("localize requires at least 3 anchors") {
    RssConfig cfg;
    std::vector<Anchor> two{{0, 0, MeterId{100}}, {10, 0, MeterId{101}}};
    std::vector<RssMeasurement> meas{{MeterId{100}, -10}, {MeterId{101}, -12}};
    PsoConfig pso;
    RngStream rng(13, StreamId::Pso);
    CHECK_THROWS_AS(localize(meas, two, cfg, pso, rng), UnderdeterminedError);
}

TEST_CASE("pso beats or matches the 1m grid oracle on noisy instances") {
    RssConfig cfg;
    cfg.sigma_l = 12.0;
    cfg.c_true = 30.0;
    PsoConfig pso;
    int wins = 0;
    const int instances = 20;
    for (int i = 0; i < instances; ++i) {
        RngStream noise(100 + i, StreamId::Noise);
        RngStream prng(200 + i, StreamId::Pso);
        auto anchors = manhattan_anchors(8);
        double ex = 30 + (i % 5) * 10.0;
        double ey = 35 + (i / 5) * 8.0;
        auto meas = simulate_rss(ex, ey, cfg, anchors, noise);
        ThetaEstimate est = localize(meas, anchors, cfg, pso, prng);
        double mine = neg_log_likelihood(est, meas, anchors, cfg);
        auto grid = oracle::grid_search_localize(meas, anchors, cfg.gamma, cfg.sigma_l);
        if (mine <= grid.value + 1e-6) ++wins;
    }
    CHECK(wins >= 18);
}

TEST_CASE("mse curve: noiseless rows are tiny, noise raises error") {
    RssConfig cfg;
    cfg.c_true = 30.0;
    PsoConfig pso;
    pso.swarm_size = 30;
    pso.max_iters = 150;
    RngStream rng(14, StreamId::Test);
    std::vector<int> ns{4, 6};
    std::vector<double> s2{0.0, 144.0};
    auto rows = mse_curve(ns, s2, 5, cfg, pso, rng);
    REQUIRE(rows.size() == 4);
    // sigma^2 = 0 rows come first
    CHECK(rows[0].mean_mse < 1e-3);
    CHECK(rows[1].mean_mse < 1e-3);
    CHECK(rows[2].mean_mse > rows[0].mean_mse);
}

TEST_CASE("pso tolerance enables early stop on a stalled best") {
    PsoConfig cfg;
    cfg.bounds = {{-5, 5}, {-5, 5}};
    cfg.max_iters = 5000;
    cfg.tolerance = 1e-12;
    RngStream rng(15, StreamId::Pso);
    auto r = pso_minimize(
        [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1]; }, cfg, rng);
    CHECK(r.iterations < 5000);
    CHECK(r.value < 1e-6);
}
