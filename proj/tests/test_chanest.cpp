#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "otsm/chanest.hpp"

using namespace otsm;

namespace {

FrameParams make_params(int n, int m, int lmax) {
    FrameParams p;
    p.n_blocks = n;
    p.m_slots = m;
    p.l_max = lmax;
    p.l_zp = 2 * lmax + 1;
    return p;
}

PathSet single_path(cx gain, double delay, double doppler) {
    PathSet ps;
    ps.paths.push_back({gain, delay, doppler});
    return ps;
}

struct PilotScenario {
    FrameParams p;
    PilotConfig pc;
    QamConstellation c{4};
    DelayTimeTaps taps;
    ReceivedFrame rx;

    PilotScenario(const FrameParams& params, const PathSet& paths, double beta, double noise_var,
                  unsigned seed, Modem modem = Modem::otsm)
        : p(params), pc(pilot_power(params, beta)), taps(paths, params, DiscretizeMode::round_delay) {
        std::mt19937 rng(seed);
        std::uniform_int_distribution<int> bit(0, 1);
        std::vector<uint8_t> bits(p.data_symbol_count() * 2);
        for (auto& b : bits) b = static_cast<uint8_t>(bit(rng));
        auto grid = build_grid(p, c.map(bits), pc.amplitude());
        TimeFrame tf = modem == Modem::otsm ? otsm_modulate(p, grid) : otfs_modulate(p, grid);
        rx = apply_channel(taps, tf, noise_var, seed + 1);
    }
};

}  // namespace

TEST_CASE("pilot power arithmetic reproduces the headline ratios") {
    FrameParams p = make_params(64, 64, 3);
    p.l_zp = 7;
    auto base = pilot_power(p, 1.0);
    CHECK(base.ppr0 == doctest::Approx(7.0 / 64.0));
    CHECK(base.ppr == doctest::Approx(7.0 / 64.0));  // baseline equals eta_0
    CHECK(base.ppr == doctest::Approx(0.109).epsilon(0.01));

    auto boosted = pilot_power(p, db_to_linear(3.0));
    CHECK(boosted.ppr == doctest::Approx(0.197).epsilon(0.01));

    // eta(beta) = beta*eta0 / (1 + (beta-1)*eta0)
    for (double beta : {0.5, 1.0, 2.0, 4.0}) {
        auto c = pilot_power(p, beta);
        double eta0 = c.ppr0;
        CHECK(c.ppr == doctest::Approx(beta * eta0 / (1.0 + (beta - 1.0) * eta0)).epsilon(1e-12));
    }

    FrameParams p8 = make_params(8, 16, 3);
    p8.l_zp = 7;
    CHECK(pilot_power(p8, 1.0).ep == doctest::Approx(56.0));  // N*l_zp*Es

    CHECK_THROWS_AS(pilot_power(p, 0.0), std::invalid_argument);
}

TEST_CASE("noiseless estimates are exact at the knots") {
    FrameParams p = make_params(8, 16, 2);

    PilotScenario ident(p, single_path(cx(1, 0), 0.0, 0.0), 1.0, 0.0, 3);
    auto est = estimate_taps(p, ident.rx, ident.pc, Modem::otsm);
    for (int k = 0; k <= p.n_blocks; ++k) {
        CHECK(std::abs(est.knots(0, k) - cx(1, 0)) < 1e-12);
        for (int l = 1; l <= p.l_max; ++l) CHECK(std::abs(est.knots(l, k)) < 1e-12);
    }

    // single path, integer doppler, delay 1: knots equal the true taps
    PathSet ps = single_path(cx(0.7, -0.2), 1.0, 2.0);
    PilotScenario sc(p, ps, 1.0, 0.0, 4);
    auto est2 = estimate_taps(p, sc.rx, sc.pc, Modem::otsm);
    for (int l = 0; l <= p.l_max; ++l)
        for (int k = 0; k <= p.n_blocks; ++k) {
            cx truth = sc.taps.value(l, est2.knot_position(l, k));
            CHECK(std::abs(est2.knots(l, k) - truth) < 1e-10);
        }

    // the otfs pilot spreads the same way
    PilotScenario sc_otfs(p, ps, 1.0, 0.0, 5, Modem::otfs);
    auto est3 = estimate_taps(p, sc_otfs.rx, sc_otfs.pc, Modem::otfs);
    for (int l = 0; l <= p.l_max; ++l)
        for (int k = 0; k <= p.n_blocks; ++k) {
            cx truth = sc_otfs.taps.value(l, est3.knot_position(l, k));
            CHECK(std::abs(est3.knots(l, k) - truth) < 1e-10);
        }

    ReceivedFrame no_cp;
    no_cp.body = ident.rx.body;
    CHECK_THROWS_AS(estimate_taps(p, no_cp, ident.pc, Modem::otsm), std::invalid_argument);
    CHECK_THROWS_AS(estimate_taps(p, ident.rx, ident.pc, Modem::sc), std::invalid_argument);
}

TEST_CASE("noise-only knots have the predicted variance") {
    FrameParams p = make_params(8, 16, 1);
    auto pc = pilot_power(p, 1.0);
    const double sigma2 = 0.4;
    std::mt19937 rng(9);
    std::normal_distribution<double> g(0.0, std::sqrt(sigma2 / 2.0));

    double acc = 0.0;
    long count = 0;
    for (int draw = 0; draw < 10000 / 4; ++draw) {
        ReceivedFrame rx;
        rx.body.resize(p.frame_len());
        rx.cp.resize(p.cp_len());
        for (long i = 0; i < rx.body.size(); ++i) rx.body(i) = cx(g(rng), g(rng));
        for (long i = 0; i < rx.cp.size(); ++i) rx.cp(i) = cx(g(rng), g(rng));
        auto est = estimate_taps(p, rx, pc, Modem::otsm);
        acc += est.knots.cwiseAbs2().sum();
        count += est.knots.size();
    }
    const double predicted = sigma2 * p.n_blocks / pc.ep;  // |pilot time sample|^2 = Ep/N
    CHECK(acc / count == doctest::Approx(predicted).epsilon(0.05));
}

TEST_CASE("interpolation reproduces knots and constant channels exactly") {
    FrameParams p = make_params(8, 16, 2);
    PilotScenario sc(p, single_path(cx(0.3, 0.9), 1.0, 0.0), 1.0, 0.0, 11);
    auto est = estimate_taps(p, sc.rx, sc.pc, Modem::otsm);

    for (auto mode : {InterpMode::linear, InterpMode::spline}) {
        auto e = est;
        interpolate(e, p, mode);
        Eigen::MatrixXcd truth = sc.taps.materialize(0, p.frame_len());
        CHECK((e.full - truth).cwiseAbs().maxCoeff() < 1e-10);
        for (int l = 0; l <= p.l_max; ++l)
            for (int k = 1; k <= p.n_blocks; ++k) {
                long q = e.knot_position(l, k);
                if (q < 0 || q >= p.frame_len()) continue;
                CHECK(std::abs(e.full(l, q) - e.knots(l, k)) < 1e-12);
            }
    }
}

TEST_CASE("linear midpoint equals the knot average") {
    FrameParams p = make_params(8, 16, 1);
    PilotScenario sc(p, single_path(cx(1, 0), 0.0, 1.3), 1.0, 0.0, 13);
    auto est = estimate_taps(p, sc.rx, sc.pc, Modem::otsm);
    interpolate(est, p, InterpMode::linear);
    const int l = 0;
    for (int k = 1; k < p.n_blocks - 1; ++k) {
        long q0 = est.knot_position(l, k);
        long mid = q0 + p.m_slots / 2;
        cx avg = 0.5 * (est.knots(l, k) + est.knots(l, k + 1));
        CHECK(std::abs(est.full(l, mid) - avg) < 1e-12);
    }
}

TEST_CASE("spline beats linear when the tap oscillates fast") {
    FrameParams p = make_params(16, 32, 1);
    // ~0.12 Doppler cycles per knot interval, the 500 km/h regime
    PathSet ps = single_path(cx(1, 0), 0.0, 0.12 * p.n_blocks);
    double lin_nmse = 0.0, spl_nmse = 0.0;
    for (unsigned seed = 0; seed < 10; ++seed) {
        PilotScenario sc(p, ps, db_to_linear(3.0), 0.0, 100 + seed);
        auto est = estimate_taps(p, sc.rx, sc.pc, Modem::otsm);
        Eigen::MatrixXcd truth = sc.taps.materialize(0, p.frame_len());
        auto lin = est;
        interpolate(lin, p, InterpMode::linear);
        auto spl = est;
        interpolate(spl, p, InterpMode::spline);
        lin_nmse += tap_nmse(lin.full, truth);
        spl_nmse += tap_nmse(spl.full, truth);
    }
    CHECK(spl_nmse < lin_nmse);
}

TEST_CASE("interpolate rejects single-knot estimates") {
    FrameParams p = make_params(8, 16, 1);
    TapEstimate est;
    est.l_max = 1;
    est.m_p = p.pilot_delay();
    est.m_slots = p.m_slots;
    est.knots.resize(2, 1);
    CHECK_THROWS_AS(interpolate(est, p, InterpMode::linear), std::invalid_argument);
}
