#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "otsm/detector.hpp"

using namespace otsm;

namespace {

FrameParams make_params(int n, int m, int lmax, int qam = 4) {
    FrameParams p;
    p.n_blocks = n;
    p.m_slots = m;
    p.l_max = lmax;
    p.l_zp = 2 * lmax + 1;
    p.qam_order = qam;
    return p;
}

PathSet identity_path() {
    PathSet ps;
    ps.paths.push_back({cx(1, 0), 0.0, 0.0});
    return ps;
}

PathSet spread_paths(const FrameParams& p, unsigned seed) {
    // one Rayleigh path per integer delay tap, fractional Doppler
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PathSet ps;
    for (int l = 0; l <= p.l_max; ++l) {
        Path path;
        path.gain = cx(g(rng), g(rng)) / std::sqrt(2.0 * (p.l_max + 1));
        path.delay = l;
        path.doppler = u(rng) * 1.2;
        ps.paths.push_back(path);
    }
    return ps;
}

struct Scenario {
    FrameParams p;
    QamConstellation c;
    Eigen::MatrixXcd grid;
    std::vector<uint8_t> bits;
    DelayTimeTaps taps;
    ReceivedFrame rx;
    BlockChannel blocks;
    MatchedBlocks mb;
    double sigma2;

    Scenario(const FrameParams& params, const PathSet& paths, double noise_var, unsigned seed,
             double pilot_amp = 0.0)
        : p(params),
          c(params.qam_order),
          taps(paths, params, DiscretizeMode::round_delay),
          sigma2(noise_var) {
        std::mt19937 rng(seed);
        std::uniform_int_distribution<int> bit(0, 1);
        bits.resize(p.data_symbol_count() * c.bits_per_symbol());
        for (auto& b : bits) b = static_cast<uint8_t>(bit(rng));
        grid = build_grid(p, c.map(bits), pilot_amp);
        rx = apply_channel(taps, otsm_modulate(p, grid), noise_var, seed + 1);
        blocks = build_block_channel(taps, p);
        mb = matched_filter(blocks, rx);
    }
};

}  // namespace

TEST_CASE("matched filter on the identity channel") {
    FrameParams p = make_params(4, 8, 2);
    Scenario s(p, identity_path(), 0.0, 5);
    for (int n = 0; n < p.n_blocks; ++n) {
        CHECK((s.mb.dense_r(n) - Eigen::MatrixXcd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((s.mb.z[n] - s.rx.body.segment(n * 8, 8)).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("banded matched filter equals the dense products") {
    FrameParams p = make_params(4, 16, 3);
    Scenario s(p, spread_paths(p, 7), 0.1, 8);
    for (int n = 0; n < p.n_blocks; ++n) {
        Eigen::MatrixXcd g = s.blocks.dense(n);
        Eigen::MatrixXcd r_dense = g.adjoint() * g;
        Eigen::VectorXcd z_dense = g.adjoint() * s.rx.body.segment(n * 16, 16);
        CHECK((s.mb.dense_r(n) - r_dense).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((s.mb.z[n] - z_dense).cwiseAbs().maxCoeff() < 1e-12);
        // Hermitian by construction
        CHECK((s.mb.dense_r(n) - s.mb.dense_r(n).adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("config validation") {
    DetectorConfig cfg;
    cfg.relaxation = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.relaxation = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = DetectorConfig{};
    cfg.max_iters = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("identity channel recovers in one iteration") {
    FrameParams p = make_params(8, 16, 1);
    Scenario s(p, identity_path(), 0.0, 11);
    DetectorConfig cfg;
    cfg.max_iters = 1;
    auto dr = gs_detect(s.mb, cfg, p, s.c, Modem::otsm, 0.0, 0.0);
    CHECK(dr.iterations == 1);
    CHECK((dr.grid_hard - s.grid).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("noiseless frequency-selective recovery within 15 iterations") {
    FrameParams p = make_params(8, 32, 3);
    for (unsigned seed : {21u, 22u, 23u}) {
        Scenario s(p, spread_paths(p, seed), 0.0, 100 + seed);
        DetectorConfig cfg;
        cfg.max_iters = 15;
        auto dr = gs_detect(s.mb, cfg, p, s.c, Modem::otsm, 0.0, 0.0);
        CHECK(dr.iterations <= 15);
        CHECK((dr.grid_hard - s.grid).cwiseAbs().maxCoeff() < 1e-9);

        // and the direct least-squares solve slices to the same symbols
        Eigen::VectorXcd ls = block_ls_solve(s.mb);
        auto soft = rows_to_symbol(Modem::otsm, fold_body(p, ls));
        int agree = 0, total = 0;
        for (int m = 0; m < p.mprime(); ++m)
            for (int n = 0; n < p.n_blocks; ++n) {
                ++total;
                if (s.c.nearest_index(soft(m, n)) == s.c.nearest_index(dr.grid_hard(m, n))) ++agree;
            }
        CHECK(agree == total);
    }
}

TEST_CASE("pure gauss-seidel: fixed point and monotone residual") {
    FrameParams p = make_params(4, 24, 2);
    Scenario s(p, spread_paths(p, 31), 0.0, 200);
    DetectorConfig cfg;
    cfg.decision_feedback = false;
    cfg.stop_tol = 0.0;

    std::vector<double> prev_res(p.n_blocks, std::numeric_limits<double>::infinity());
    for (int iters = 1; iters <= 12; ++iters) {
        cfg.max_iters = iters;
        auto dr = gs_detect(s.mb, cfg, p, s.c, Modem::otsm, 0.0, 0.0);
        for (int n = 0; n < p.n_blocks; ++n) {
            Eigen::VectorXcd sn = dr.s_time.segment(n * p.m_slots, p.m_slots);
            double res = (s.mb.z[n] - s.mb.dense_r(n) * sn).norm();
            CHECK(res <= prev_res[n] * (1.0 + 1e-9));
            prev_res[n] = res;
        }
    }

    // iterated to convergence the fixed point satisfies R s = z
    cfg.max_iters = 20000;
    cfg.stop_tol = 1e-14;
    auto dr_conv = gs_detect(s.mb, cfg, p, s.c, Modem::otsm, 0.0, 0.0);
    for (int n = 0; n < p.n_blocks; ++n) {
        Eigen::VectorXcd sn = dr_conv.s_time.segment(n * p.m_slots, p.m_slots);
        CHECK((s.mb.z[n] - s.mb.dense_r(n) * sn).norm() < 1e-8);
    }

    // with feedback off the estimate matches textbook per-block GS
    cfg.max_iters = 3;
    auto dr = gs_detect(s.mb, cfg, p, s.c, Modem::otsm, 0.0, 0.0);
    for (int n = 0; n < p.n_blocks; ++n) {
        Eigen::MatrixXcd r = s.mb.dense_r(n);
        Eigen::MatrixXcd dl = r.triangularView<Eigen::Lower>();
        Eigen::MatrixXcd lh = r - dl;  // strictly upper = L^H
        Eigen::VectorXcd ref = Eigen::VectorXcd::Zero(p.m_slots);
        for (int it = 0; it < 3; ++it)
            ref = dl.triangularView<Eigen::Lower>().solve(s.mb.z[n] - lh * ref);
        CHECK((dr.s_time.segment(n * p.m_slots, p.m_slots) - ref).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("pure gs sweeps keep blocks independent") {
    FrameParams p = make_params(4, 16, 2);
    Scenario s(p, spread_paths(p, 41), 0.05, 300);
    DetectorConfig cfg;
    cfg.decision_feedback = false;
    cfg.max_iters = 6;
    auto base = gs_detect(s.mb, cfg, p, s.c, Modem::otsm, 0.0, s.sigma2);

    MatchedBlocks corrupted = s.mb;
    corrupted.rband[2] *= 0.5;
    corrupted.z[2] *= -1.0;
    auto mod = gs_detect(corrupted, cfg, p, s.c, Modem::otsm, 0.0, s.sigma2);
    for (int n = 0; n < p.n_blocks; ++n) {
        double diff = (base.s_time.segment(n * 16, 16) - mod.s_time.segment(n * 16, 16)).norm();
        if (n == 2) {
            CHECK(diff > 1e-6);
        } else {
            CHECK(diff == 0.0);
        }
    }
}

TEST_CASE("single tap mmse limits") {
    Eigen::VectorXcd y(3), h(3);
    y << cx(1, 1), cx(-2, 0.5), cx(0.3, -0.7);
    h << cx(1, 0), cx(0, 0), cx(0.5, 0.5);
    auto x = single_tap_mmse(y, h, 1e-12);
    CHECK(std::abs(x(0) - y(0)) < 1e-9);
    CHECK(std::abs(x(1)) == 0.0);  // dead bin guarded

    auto x0 = single_tap_mmse(y, h, 0.0);
    CHECK(std::abs(x0(1)) == 0.0);
}

TEST_CASE("ofdm single tap against the frequency-domain oracle") {
    FrameParams p = make_params(4, 16, 2);
    // static single path at delay 1: y_k = h_k x_k exactly
    PathSet ps;
    ps.paths.push_back({cx(0.8, -0.4), 1.0, 0.0});
    DelayTimeTaps taps(ps, p, DiscretizeMode::round_delay);

    std::mt19937 rng(55);
    std::normal_distribution<double> g;
    Eigen::MatrixXcd grid(16, 4);
    for (int i = 0; i < grid.size(); ++i) grid(i / 4, i % 4) = cx(g(rng), g(rng));

    auto rx = apply_channel(taps, ofdm_modulate(p, grid), 0.0, 0);
    auto y = ofdm_demodulate(p, rx);
    auto h = ofdm_subcarrier_gains(taps, p);
    CHECK((y - grid.cwiseProduct(h)).cwiseAbs().maxCoeff() < 1e-10);

    // MMSE equals zero-forcing up to the bias factor |h|^2/(|h|^2+s2)
    const double s2 = 0.05;
    auto xh = ofdm_single_tap_detect(p, rx, taps, s2);
    for (int m = 0; m < 16; ++m)
        for (int n = 0; n < 4; ++n) {
            cx zf = y(m, n) / h(m, n);
            double bias = std::norm(h(m, n)) / (std::norm(h(m, n)) + s2);
            CHECK(std::abs(xh(m, n) - zf * bias) < 1e-10);
        }
}

TEST_CASE("fde single tap recovers a static channel") {
    FrameParams p = make_params(8, 16, 2);
    PathSet ps;
    ps.paths.push_back({cx(0.9, 0.2), 0.0, 0.0});
    ps.paths.push_back({cx(0.3, -0.25), 2.0, 0.0});
    Scenario s(p, ps, 0.0, 77);
    Eigen::MatrixXcd taps_mat = s.taps.materialize(0, p.frame_len());
    auto dr = fde_single_tap_detect(p, s.rx, taps_mat, 1e-9, s.c, Modem::otsm, 0.0);
    CHECK((dr.grid_hard - s.grid).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("mmse initializer runs and helps noiseless convergence") {
    FrameParams p = make_params(8, 16, 2);
    Scenario s(p, spread_paths(p, 91), 0.0, 400);
    DetectorConfig cfg;
    cfg.init = DetectorInit::mmse_single_tap;
    cfg.max_iters = 15;
    auto dr = gs_detect(s.mb, cfg, p, s.c, Modem::otsm, 0.0, 0.0);
    CHECK((dr.grid_hard - s.grid).cwiseAbs().maxCoeff() < 1e-9);
}
