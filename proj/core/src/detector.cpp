#include "otsm/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace otsm {

void DetectorConfig::validate() const {
    if (max_iters < 1) throw std::invalid_argument("DetectorConfig: max_iters must be >= 1");
    if (!(relaxation > 0.0 && relaxation <= 1.0))
        throw std::invalid_argument("DetectorConfig: relaxation must be in (0, 1]");
    if (stop_tol < 0.0) throw std::invalid_argument("DetectorConfig: stop_tol must be >= 0");
}

Eigen::MatrixXcd MatchedBlocks::dense_r(int n) const {
    const auto& b = rband.at(n);
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(m_slots, m_slots);
    for (int i = 0; i < m_slots; ++i)
        for (int d = 0; d <= std::min(l_max, i); ++d) {
            r(i, i - d) = b(i, d);
            r(i - d, i) = std::conj(b(i, d));
        }
    return r;
}

MatchedBlocks matched_filter(const BlockChannel& blocks, const ReceivedFrame& rx) {
    const int m = blocks.m_slots;
    const int lmax = blocks.l_max;
    if (rx.body.size() != static_cast<long>(blocks.n_blocks) * m)
        throw std::invalid_argument("matched_filter: body length mismatch");

    MatchedBlocks mb;
    mb.n_blocks = blocks.n_blocks;
    mb.m_slots = m;
    mb.l_max = lmax;
    mb.rband.reserve(blocks.n_blocks);
    mb.z.reserve(blocks.n_blocks);

    for (int n = 0; n < blocks.n_blocks; ++n) {
        const auto& g = blocks.band[n];  // g(m, l) = G_n(m, m-l)
        Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(m, lmax + 1);
        Eigen::VectorXcd z = Eigen::VectorXcd::Zero(m);
        const auto rn = rx.body.segment(static_cast<long>(n) * m, m);
        for (int i = 0; i < m; ++i) {
            for (int d = 0; d <= lmax; ++d) {
                if (i - d < 0) break;
                cx acc(0.0, 0.0);
                const int amax = std::min(lmax - d, m - 1 - i);
                for (int a = 0; a <= amax; ++a) acc += std::conj(g(i + a, a)) * g(i + a, a + d);
                r(i, d) = acc;  // R_n(i, i-d)
            }
            cx zz(0.0, 0.0);
            for (int l = 0; l <= std::min(lmax, m - 1 - i); ++l) zz += std::conj(g(i + l, l)) * rn(i + l);
            z(i) = zz;
        }
        mb.rband.push_back(std::move(r));
        mb.z.push_back(std::move(z));
    }
    return mb;
}

namespace {

// One in-place Gauss-Seidel sweep on a Hermitian banded system.
// rb(i, d) = R(i, i-d), d = 0..lmax. Returns the number of diagonal
// entries that needed the degeneracy substitute.
int gs_sweep(const Eigen::MatrixXcd& rb, const Eigen::VectorXcd& z, Eigen::Ref<Eigen::VectorXcd> s,
             int lmax, double diag_floor) {
    const int m = static_cast<int>(z.size());
    int degenerate = 0;
    for (int i = 0; i < m; ++i) {
        cx acc = z(i);
        for (int d = 1; d <= std::min(lmax, i); ++d) acc -= rb(i, d) * s(i - d);
        for (int d = 1; d <= std::min(lmax, m - 1 - i); ++d) acc -= std::conj(rb(i + d, d)) * s(i + d);
        double diag = rb(i, 0).real();
        if (diag < diag_floor) {
            diag = diag_floor;
            ++degenerate;
        }
        s(i) = acc / diag;
    }
    return degenerate;
}

void enforce_known_rows(const FrameParams& p, double pilot_amplitude, Eigen::MatrixXcd& x) {
    for (int m = p.mprime(); m < p.m_slots; ++m) x.row(m).setZero();
    x(p.pilot_delay(), p.pilot_seq) = cx(pilot_amplitude, 0.0);
}

void slice_grid(const FrameParams& p, const QamConstellation& c, double pilot_amplitude,
                const Eigen::MatrixXcd& soft, Eigen::MatrixXcd& hard) {
    hard = soft;
    for (int m = 0; m < p.mprime(); ++m)
        for (int n = 0; n < p.n_blocks; ++n) hard(m, n) = c.nearest(soft(m, n));
    enforce_known_rows(p, pilot_amplitude, hard);
}

}  // namespace

DetectionResult gs_detect(const MatchedBlocks& mb, const DetectorConfig& cfg, const FrameParams& p,
                          const QamConstellation& constellation, Modem modem,
                          double pilot_amplitude, double noise_var,
                          const Eigen::VectorXcd* init_time) {
    cfg.validate();
    if (mb.n_blocks != p.n_blocks || mb.m_slots != p.m_slots)
        throw std::invalid_argument("gs_detect: matched blocks / frame mismatch");
    const long nm = p.frame_len();
    const int m = p.m_slots;

    // floor for degenerate diagonals (all-zero channel column)
    const double diag_floor = noise_var > 0.0 ? noise_var : 1e-30;

    Eigen::VectorXcd s(nm);
    if (init_time) {
        if (init_time->size() != nm) throw std::invalid_argument("gs_detect: bad init length");
        s = *init_time;
    } else if (cfg.init == DetectorInit::mmse_single_tap) {
        for (int n = 0; n < p.n_blocks; ++n)
            for (int i = 0; i < m; ++i) {
                double d = mb.rband[n](i, 0).real();
                s(static_cast<long>(n) * m + i) = mb.z[n](i) / (d + noise_var + 1e-30);
            }
    } else {
        s.setZero();
    }

    DetectionResult res;
    Eigen::MatrixXcd soft(m, p.n_blocks), hard(m, p.n_blocks);
    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        Eigen::VectorXcd prev = s;
        for (int n = 0; n < p.n_blocks; ++n)
            gs_sweep(mb.rband[n], mb.z[n], s.segment(static_cast<long>(n) * m, m), mb.l_max,
                     diag_floor);

        res.iterations = iter;
        if (cfg.decision_feedback) {
            soft = rows_to_symbol(modem, fold_body(p, s));
            slice_grid(p, constellation, pilot_amplitude, soft, hard);
            Eigen::VectorXcd s_dec = unfold_body(rows_to_time(modem, hard));
            s = (1.0 - cfg.relaxation) * s + cfg.relaxation * s_dec;
        }
        double denom = prev.norm();
        double change = denom > 1e-12 ? (s - prev).norm() / denom : 1.0;
        if (change < cfg.stop_tol) break;
    }

    if (!cfg.decision_feedback) {
        soft = rows_to_symbol(modem, fold_body(p, s));
        slice_grid(p, constellation, pilot_amplitude, soft, hard);
    }
    res.grid_soft = soft;
    res.grid_hard = hard;
    res.s_time = s;
    return res;
}

Eigen::VectorXcd block_ls_solve(const MatchedBlocks& mb) {
    Eigen::VectorXcd s(static_cast<long>(mb.n_blocks) * mb.m_slots);
    for (int n = 0; n < mb.n_blocks; ++n) {
        Eigen::MatrixXcd r = mb.dense_r(n);
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(r);
        s.segment(static_cast<long>(n) * mb.m_slots, mb.m_slots) = cod.solve(mb.z[n]);
    }
    return s;
}

Eigen::VectorXcd single_tap_mmse(const Eigen::VectorXcd& y, const Eigen::VectorXcd& gains,
                                 double noise_var, double es) {
    if (y.size() != gains.size()) throw std::invalid_argument("single_tap_mmse: length mismatch");
    Eigen::VectorXcd x(y.size());
    const double reg = noise_var / es;
    for (long i = 0; i < y.size(); ++i) {
        double denom = std::norm(gains(i)) + reg;
        x(i) = denom > 0.0 ? std::conj(gains(i)) * y(i) / denom : cx(0.0, 0.0);
    }
    return x;
}

namespace {
Eigen::VectorXcd transfer_from_mean_taps(const DelayTimeTaps& taps, int m_slots, long q0,
                                         long count) {
    const int lmax = taps.l_max();
    Eigen::VectorXcd gbar = Eigen::VectorXcd::Zero(lmax + 1);
    for (int l = 0; l <= lmax; ++l) {
        cx acc(0.0, 0.0);
        for (long q = q0; q < q0 + count; ++q) acc += taps.value(l, q);
        gbar(l) = acc / static_cast<double>(count);
    }
    Eigen::VectorXcd h(m_slots);
    for (int k = 0; k < m_slots; ++k) {
        cx acc(0.0, 0.0);
        for (int l = 0; l <= lmax; ++l) {
            double ang = -2.0 * std::numbers::pi * k * l / m_slots;
            acc += gbar(l) * cx(std::cos(ang), std::sin(ang));
        }
        h(k) = acc;
    }
    return h;
}
}  // namespace

Eigen::MatrixXcd ofdm_subcarrier_gains(const DelayTimeTaps& taps, const FrameParams& p) {
    Eigen::MatrixXcd h(p.m_slots, p.n_blocks);
    const int cp = p.l_max;
    for (int n = 0; n < p.n_blocks; ++n) {
        long q0 = static_cast<long>(n) * (p.m_slots + cp) + cp;
        h.col(n) = transfer_from_mean_taps(taps, p.m_slots, q0, p.m_slots);
    }
    return h;
}

Eigen::MatrixXcd ofdm_single_tap_detect(const FrameParams& p, const ReceivedFrame& rx,
                                        const DelayTimeTaps& taps, double noise_var) {
    Eigen::MatrixXcd y = ofdm_demodulate(p, rx);
    Eigen::MatrixXcd h = ofdm_subcarrier_gains(taps, p);
    Eigen::MatrixXcd x(p.m_slots, p.n_blocks);
    for (int n = 0; n < p.n_blocks; ++n)
        x.col(n) = single_tap_mmse(y.col(n), h.col(n), noise_var);
    return x;
}

DetectionResult fde_single_tap_detect(const FrameParams& p, const ReceivedFrame& rx,
                                      const Eigen::MatrixXcd& tap_matrix, double noise_var,
                                      const QamConstellation& constellation, Modem modem,
                                      double pilot_amplitude) {
    if (rx.body.size() != p.frame_len())
        throw std::invalid_argument("fde_single_tap_detect: body length mismatch");
    if (tap_matrix.rows() != p.l_max + 1 || tap_matrix.cols() != p.frame_len())
        throw std::invalid_argument("fde_single_tap_detect: tap matrix dimensions mismatch");
    const int m = p.m_slots;
    Eigen::VectorXcd s(p.frame_len());
    for (int n = 0; n < p.n_blocks; ++n) {
        const long base = static_cast<long>(n) * m;
        Eigen::VectorXcd gbar = Eigen::VectorXcd::Zero(p.l_max + 1);
        for (int l = 0; l <= p.l_max; ++l) gbar(l) = tap_matrix.row(l).segment(base, m).mean();
        Eigen::VectorXcd h(m);
        for (int k = 0; k < m; ++k) {
            cx acc(0.0, 0.0);
            for (int l = 0; l <= p.l_max; ++l) {
                double ang = -2.0 * std::numbers::pi * k * l / m;
                acc += gbar(l) * cx(std::cos(ang), std::sin(ang));
            }
            h(k) = acc;
        }
        Eigen::VectorXcd rho = dft(rx.body.segment(base, m));
        s.segment(base, m) = idft(single_tap_mmse(rho, h, noise_var));
    }
    DetectionResult res;
    res.grid_soft = rows_to_symbol(modem, fold_body(p, s));
    Eigen::MatrixXcd hard;
    slice_grid(p, constellation, pilot_amplitude, res.grid_soft, hard);
    res.grid_hard = hard;
    res.s_time = s;
    res.iterations = 1;
    return res;
}

}  // namespace otsm
