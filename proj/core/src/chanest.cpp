#include "otsm/chanest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace otsm {

double PilotConfig::amplitude() const { return std::sqrt(ep); }

PilotConfig pilot_power(const FrameParams& p, double beta, double es) {
    if (beta <= 0.0) throw std::invalid_argument("pilot_power: beta must be positive");
    PilotConfig c;
    c.beta = beta;
    c.es = es;
    c.ep = beta * p.n_blocks * p.l_zp * es;
    const double mprime = p.mprime();
    c.ppr = beta * p.l_zp / (mprime + beta * p.l_zp);
    c.ppr0 = static_cast<double>(p.l_zp) / p.m_slots;
    return c;
}

TapEstimate estimate_taps(const FrameParams& p, const ReceivedFrame& rx, const PilotConfig& pilot,
                          Modem modem) {
    if (rx.body.size() != p.frame_len())
        throw std::invalid_argument("estimate_taps: body length mismatch");
    if (rx.cp.size() < p.cp_len())
        throw std::invalid_argument("estimate_taps: received CP missing (required for the n = -1 anchor)");

    // delay-time pilot vector: the pilot row transformed to time. Entries
    // are +-x_p/sqrt(N) for OTSM and constant-modulus for OTFS, so the
    // division below is always defined.
    Eigen::VectorXcd pilot_row = Eigen::VectorXcd::Zero(p.n_blocks);
    pilot_row(p.pilot_seq) = cx(pilot.amplitude(), 0.0);
    Eigen::VectorXcd pilot_time;
    if (modem == Modem::otsm) {
        pilot_time = wht(pilot_row);
    } else if (modem == Modem::otfs) {
        pilot_time = idft(pilot_row);
    } else {
        throw std::invalid_argument("estimate_taps: pilot-based estimation needs otsm or otfs");
    }

    const int m_p = p.pilot_delay();
    TapEstimate est;
    est.l_max = p.l_max;
    est.m_p = m_p;
    est.m_slots = p.m_slots;
    est.knots.resize(p.l_max + 1, p.n_blocks + 1);
    for (int l = 0; l <= p.l_max; ++l) {
        // CP anchor: received stream sample l sits at body time m_p+l-M,
        // and the CP copies the pilot sample of the last block.
        est.knots(l, 0) = rx.cp(l) / pilot_time(p.n_blocks - 1);
        for (int n = 0; n < p.n_blocks; ++n) {
            long q = m_p + l + static_cast<long>(n) * p.m_slots;
            est.knots(l, n + 1) = rx.body(q) / pilot_time(n);
        }
    }
    return est;
}

namespace {

// Natural cubic spline second derivatives for uniformly spaced knots.
Eigen::VectorXcd spline_second_derivatives(const Eigen::VectorXcd& v, double h) {
    const int n = static_cast<int>(v.size());
    Eigen::VectorXcd m = Eigen::VectorXcd::Zero(n);
    if (n < 3) return m;
    const int inner = n - 2;
    Eigen::VectorXd diag = Eigen::VectorXd::Constant(inner, 4.0);
    Eigen::VectorXcd rhs(inner);
    for (int i = 0; i < inner; ++i)
        rhs(i) = 6.0 / (h * h) * (v(i) - 2.0 * v(i + 1) + v(i + 2));
    // Thomas algorithm, sub/super diagonals are all ones
    for (int i = 1; i < inner; ++i) {
        double w = 1.0 / diag(i - 1);
        diag(i) -= w;
        rhs(i) -= w * rhs(i - 1);
    }
    Eigen::VectorXcd sol(inner);
    sol(inner - 1) = rhs(inner - 1) / diag(inner - 1);
    for (int i = inner - 2; i >= 0; --i) sol(i) = (rhs(i) - sol(i + 1)) / diag(i);
    for (int i = 0; i < inner; ++i) m(i + 1) = sol(i);
    return m;
}

}  // namespace

void interpolate(TapEstimate& est, const FrameParams& p, InterpMode mode) {
    const int nk = static_cast<int>(est.knots.cols());
    if (nk < 2) throw std::invalid_argument("interpolate: need at least two knots per tap");
    const long nm = p.frame_len();
    const double h = p.m_slots;
    est.full.resize(est.l_max + 1, nm);

    for (int l = 0; l <= est.l_max; ++l) {
        const Eigen::VectorXcd v = est.knots.row(l).transpose();
        const long q_first = est.knot_position(l, 0);
        const long q_last = est.knot_position(l, nk - 1);
        Eigen::VectorXcd d2;
        if (mode == InterpMode::spline) d2 = spline_second_derivatives(v, h);

        for (long q = 0; q < nm; ++q) {
            if (q >= q_last) {
                est.full(l, q) = v(nk - 1);
                continue;
            }
            long seg = (q - q_first) / p.m_slots;
            seg = std::min<long>(std::max<long>(seg, 0), nk - 2);
            const double u = static_cast<double>(q - (q_first + seg * p.m_slots));
            if (mode == InterpMode::linear) {
                cx slope = (v(seg + 1) - v(seg)) / h;
                est.full(l, q) = v(seg) + slope * u;
            } else {
                const double a = (h - u) / h;
                const double b = u / h;
                est.full(l, q) = a * v(seg) + b * v(seg + 1) +
                                 ((a * a * a - a) * d2(seg) + (b * b * b - b) * d2(seg + 1)) *
                                     (h * h) / 6.0;
            }
        }
    }
}

double tap_nmse(const Eigen::MatrixXcd& estimate, const Eigen::MatrixXcd& truth) {
    if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
        throw std::invalid_argument("tap_nmse: dimensions mismatch");
    double num = (estimate - truth).squaredNorm();
    double den = truth.squaredNorm();
    return den > 0.0 ? num / den : 0.0;
}

}  // namespace otsm
