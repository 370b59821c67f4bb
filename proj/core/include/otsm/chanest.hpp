#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "otsm/channel.hpp"
#include "otsm/frame.hpp"
#include "otsm/modem.hpp"

namespace otsm {

/// Pilot power bookkeeping. beta is the excess power factor (linear);
/// the baseline beta = 1 keeps the frame's total transmit power equal to
/// a pilot-free all-data frame: E_p = beta * N * l_zp * E_s.
struct PilotConfig {
    double beta = 1.0;
    double es = 1.0;
    double ep = 0.0;    // pilot symbol energy
    double ppr = 0.0;   // eta(beta)
    double ppr0 = 0.0;  // eta_0 = l_zp / M

    double amplitude() const;
};

PilotConfig pilot_power(const FrameParams& p, double beta, double es = 1.0);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

enum class InterpMode { linear, spline };

/// Knot estimates of the delay-time taps at the pilot sample positions
/// q = m_p + l + n*M for n = -1..N-1 (column 0 is the CP anchor), plus
/// the interpolated full-frame reconstruction.
struct TapEstimate {
    int l_max = 0;
    int m_p = 0;
    int m_slots = 0;
    Eigen::MatrixXcd knots;  // (l_max+1) x (N+1)
    Eigen::MatrixXcd full;   // (l_max+1) x NM, filled by interpolate()

    long knot_position(int l, int knot_index) const {
        // knot_index 0 is n = -1
        return m_p + l + static_cast<long>(knot_index - 1) * m_slots;
    }
};

/// Element-wise division of the received pilot rows by the known
/// delay-time pilot vector. Requires the received CP samples (anchor).
TapEstimate estimate_taps(const FrameParams& p, const ReceivedFrame& rx, const PilotConfig& pilot,
                          Modem modem);

/// Reconstruct the full delay-time taps from the knots. Linear mode uses
/// the piecewise slope (v_{n+1}-v_n)/M; spline mode fits a natural cubic
/// through the same knots. Knots are reproduced exactly; samples past the
/// last knot (inside the final ZP rows) hold its value.
void interpolate(TapEstimate& est, const FrameParams& p, InterpMode mode);

/// Normalized reconstruction error sum|est-truth|^2 / sum|truth|^2.
double tap_nmse(const Eigen::MatrixXcd& estimate, const Eigen::MatrixXcd& truth);

}  // namespace otsm
