#pragma once

#include <string>

#include <Eigen/Dense>

#include "otsm/frame.hpp"

namespace otsm {

enum class Modem { otsm, otfs, ofdm, sc };

std::string to_string(Modem m);
Modem modem_from_string(const std::string& s);

/// Transmit stream. body holds the NM frame samples (for OFDM the full
/// per-symbol-CP stream); cp is the frame-level cyclic prefix copied from
/// the tail (empty for OFDM). The first stream sample sits at body time
/// q = -cp.size().
struct TimeFrame {
    Eigen::VectorXcd body;
    Eigen::VectorXcd cp;
};

/// Received stream after the channel, split the same way. cp carries the
/// received samples that correspond to the transmitted frame-level CP;
/// channel estimation reads its pilot echo.
struct ReceivedFrame {
    Eigen::VectorXcd body;
    Eigen::VectorXcd cp;
};

// OTSM: row-wise WHT then column-wise vectorization, frame-level CP.
TimeFrame otsm_modulate(const FrameParams& p, const DelaySequencyGrid& x);
DelaySequencyGrid otsm_demodulate(const FrameParams& p, const ReceivedFrame& rx);

// ZP-OTFS: same structure with the IDFT/DFT pair along the Doppler axis.
TimeFrame otfs_modulate(const FrameParams& p, const DelaySequencyGrid& x);
DelaySequencyGrid otfs_demodulate(const FrameParams& p, const ReceivedFrame& rx);

// Single carrier: the OTSM chain with the row transform removed.
TimeFrame sc_modulate(const FrameParams& p, const DelaySequencyGrid& x);
DelaySequencyGrid sc_demodulate(const FrameParams& p, const ReceivedFrame& rx);

// OFDM baseline: N symbols of M subcarriers, unitary IDFT per symbol,
// per-symbol CP of length l_max. The grid rows index subcarriers.
TimeFrame ofdm_modulate(const FrameParams& p, const Eigen::MatrixXcd& subcarrier_grid);
Eigen::MatrixXcd ofdm_demodulate(const FrameParams& p, const ReceivedFrame& rx);

/// Transmit stream length in samples for a given modem.
long stream_length(Modem m, const FrameParams& p);

/// Grid -> time-domain frame body (no CP) for the ZP-grid modems.
/// Used by the turbo loop to refresh the detector estimate.
Eigen::VectorXcd remodulate_body(Modem m, const FrameParams& p, const DelaySequencyGrid& x);

/// Row transform pair shared by the detectors (otsm/otfs/sc only):
/// delay-time matrix -> symbol-domain grid and back.
Eigen::MatrixXcd rows_to_symbol(Modem m, const Eigen::MatrixXcd& delay_time);
Eigen::MatrixXcd rows_to_time(Modem m, const Eigen::MatrixXcd& grid);

/// Fold a frame body into the delay-time matrix (column-wise) and back.
Eigen::MatrixXcd fold_body(const FrameParams& p, const Eigen::VectorXcd& body);
Eigen::VectorXcd unfold_body(const Eigen::MatrixXcd& delay_time);

}  // namespace otsm
