#pragma once

#include <Eigen/Dense>

#include "otsm/channel.hpp"
#include "otsm/frame.hpp"
#include "otsm/modem.hpp"

namespace otsm {

enum class DetectorInit { zero, mmse_single_tap };

struct DetectorConfig {
    int max_iters = 15;
    double relaxation = 1.0;   // delta in (0,1]; 0.5 recommended for 16/64-QAM
    DetectorInit init = DetectorInit::zero;
    double stop_tol = 1e-6;    // relative change of the time-domain estimate
    bool decision_feedback = true;  // slice+blend each sweep (the shipped detector)

    void validate() const;
};

/// Matched-filter products per block: R_n = G_n^H G_n (Hermitian, banded
/// with half bandwidth l_max) and z_n = G_n^H r_n.
struct MatchedBlocks {
    int n_blocks = 0;
    int m_slots = 0;
    int l_max = 0;
    // rband[n](i, d) = R_n(i, i-d) for d = 0..l_max (lower band; the
    // upper band follows by Hermitian symmetry).
    std::vector<Eigen::MatrixXcd> rband;
    std::vector<Eigen::VectorXcd> z;

    Eigen::MatrixXcd dense_r(int n) const;
};

MatchedBlocks matched_filter(const BlockChannel& blocks, const ReceivedFrame& rx);

struct DetectionResult {
    DelaySequencyGrid grid_soft;  // delay-sequency estimate before slicing
    DelaySequencyGrid grid_hard;  // sliced data rows, known rows enforced
    Eigen::VectorXcd s_time;      // final blended time-domain estimate
    int iterations = 0;
};

/// Gauss-Seidel iterative detector of the matched-filtered blocks.
/// Per sweep: one GS pass over each block, transform to the symbol
/// domain, slice data rows, re-transform and blend with factor delta.
/// `modem` selects the row transform (otsm/otfs/sc).
DetectionResult gs_detect(const MatchedBlocks& mb, const DetectorConfig& cfg,
                          const FrameParams& p, const QamConstellation& constellation,
                          Modem modem, double pilot_amplitude, double noise_var,
                          const Eigen::VectorXcd* init_time = nullptr);

/// Direct per-block least-squares solve s_n = pinv(R_n) z_n; oracle for
/// the iterative detector.
Eigen::VectorXcd block_ls_solve(const MatchedBlocks& mb);

/// Scalar-gain MMSE: conj(h) y / (|h|^2 + noise_var/es) per element.
Eigen::VectorXcd single_tap_mmse(const Eigen::VectorXcd& y, const Eigen::VectorXcd& gains,
                                 double noise_var, double es = 1.0);

/// Per-subcarrier channel transfer for OFDM symbol n, from the taps
/// averaged over that symbol body: H(k) = sum_l gbar_l exp(-j2 pi k l/M).
Eigen::MatrixXcd ofdm_subcarrier_gains(const DelayTimeTaps& taps, const FrameParams& p);

/// OFDM receiver: demodulate + per-bin MMSE.
Eigen::MatrixXcd ofdm_single_tap_detect(const FrameParams& p, const ReceivedFrame& rx,
                                        const DelayTimeTaps& taps, double noise_var);

/// Frequency-domain single-tap equalizer for the ZP-grid modems: each
/// time block is equalized with the per-block DFT of its mean taps, then
/// demodulated. The non-iterative OTSM baseline.
DetectionResult fde_single_tap_detect(const FrameParams& p, const ReceivedFrame& rx,
                                      const Eigen::MatrixXcd& tap_matrix, double noise_var,
                                      const QamConstellation& constellation, Modem modem,
                                      double pilot_amplitude);

}  // namespace otsm
