#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "otsm/frame.hpp"
#include "otsm/modem.hpp"

namespace otsm {

/// One propagation path. delay is in sample units (can be fractional),
/// doppler in cycles per frame duration NT.
struct Path {
    cx gain{0.0, 0.0};
    double delay = 0.0;    // ell_i
    double doppler = 0.0;  // kappa_i
};

struct PathSet {
    std::vector<Path> paths;

    double max_delay() const;
    double max_abs_doppler() const;
    /// FNV-style hash of the raw path parameters; used to assert that
    /// paired runs saw identical channel realizations.
    uint64_t hash() const;
};

/// Named power-delay profile: (excess delay ns, power dB) pairs.
struct DelayProfile {
    std::string name;
    std::vector<std::pair<double, double>> taps;
};

/// 3GPP Extended Vehicular A profile, 9 taps up to 2510 ns.
const DelayProfile& eva_profile();

/// Draw a channel realization: Rayleigh gains with the profile's powers
/// (normalized to unit total), per-path Doppler uniform in (0, nu_max)
/// with nu_max = speed * carrier / c, or symmetric (-nu_max, nu_max).
/// Deterministic given the seed.
PathSet sample_paths(const DelayProfile& profile, const FrameParams& p, double speed_kmh,
                     uint64_t seed, bool symmetric_doppler = false);

enum class DiscretizeMode { round_delay, sinc };

/// Sampled delay-time channel g_s[l, q]. Stored analytically as per-tap
/// phasor sums so it can be evaluated at any q, including the CP region
/// (q < 0); materialize() produces the (l_max+1) x count array view.
class DelayTimeTaps {
public:
    DelayTimeTaps(const PathSet& paths, const FrameParams& p, DiscretizeMode mode);

    int l_max() const { return l_max_; }
    long frame_len() const { return frame_len_; }

    cx value(int l, long q) const;
    /// Rows l = 0..l_max, columns q = q0 .. q0+count-1.
    Eigen::MatrixXcd materialize(long q0, long count) const;

private:
    struct Component {
        cx amp;
        double phase_step;  // 2*pi*kappa/NM
    };
    int l_max_;
    long frame_len_;
    std::vector<std::vector<Component>> comps_;  // per delay tap
};

/// r[q] = sum_l g_s[l,q] s[q-l] + w[q] over the full transmit stream
/// (CP included, body time of the first sample = -cp length). Samples
/// before the stream are zero. noise_var is the total complex variance.
ReceivedFrame apply_channel(const DelayTimeTaps& taps, const TimeFrame& tx, double noise_var,
                            uint64_t noise_seed);

/// N lower-banded M x M blocks G_n with G_n(m, m-l) = g_s[l, m+nM].
struct BlockChannel {
    int n_blocks = 0;
    int m_slots = 0;
    int l_max = 0;
    // band[n](m, l) = G_n(m, m-l); entries with l > m are zero.
    std::vector<Eigen::MatrixXcd> band;

    Eigen::MatrixXcd dense(int n) const;
    /// y_n = G_n * s_n for every block (no noise); s laid out block-wise.
    Eigen::VectorXcd apply(const Eigen::VectorXcd& s) const;
};

BlockChannel build_block_channel(const DelayTimeTaps& taps, const FrameParams& p);
/// Same from a materialized (l_max+1) x NM tap array (used with channel
/// estimates).
BlockChannel build_block_channel(const Eigen::MatrixXcd& tap_matrix, const FrameParams& p);

/// Dense NM x NM time-domain matrix with the frame-level CP folded in as
/// cyclic wrap entries: G(q, [q-l] mod NM) = g_s[l, q]. Oracle scale only.
Eigen::MatrixXcd build_dense_time_matrix(const DelayTimeTaps& taps, const FrameParams& p);

/// Dense delay-sequency channel H = (I (x) W) P^T G P (I (x) W); rejects
/// NM > 4096.
Eigen::MatrixXcd build_delay_sequency_matrix(const DelayTimeTaps& taps, const FrameParams& p);

/// Sequency spread at (m, l): U = W diag(gt) W (symmetric) and u = W*gt,
/// with gt(n) = g_s[l, m+nM].
struct SequencySpread {
    Eigen::MatrixXcd U;
    Eigen::VectorXcd u;
};
SequencySpread sequency_spread(const DelayTimeTaps& taps, int m, int l, const FrameParams& p);

/// OTFS analog: V = F diag(gt) F^H (circulant) and nu = F*gt.
struct DopplerSpread {
    Eigen::MatrixXcd V;
    Eigen::VectorXcd nu;
};
DopplerSpread doppler_spread(const DelayTimeTaps& taps, int m, int l, const FrameParams& p);

}  // namespace otsm
