#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "otsm/chanest.hpp"
#include "otsm/channel.hpp"
#include "otsm/coding.hpp"
#include "otsm/detector.hpp"
#include "otsm/frame.hpp"
#include "otsm/modem.hpp"

namespace otsm {

enum class DetectorKind { single_tap, gs_iterative };
enum class CsiMode { perfect, estimated };
enum class CodingMode { none, ldpc };

struct ChannelSpec {
    std::string profile = "eva";  // "eva" or "custom"
    std::vector<std::pair<double, double>> custom_taps;  // (delay ns, power dB)
    double speed_kmh = 120.0;
    DiscretizeMode discretize = DiscretizeMode::round_delay;
    bool doppler_symmetric = false;  // default U(0, nu_max) per the EVA setup

    DelayProfile delay_profile() const;
};

/// Full experiment description. A config plus its seed determines every
/// random draw, independent of scheduling and thread count.
struct SimConfig {
    Modem modem = Modem::otsm;
    DetectorKind detector = DetectorKind::gs_iterative;
    CsiMode csi = CsiMode::perfect;
    CodingMode coding = CodingMode::none;
    std::string label;  // defaults to "<modem>_<detector>"

    FrameParams frame;
    ChannelSpec channel;

    // detector
    int gs_iters = 15;
    double gs_delta = 0.0;  // 0 = auto: 1.0 for 4-QAM, 0.5 for 16/64-QAM
    DetectorInit gs_init = DetectorInit::zero;
    double gs_stop_tol = 1e-6;

    // channel estimation
    double beta_db = 3.0;
    InterpMode interp = InterpMode::linear;

    // coding
    std::string alist_path;
    TurboConfig turbo;

    // sweep
    std::vector<double> snr_db{15.0};
    long frames = 1000;
    uint64_t seed = 1;
    int threads = 0;               // 0 = hardware concurrency
    long stop_frame_errors = 0;    // 0 = run all frames
    std::string out_path;

    static SimConfig from_file(const std::string& path);
    /// Parse `key = value` text; unknown keys or bad values throw.
    void set(const std::string& key, const std::string& value);
    /// All validation problems at once; empty means runnable.
    std::vector<std::string> validate() const;
    /// Every key with its effective value, one per line (CSV header).
    std::string echo() const;

    double effective_gs_delta() const;
    std::string effective_label() const;
    DetectorConfig detector_config() const;
};

struct PointResult {
    double snr_db = 0.0;
    long bit_errors = 0;
    long bits = 0;
    long frame_errors = 0;
    long frames = 0;
    double sum_det_iters = 0.0;
    double sum_turbo_iters = 0.0;
    double seconds = 0.0;
    uint64_t channel_hash = 0;

    double ber() const { return bits > 0 ? static_cast<double>(bit_errors) / bits : 0.0; }
    double fer() const { return frames > 0 ? static_cast<double>(frame_errors) / frames : 0.0; }
    double mean_det_iters() const { return frames > 0 ? sum_det_iters / frames : 0.0; }
    double mean_turbo_iters() const { return frames > 0 ? sum_turbo_iters / frames : 0.0; }
};

/// Per-frame outcome; exposed so tests can bootstrap over frames.
struct TrialOutcome {
    long bit_errors = 0;
    long bits = 0;
    bool frame_error = false;
    int det_iters = 0;
    int turbo_iters = 0;
    uint64_t channel_hash = 0;
};

TrialOutcome run_trial(const SimConfig& cfg, const QamConstellation& constellation,
                       const LdpcCode* code, double snr_db, int snr_index, long trial);

std::vector<PointResult> run(const SimConfig& cfg);

/// Paired multi-scheme run. All configs must share frame parameters,
/// channel spec, sweep and seed so channel draws pair up; a channel-hash
/// mismatch throws. Returns one result list per config.
std::vector<std::vector<PointResult>> compare(const std::vector<SimConfig>& cfgs);

std::string results_csv(const SimConfig& cfg, const std::vector<PointResult>& results);
std::string compare_csv(const std::vector<SimConfig>& cfgs,
                        const std::vector<std::vector<PointResult>>& results);

}  // namespace otsm
