#include "otsm/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <numbers>
#include <stdexcept>

#include "otsm/rng.hpp"

namespace otsm {

namespace {
constexpr double kSpeedOfLight = 299792458.0;

double sinc(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    return std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
}
}  // namespace

double PathSet::max_delay() const {
    double v = 0.0;
    for (const auto& p : paths) v = std::max(v, p.delay);
    return v;
}

double PathSet::max_abs_doppler() const {
    double v = 0.0;
    for (const auto& p : paths) v = std::max(v, std::abs(p.doppler));
    return v;
}

uint64_t PathSet::hash() const {
    uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](double d) {
        uint64_t bits;
        std::memcpy(&bits, &d, sizeof(bits));
        h ^= bits;
        h *= 0x100000001b3ULL;
    };
    for (const auto& p : paths) {
        mix(p.gain.real());
        mix(p.gain.imag());
        mix(p.delay);
        mix(p.doppler);
    }
    return h;
}

const DelayProfile& eva_profile() {
    static const DelayProfile profile{
        "EVA",
        {{0.0, 0.0},
         {30.0, -1.5},
         {150.0, -1.4},
         {310.0, -3.6},
         {370.0, -0.6},
         {710.0, -9.1},
         {1090.0, -7.0},
         {1730.0, -12.0},
         {2510.0, -16.9}}};
    return profile;
}

PathSet sample_paths(const DelayProfile& profile, const FrameParams& p, double speed_kmh,
                     uint64_t seed, bool symmetric_doppler) {
    if (speed_kmh <= 0) throw std::invalid_argument("sample_paths: speed must be positive");
    double total = 0.0;
    for (const auto& [delay_ns, pow_db] : profile.taps) total += std::pow(10.0, pow_db / 10.0);

    const double nu_max = speed_kmh / 3.6 * p.carrier_hz / kSpeedOfLight;
    const double kappa_max = nu_max * p.frame_duration();

    auto rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    PathSet ps;
    ps.paths.reserve(profile.taps.size());
    for (const auto& [delay_ns, pow_db] : profile.taps) {
        Path path;
        const double var = std::pow(10.0, pow_db / 10.0) / total;
        path.gain = std::sqrt(var / 2.0) * cx(gauss(rng), gauss(rng));
        path.delay = delay_ns * 1e-9 * p.sample_rate_hz();
        double u = uni(rng);
        path.doppler = symmetric_doppler ? (2.0 * u - 1.0) * kappa_max : u * kappa_max;
        ps.paths.push_back(path);
    }
    return ps;
}

DelayTimeTaps::DelayTimeTaps(const PathSet& paths, const FrameParams& p, DiscretizeMode mode)
    : l_max_(p.l_max), frame_len_(p.frame_len()) {
    comps_.resize(l_max_ + 1);
    const double step0 = 2.0 * std::numbers::pi / static_cast<double>(frame_len_);
    for (const auto& path : paths.paths) {
        if (path.delay < 0.0 || path.delay > static_cast<double>(l_max_) + 0.5)
            throw std::invalid_argument("DelayTimeTaps: path delay exceeds l_max");
        if (mode == DiscretizeMode::round_delay) {
            int l = static_cast<int>(std::lround(path.delay));
            if (l > l_max_) throw std::invalid_argument("DelayTimeTaps: rounded delay exceeds l_max");
            comps_[l].push_back({path.gain, step0 * path.doppler});
        } else {
            for (int l = 0; l <= l_max_; ++l) {
                cx amp = path.gain * sinc(l - path.delay);
                if (std::abs(amp) == 0.0) continue;
                comps_[l].push_back({amp, step0 * path.doppler});
            }
        }
    }
}

cx DelayTimeTaps::value(int l, long q) const {
    if (l < 0 || l > l_max_) throw std::out_of_range("DelayTimeTaps::value: tap index");
    cx acc(0.0, 0.0);
    for (const auto& c : comps_[l]) {
        double ang = c.phase_step * static_cast<double>(q - l);
        acc += c.amp * cx(std::cos(ang), std::sin(ang));
    }
    return acc;
}

Eigen::MatrixXcd DelayTimeTaps::materialize(long q0, long count) const {
    Eigen::MatrixXcd m(l_max_ + 1, count);
    for (int l = 0; l <= l_max_; ++l)
        for (long i = 0; i < count; ++i) m(l, i) = value(l, q0 + i);
    return m;
}

ReceivedFrame apply_channel(const DelayTimeTaps& taps, const TimeFrame& tx, double noise_var,
                            uint64_t noise_seed) {
    const long cp = tx.cp.size();
    const long total = cp + tx.body.size();
    const int lmax = taps.l_max();

    // stream sample j lives at body time q = j - cp
    auto tx_at = [&](long j) -> cx {
        if (j < 0 || j >= total) return cx(0.0, 0.0);
        return j < cp ? tx.cp(j) : tx.body(j - cp);
    };

    Eigen::VectorXcd out(total);
    for (long j = 0; j < total; ++j) {
        cx acc(0.0, 0.0);
        const long q = j - cp;
        for (int l = 0; l <= lmax; ++l) acc += taps.value(l, q) * tx_at(j - l);
        out(j) = acc;
    }

    if (noise_var > 0.0) {
        auto rng = make_rng(noise_seed);
        std::normal_distribution<double> gauss(0.0, std::sqrt(noise_var / 2.0));
        for (long j = 0; j < total; ++j) out(j) += cx(gauss(rng), gauss(rng));
    }

    ReceivedFrame rx;
    rx.cp = out.head(cp);
    rx.body = out.tail(total - cp);
    return rx;
}

Eigen::MatrixXcd BlockChannel::dense(int n) const {
    const auto& b = band.at(n);
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(m_slots, m_slots);
    for (int m = 0; m < m_slots; ++m)
        for (int l = 0; l <= std::min(l_max, m); ++l) g(m, m - l) = b(m, l);
    return g;
}

Eigen::VectorXcd BlockChannel::apply(const Eigen::VectorXcd& s) const {
    if (s.size() != static_cast<long>(n_blocks) * m_slots)
        throw std::invalid_argument("BlockChannel::apply: length mismatch");
    Eigen::VectorXcd r = Eigen::VectorXcd::Zero(s.size());
    for (int n = 0; n < n_blocks; ++n) {
        const auto& b = band[n];
        const long base = static_cast<long>(n) * m_slots;
        for (int m = 0; m < m_slots; ++m) {
            cx acc(0.0, 0.0);
            for (int l = 0; l <= std::min(l_max, m); ++l) acc += b(m, l) * s(base + m - l);
            r(base + m) = acc;
        }
    }
    return r;
}

namespace {
BlockChannel make_blocks(const FrameParams& p,
                         const std::function<cx(int l, long q)>& tap_at) {
    if (p.l_zp < p.l_max)
        throw std::invalid_argument("build_block_channel: ZP shorter than the delay spread");
    BlockChannel bc;
    bc.n_blocks = p.n_blocks;
    bc.m_slots = p.m_slots;
    bc.l_max = p.l_max;
    bc.band.reserve(p.n_blocks);
    for (int n = 0; n < p.n_blocks; ++n) {
        Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(p.m_slots, p.l_max + 1);
        for (int m = 0; m < p.m_slots; ++m)
            for (int l = 0; l <= std::min(p.l_max, m); ++l)
                b(m, l) = tap_at(l, m + static_cast<long>(n) * p.m_slots);
        bc.band.push_back(std::move(b));
    }
    return bc;
}
}  // namespace

BlockChannel build_block_channel(const DelayTimeTaps& taps, const FrameParams& p) {
    if (taps.l_max() != p.l_max || taps.frame_len() != p.frame_len())
        throw std::invalid_argument("build_block_channel: taps/frame mismatch");
    return make_blocks(p, [&](int l, long q) { return taps.value(l, q); });
}

BlockChannel build_block_channel(const Eigen::MatrixXcd& tap_matrix, const FrameParams& p) {
    if (tap_matrix.rows() != p.l_max + 1 || tap_matrix.cols() != p.frame_len())
        throw std::invalid_argument("build_block_channel: tap matrix dimensions mismatch");
    return make_blocks(p, [&](int l, long q) { return tap_matrix(l, q); });
}

Eigen::MatrixXcd build_dense_time_matrix(const DelayTimeTaps& taps, const FrameParams& p) {
    const long nm = p.frame_len();
    if (nm > 4096) throw std::invalid_argument("build_dense_time_matrix: NM > 4096 rejected");
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(nm, nm);
    for (long q = 0; q < nm; ++q)
        for (int l = 0; l <= p.l_max; ++l) g(q, ((q - l) % nm + nm) % nm) += taps.value(l, q);
    return g;
}

Eigen::MatrixXcd build_delay_sequency_matrix(const DelayTimeTaps& taps, const FrameParams& p) {
    const long nm = p.frame_len();
    if (nm > 4096) throw std::invalid_argument("build_delay_sequency_matrix: NM > 4096 rejected");
    Eigen::MatrixXcd g = build_dense_time_matrix(taps, p);
    const auto perm = perfect_shuffle(p.m_slots, p.n_blocks);
    Eigen::MatrixXd pd = perm.dense();
    Eigen::MatrixXcd inner = pd.transpose() * g * pd;
    // (I_M (x) W_N) is block diagonal; multiply per N-sized block.
    Eigen::MatrixXd w = walsh_matrix(p.n_blocks);
    Eigen::MatrixXcd h(nm, nm);
    for (int mb = 0; mb < p.m_slots; ++mb)
        h.middleRows(static_cast<long>(mb) * p.n_blocks, p.n_blocks) =
            w * inner.middleRows(static_cast<long>(mb) * p.n_blocks, p.n_blocks);
    for (int mb = 0; mb < p.m_slots; ++mb)
        h.middleCols(static_cast<long>(mb) * p.n_blocks, p.n_blocks) =
            h.middleCols(static_cast<long>(mb) * p.n_blocks, p.n_blocks) * w;
    return h;
}

namespace {
Eigen::VectorXcd tap_per_block(const DelayTimeTaps& taps, int m, int l, const FrameParams& p) {
    if (l < 0 || l > p.l_max) throw std::out_of_range("sequency_spread: tap index");
    if (m < 0 || m >= p.m_slots) throw std::out_of_range("sequency_spread: delay index");
    Eigen::VectorXcd gt(p.n_blocks);
    for (int n = 0; n < p.n_blocks; ++n) gt(n) = taps.value(l, m + static_cast<long>(n) * p.m_slots);
    return gt;
}
}  // namespace

SequencySpread sequency_spread(const DelayTimeTaps& taps, int m, int l, const FrameParams& p) {
    Eigen::VectorXcd gt = tap_per_block(taps, m, l, p);
    Eigen::MatrixXd w = walsh_matrix(p.n_blocks);
    SequencySpread s;
    s.U = w * gt.asDiagonal() * w;
    s.u = wht(gt);
    return s;
}

DopplerSpread doppler_spread(const DelayTimeTaps& taps, int m, int l, const FrameParams& p) {
    Eigen::VectorXcd gt = tap_per_block(taps, m, l, p);
    Eigen::MatrixXcd f = fourier_matrix(p.n_blocks);
    DopplerSpread d;
    d.V = f * gt.asDiagonal() * f.adjoint();
    d.nu = dft(gt);
    return d;
}

}  // namespace otsm
