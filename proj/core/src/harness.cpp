#include "otsm/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "otsm/rng.hpp"

namespace otsm {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& key) {
    if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
    size_t pos = 0;
    double d;
    try {
        d = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': cannot parse number '" + v + "'");
    }
    if (pos != v.size())
        throw std::invalid_argument("config key '" + key + "': trailing junk in '" + v + "'");
    return d;
}

long parse_long(const std::string& v, const std::string& key) {
    size_t pos = 0;
    long d;
    try {
        d = std::stol(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': cannot parse integer '" + v + "'");
    }
    if (pos != v.size())
        throw std::invalid_argument("config key '" + key + "': trailing junk in '" + v + "'");
    return d;
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "0" || v == "false" || v == "no") return false;
    if (v == "1" || v == "true" || v == "yes") return true;
    throw std::invalid_argument("config key '" + key + "': expected boolean, got '" + v + "'");
}

std::vector<double> parse_double_list(const std::string& v, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(item, key));
    }
    return out;
}

}  // namespace

DelayProfile ChannelSpec::delay_profile() const {
    if (profile == "eva") return eva_profile();
    if (profile == "custom") {
        DelayProfile p;
        p.name = "custom";
        p.taps = custom_taps;
        return p;
    }
    throw std::invalid_argument("unknown channel profile '" + profile + "'");
}

double SimConfig::effective_gs_delta() const {
    if (gs_delta > 0.0) return gs_delta;
    return frame.qam_order == 4 ? 1.0 : 0.5;
}

std::string SimConfig::effective_label() const {
    if (!label.empty()) return label;
    std::string det = detector == DetectorKind::gs_iterative ? "gs" : "single_tap";
    return to_string(modem) + "_" + det;
}

DetectorConfig SimConfig::detector_config() const {
    DetectorConfig d;
    d.max_iters = gs_iters;
    d.relaxation = effective_gs_delta();
    d.init = gs_init;
    d.stop_tol = gs_stop_tol;
    return d;
}

void SimConfig::set(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (key == "modem") {
        modem = modem_from_string(v);
    } else if (key == "detector") {
        if (v == "gs" || v == "gs_iterative") detector = DetectorKind::gs_iterative;
        else if (v == "single_tap") detector = DetectorKind::single_tap;
        else throw std::invalid_argument("detector must be 'gs' or 'single_tap', got '" + v + "'");
    } else if (key == "csi") {
        if (v == "perfect") csi = CsiMode::perfect;
        else if (v == "estimated") csi = CsiMode::estimated;
        else throw std::invalid_argument("csi must be 'perfect' or 'estimated', got '" + v + "'");
    } else if (key == "coding") {
        if (v == "none") coding = CodingMode::none;
        else if (v == "ldpc") coding = CodingMode::ldpc;
        else throw std::invalid_argument("coding must be 'none' or 'ldpc', got '" + v + "'");
    } else if (key == "label") {
        label = v;
    } else if (key == "n") {
        frame.n_blocks = static_cast<int>(parse_long(v, key));
    } else if (key == "m") {
        frame.m_slots = static_cast<int>(parse_long(v, key));
    } else if (key == "delta_f_hz") {
        frame.delta_f_hz = parse_double(v, key);
    } else if (key == "carrier_hz") {
        frame.carrier_hz = parse_double(v, key);
    } else if (key == "l_max") {
        frame.l_max = static_cast<int>(parse_long(v, key));
    } else if (key == "l_zp") {
        frame.l_zp = static_cast<int>(parse_long(v, key));
    } else if (key == "pilot_seq") {
        frame.pilot_seq = static_cast<int>(parse_long(v, key));
    } else if (key == "qam") {
        frame.qam_order = static_cast<int>(parse_long(v, key));
    } else if (key == "channel_profile") {
        if (v != "eva" && v != "custom")
            throw std::invalid_argument("channel_profile must be 'eva' or 'custom'");
        channel.profile = v;
    } else if (key == "custom_paths") {
        channel.custom_taps.clear();
        std::stringstream ss(v);
        std::string pair;
        while (std::getline(ss, pair, ',')) {
            pair = trim(pair);
            if (pair.empty()) continue;
            size_t colon = pair.find(':');
            if (colon == std::string::npos)
                throw std::invalid_argument("custom_paths entries must be delay_ns:power_db");
            channel.custom_taps.emplace_back(parse_double(trim(pair.substr(0, colon)), key),
                                             parse_double(trim(pair.substr(colon + 1)), key));
        }
    } else if (key == "speed_kmh") {
        channel.speed_kmh = parse_double(v, key);
    } else if (key == "discretize") {
        if (v == "round" || v == "round_delay") channel.discretize = DiscretizeMode::round_delay;
        else if (v == "sinc") channel.discretize = DiscretizeMode::sinc;
        else throw std::invalid_argument("discretize must be 'round' or 'sinc'");
    } else if (key == "doppler_symmetric") {
        channel.doppler_symmetric = parse_bool(v, key);
    } else if (key == "gs_iters") {
        gs_iters = static_cast<int>(parse_long(v, key));
    } else if (key == "gs_delta") {
        gs_delta = (v == "auto") ? 0.0 : parse_double(v, key);
    } else if (key == "gs_init") {
        if (v == "zero") gs_init = DetectorInit::zero;
        else if (v == "mmse") gs_init = DetectorInit::mmse_single_tap;
        else throw std::invalid_argument("gs_init must be 'zero' or 'mmse'");
    } else if (key == "gs_stop_tol") {
        gs_stop_tol = parse_double(v, key);
    } else if (key == "beta_db") {
        beta_db = parse_double(v, key);
    } else if (key == "interp") {
        if (v == "linear") interp = InterpMode::linear;
        else if (v == "spline") interp = InterpMode::spline;
        else throw std::invalid_argument("interp must be 'linear' or 'spline'");
    } else if (key == "alist") {
        alist_path = v;
    } else if (key == "turbo_iters") {
        turbo.max_turbo_iters = static_cast<int>(parse_long(v, key));
    } else if (key == "det_iters_per_turbo") {
        turbo.detector_iters_per_turbo = static_cast<int>(parse_long(v, key));
    } else if (key == "dec_iters") {
        turbo.decoder_iters_per_turbo = static_cast<int>(parse_long(v, key));
    } else if (key == "snr_db") {
        snr_db = parse_double_list(v, key);
    } else if (key == "frames") {
        frames = parse_long(v, key);
    } else if (key == "seed") {
        seed = static_cast<uint64_t>(std::stoull(v));
    } else if (key == "threads") {
        threads = static_cast<int>(parse_long(v, key));
    } else if (key == "stop_frame_errors") {
        stop_frame_errors = parse_long(v, key);
    } else if (key == "out") {
        out_path = v;
    } else {
        throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

SimConfig SimConfig::from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    SimConfig cfg;
    std::string line;
    int no = 0;
    std::vector<std::string> errors;
    while (std::getline(f, line)) {
        ++no;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(no) + ": expected key = value");
            continue;
        }
        try {
            cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const std::exception& e) {
            errors.push_back("line " + std::to_string(no) + ": " + e.what());
        }
    }
    if (!errors.empty()) {
        std::string msg = "config errors in " + path + ":";
        for (const auto& e : errors) msg += "\n  " + e;
        throw std::invalid_argument(msg);
    }
    return cfg;
}

std::vector<std::string> SimConfig::validate() const {
    std::vector<std::string> errors;
    try {
        frame.validate();
    } catch (const std::exception& e) {
        errors.push_back(e.what());
    }
    try {
        detector_config().validate();
    } catch (const std::exception& e) {
        errors.push_back(e.what());
    }
    if (snr_db.empty()) errors.push_back("snr_db sweep is empty");
    if (frames < 1) errors.push_back("frames must be >= 1");
    if (threads < 0) errors.push_back("threads must be >= 0");
    if (stop_frame_errors < 0) errors.push_back("stop_frame_errors must be >= 0");
    if (channel.speed_kmh <= 0) errors.push_back("speed_kmh must be positive");
    if (channel.profile != "eva" && channel.profile != "custom")
        errors.push_back("channel_profile must be 'eva' or 'custom'");
    if (channel.profile == "custom" && channel.custom_taps.empty())
        errors.push_back("custom channel profile needs custom_paths");

    if (modem == Modem::ofdm && detector == DetectorKind::gs_iterative)
        errors.push_back("the gs detector operates on ZP blocks; OFDM supports only single_tap");
    if (csi == CsiMode::estimated && (modem == Modem::ofdm || modem == Modem::sc))
        errors.push_back("estimated CSI needs the spread pilot of otsm/otfs (sc/ofdm pilots have "
                         "zero delay-time samples)");

    // delay spread must fit l_max at this sampling rate
    try {
        DelayProfile prof = channel.delay_profile();
        double max_delay = 0.0;
        for (const auto& [dns, pdb] : prof.taps)
            max_delay = std::max(max_delay, dns * 1e-9 * frame.sample_rate_hz());
        if (std::lround(max_delay) > frame.l_max) {
            std::ostringstream os;
            os << "channel delay spread needs l_max >= " << std::lround(max_delay) << " (have "
               << frame.l_max << ")";
            errors.push_back(os.str());
        }
    } catch (const std::exception& e) {
        errors.push_back(e.what());
    }

    if (coding == CodingMode::ldpc) {
        if (alist_path.empty()) {
            errors.push_back("coding=ldpc requires an alist path");
        } else {
            try {
                LdpcCode code(ParityCheckMatrix::load_alist_file(alist_path));
                long cap_syms = modem == Modem::ofdm
                                    ? static_cast<long>(frame.m_slots) * frame.n_blocks
                                    : frame.data_symbol_count();
                QamConstellation c(frame.qam_order);
                if (cap_syms * c.bits_per_symbol() < code.n())
                    errors.push_back("frame capacity is smaller than one LDPC codeword");
            } catch (const std::exception& e) {
                errors.push_back(e.what());
            }
        }
        try {
            turbo.validate();
        } catch (const std::exception& e) {
            errors.push_back(e.what());
        }
    }
    return errors;
}

std::string SimConfig::echo() const {
    std::ostringstream os;
    os.precision(12);
    os << "modem=" << to_string(modem) << "\n";
    os << "detector=" << (detector == DetectorKind::gs_iterative ? "gs" : "single_tap") << "\n";
    os << "csi=" << (csi == CsiMode::perfect ? "perfect" : "estimated") << "\n";
    os << "coding=" << (coding == CodingMode::none ? "none" : "ldpc") << "\n";
    os << "label=" << effective_label() << "\n";
    os << "n=" << frame.n_blocks << "\n";
    os << "m=" << frame.m_slots << "\n";
    os << "delta_f_hz=" << frame.delta_f_hz << "\n";
    os << "carrier_hz=" << frame.carrier_hz << "\n";
    os << "l_max=" << frame.l_max << "\n";
    os << "l_zp=" << frame.l_zp << "\n";
    os << "pilot_seq=" << frame.pilot_seq << "\n";
    os << "qam=" << frame.qam_order << "\n";
    os << "channel_profile=" << channel.profile << "\n";
    if (!channel.custom_taps.empty()) {
        os << "custom_paths=";
        for (size_t i = 0; i < channel.custom_taps.size(); ++i)
            os << (i ? "," : "") << channel.custom_taps[i].first << ":"
               << channel.custom_taps[i].second;
        os << "\n";
    }
    os << "speed_kmh=" << channel.speed_kmh << "\n";
    os << "discretize=" << (channel.discretize == DiscretizeMode::round_delay ? "round" : "sinc")
       << "\n";
    os << "doppler_symmetric=" << (channel.doppler_symmetric ? 1 : 0) << "\n";
    os << "gs_iters=" << gs_iters << "\n";
    os << "gs_delta=" << effective_gs_delta() << "\n";
    os << "gs_init=" << (gs_init == DetectorInit::zero ? "zero" : "mmse") << "\n";
    os << "gs_stop_tol=" << gs_stop_tol << "\n";
    os << "beta_db=" << beta_db << "\n";
    os << "interp=" << (interp == InterpMode::linear ? "linear" : "spline") << "\n";
    os << "alist=" << alist_path << "\n";
    os << "turbo_iters=" << turbo.max_turbo_iters << "\n";
    os << "det_iters_per_turbo=" << turbo.detector_iters_per_turbo << "\n";
    os << "dec_iters=" << turbo.decoder_iters_per_turbo << "\n";
    os << "snr_db=";
    for (size_t i = 0; i < snr_db.size(); ++i) os << (i ? "," : "") << snr_db[i];
    os << "\n";
    os << "frames=" << frames << "\n";
    os << "seed=" << seed << "\n";
    os << "threads=" << threads << "\n";
    os << "stop_frame_errors=" << stop_frame_errors << "\n";
    return os.str();
}

namespace {

std::vector<uint8_t> random_bits(long count, uint64_t seed) {
    std::vector<uint8_t> bits(count);
    auto rng = make_rng(seed);
    std::uniform_int_distribution<int> bit(0, 1);
    for (long i = 0; i < count; ++i) bits[i] = static_cast<uint8_t>(bit(rng));
    return bits;
}

long count_bit_errors(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b) {
    long errs = 0;
    for (size_t i = 0; i < a.size(); ++i) errs += (a[i] ^ b[i]) & 1;
    return errs;
}

}  // namespace

TrialOutcome run_trial(const SimConfig& cfg, const QamConstellation& constellation,
                       const LdpcCode* code, double snr_db, int snr_index, long trial) {
    const FrameParams& p = cfg.frame;
    const double sigma2 = std::isinf(snr_db) ? 0.0 : std::pow(10.0, -snr_db / 10.0);  // Es = 1

    const uint64_t tag = (static_cast<uint64_t>(snr_index) << 44) ^ static_cast<uint64_t>(trial);
    const uint64_t base = derive_seed(cfg.seed, tag);
    const uint64_t channel_seed = derive_seed(base, 0);
    const uint64_t noise_seed = derive_seed(base, 1);
    const uint64_t data_seed = derive_seed(base, 2);
    const uint64_t interleave_seed = derive_seed(base, 3);

    PathSet paths = sample_paths(cfg.channel.delay_profile(), p, cfg.channel.speed_kmh,
                                 channel_seed, cfg.channel.doppler_symmetric);
    DelayTimeTaps taps(paths, p, cfg.channel.discretize);

    const double pilot_amp =
        cfg.csi == CsiMode::estimated ? pilot_power(p, db_to_linear(cfg.beta_db)).amplitude() : 0.0;

    const int q_bits = constellation.bits_per_symbol();
    const long cap_syms = cfg.modem == Modem::ofdm
                              ? static_cast<long>(p.m_slots) * p.n_blocks
                              : p.data_symbol_count();
    const long cap_bits = cap_syms * q_bits;

    std::vector<uint8_t> tx_bits;
    std::vector<uint8_t> tx_info;
    CodedFrameLayout layout;
    if (cfg.coding == CodingMode::ldpc) {
        layout = make_coded_layout(static_cast<int>(cap_bits), *code, interleave_seed);
        tx_info = random_bits(static_cast<long>(layout.n_codewords) * code->k(), data_seed);
        std::vector<uint8_t> coded(layout.coded_bits);
        for (int cw = 0; cw < layout.n_codewords; ++cw) {
            std::vector<uint8_t> info(tx_info.begin() + static_cast<long>(cw) * code->k(),
                                      tx_info.begin() + static_cast<long>(cw + 1) * code->k());
            auto c = code->encode(info);
            std::copy(c.begin(), c.end(), coded.begin() + static_cast<long>(cw) * code->n());
        }
        tx_bits = layout.assemble(coded);
    } else {
        tx_bits = random_bits(cap_bits, data_seed);
    }
    Eigen::VectorXcd syms = constellation.map(tx_bits);

    TimeFrame tf;
    if (cfg.modem == Modem::ofdm) {
        Eigen::MatrixXcd grid(p.m_slots, p.n_blocks);
        for (int m = 0; m < p.m_slots; ++m)
            for (int n = 0; n < p.n_blocks; ++n) grid(m, n) = syms(static_cast<long>(m) * p.n_blocks + n);
        tf = ofdm_modulate(p, grid);
    } else {
        DelaySequencyGrid grid = build_grid(p, syms, pilot_amp);
        switch (cfg.modem) {
            case Modem::otsm: tf = otsm_modulate(p, grid); break;
            case Modem::otfs: tf = otfs_modulate(p, grid); break;
            case Modem::sc: tf = sc_modulate(p, grid); break;
            default: break;
        }
    }

    ReceivedFrame rx = apply_channel(taps, tf, sigma2, noise_seed);

    TrialOutcome out;
    out.channel_hash = paths.hash();
    out.bits = cfg.coding == CodingMode::ldpc
                   ? static_cast<long>(layout.n_codewords) * code->k()
                   : cap_bits;

    if (cfg.modem == Modem::ofdm) {
        Eigen::MatrixXcd y = ofdm_demodulate(p, rx);
        Eigen::MatrixXcd h = ofdm_subcarrier_gains(taps, p);
        Eigen::VectorXcd yv(cap_syms), hv(cap_syms);
        for (int m = 0; m < p.m_slots; ++m)
            for (int n = 0; n < p.n_blocks; ++n) {
                yv(static_cast<long>(m) * p.n_blocks + n) = y(m, n);
                hv(static_cast<long>(m) * p.n_blocks + n) = h(m, n);
            }
        out.det_iters = 1;
        if (cfg.coding == CodingMode::none) {
            Eigen::VectorXcd xh = single_tap_mmse(yv, hv, sigma2);
            auto rx_bits = constellation.demap_hard(xh);
            out.bit_errors = count_bit_errors(tx_bits, rx_bits);
        } else {
            // bit-interleaved coded OFDM: a single demap + decode pass
            auto llrs = soft_demap(yv, hv, std::max(sigma2, 1e-12), constellation);
            auto coded_llrs = layout.gather_llrs(llrs);
            std::vector<uint8_t> info_hat;
            info_hat.reserve(tx_info.size());
            for (int cw = 0; cw < layout.n_codewords; ++cw) {
                std::vector<double> llr(coded_llrs.begin() + static_cast<long>(cw) * code->n(),
                                        coded_llrs.begin() + static_cast<long>(cw + 1) * code->n());
                auto dec = code->decode(llr, cfg.turbo.decoder_iters_per_turbo);
                auto info = code->extract_info(dec.bits);
                info_hat.insert(info_hat.end(), info.begin(), info.end());
            }
            out.turbo_iters = 1;
            out.bit_errors = count_bit_errors(tx_info, info_hat);
        }
        out.frame_error = out.bit_errors > 0;
        return out;
    }

    // ZP-grid modems: matched filter on true or estimated taps
    Eigen::MatrixXcd tap_matrix;
    BlockChannel blocks;
    if (cfg.csi == CsiMode::estimated) {
        PilotConfig pc = pilot_power(p, db_to_linear(cfg.beta_db));
        TapEstimate est = estimate_taps(p, rx, pc, cfg.modem);
        interpolate(est, p, cfg.interp);
        tap_matrix = std::move(est.full);
        blocks = build_block_channel(tap_matrix, p);
    } else {
        blocks = build_block_channel(taps, p);
    }

    if (cfg.coding == CodingMode::none) {
        DetectionResult dr;
        if (cfg.detector == DetectorKind::gs_iterative) {
            MatchedBlocks mb = matched_filter(blocks, rx);
            dr = gs_detect(mb, cfg.detector_config(), p, constellation, cfg.modem, pilot_amp,
                           sigma2);
        } else {
            if (cfg.csi == CsiMode::perfect) tap_matrix = taps.materialize(0, p.frame_len());
            dr = fde_single_tap_detect(p, rx, tap_matrix, sigma2, constellation, cfg.modem,
                                       pilot_amp);
        }
        auto rx_bits = constellation.demap_hard(extract_data(p, dr.grid_hard));
        out.bit_errors = count_bit_errors(tx_bits, rx_bits);
        out.det_iters = dr.iterations;
    } else {
        MatchedBlocks mb = matched_filter(blocks, rx);
        if (cfg.detector == DetectorKind::gs_iterative) {
            TurboResult tr = turbo_decode(mb, p, constellation, cfg.modem, *code, layout,
                                          cfg.turbo, cfg.detector_config(), pilot_amp, sigma2);
            out.bit_errors = count_bit_errors(tx_info, tr.info_bits);
            out.det_iters = tr.detector_iterations;
            out.turbo_iters = tr.turbo_iterations;
        } else {
            if (cfg.csi == CsiMode::perfect) tap_matrix = taps.materialize(0, p.frame_len());
            DetectionResult dr = fde_single_tap_detect(p, rx, tap_matrix, sigma2, constellation,
                                                       cfg.modem, pilot_amp);
            Eigen::VectorXcd data = extract_data(p, dr.grid_soft);
            Eigen::VectorXcd gains = Eigen::VectorXcd::Ones(data.size());
            auto llrs = soft_demap(data, gains, std::max(sigma2, 1e-12), constellation);
            auto coded_llrs = layout.gather_llrs(llrs);
            std::vector<uint8_t> info_hat;
            for (int cw = 0; cw < layout.n_codewords; ++cw) {
                std::vector<double> llr(coded_llrs.begin() + static_cast<long>(cw) * code->n(),
                                        coded_llrs.begin() + static_cast<long>(cw + 1) * code->n());
                auto dec = code->decode(llr, cfg.turbo.decoder_iters_per_turbo);
                auto info = code->extract_info(dec.bits);
                info_hat.insert(info_hat.end(), info.begin(), info.end());
            }
            out.bit_errors = count_bit_errors(tx_info, info_hat);
            out.det_iters = dr.iterations;
            out.turbo_iters = 1;
        }
    }
    out.frame_error = out.bit_errors > 0;
    return out;
}

namespace {

void parallel_for(long begin, long end, int threads, const std::function<void(long)>& fn) {
    const long count = end - begin;
    if (threads <= 1 || count <= 1) {
        for (long i = begin; i < end; ++i) fn(i);
        return;
    }
    const int t = static_cast<int>(std::min<long>(threads, count));
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (int w = 0; w < t; ++w)
        pool.emplace_back([&, w]() {
            for (long i = begin + w; i < end; i += t) fn(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace

std::vector<PointResult> run(const SimConfig& cfg) {
    auto errors = cfg.validate();
    if (!errors.empty()) {
        std::string msg = "invalid config:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw std::invalid_argument(msg);
    }

    QamConstellation constellation(cfg.frame.qam_order);
    std::optional<LdpcCode> code;
    if (cfg.coding == CodingMode::ldpc)
        code.emplace(ParityCheckMatrix::load_alist_file(cfg.alist_path));

    // under-spread / sub-sampling advisories
    {
        DelayProfile prof = cfg.channel.delay_profile();
        double tau_max = 0.0;
        for (const auto& [dns, pdb] : prof.taps) tau_max = std::max(tau_max, dns * 1e-9);
        double nu_max = cfg.channel.speed_kmh / 3.6 * cfg.frame.carrier_hz / 299792458.0;
        if (tau_max * nu_max > 0.1)
            std::cerr << "warning: channel is not under-spread (tau_max*nu_max = "
                      << tau_max * nu_max << ")\n";
        if (cfg.csi == CsiMode::estimated && nu_max >= cfg.frame.delta_f_hz / 2.0)
            std::cerr << "warning: nu_max >= delta_f/2, sub-sampled taps cannot be reconstructed\n";
    }

    int threads = cfg.threads > 0 ? cfg.threads
                                  : static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;

    std::vector<PointResult> results;
    results.reserve(cfg.snr_db.size());
    for (size_t si = 0; si < cfg.snr_db.size(); ++si) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<TrialOutcome> outs(cfg.frames);
        long effective = cfg.frames;
        constexpr long kChunk = 256;  // fixed so early stopping is scheduling-independent
        for (long start = 0; start < cfg.frames && effective == cfg.frames; start += kChunk) {
            const long end = std::min(start + kChunk, cfg.frames);
            parallel_for(start, end, threads, [&](long i) {
                outs[i] = run_trial(cfg, constellation, code ? &*code : nullptr, cfg.snr_db[si],
                                    static_cast<int>(si), i);
            });
            if (cfg.stop_frame_errors > 0) {
                long errs = 0;
                for (long i = 0; i < end; ++i) {
                    errs += outs[i].frame_error ? 1 : 0;
                    if (errs >= cfg.stop_frame_errors) {
                        effective = i + 1;
                        break;
                    }
                }
            }
        }
        PointResult pr;
        pr.snr_db = cfg.snr_db[si];
        pr.frames = effective;
        for (long i = 0; i < effective; ++i) {
            pr.bit_errors += outs[i].bit_errors;
            pr.bits += outs[i].bits;
            pr.frame_errors += outs[i].frame_error ? 1 : 0;
            pr.sum_det_iters += outs[i].det_iters;
            pr.sum_turbo_iters += outs[i].turbo_iters;
            pr.channel_hash ^= outs[i].channel_hash;
        }
        pr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        results.push_back(pr);
    }
    return results;
}

std::vector<std::vector<PointResult>> compare(const std::vector<SimConfig>& cfgs) {
    if (cfgs.size() < 2) throw std::invalid_argument("compare: need at least two configs");
    const SimConfig& ref = cfgs.front();
    for (const auto& c : cfgs) {
        const FrameParams &a = ref.frame, &b = c.frame;
        if (a.n_blocks != b.n_blocks || a.m_slots != b.m_slots || a.delta_f_hz != b.delta_f_hz ||
            a.carrier_hz != b.carrier_hz || a.l_max != b.l_max || a.l_zp != b.l_zp ||
            a.qam_order != b.qam_order)
            throw std::invalid_argument("compare: frame parameters must match across schemes");
        if (c.snr_db != ref.snr_db || c.frames != ref.frames || c.seed != ref.seed)
            throw std::invalid_argument("compare: sweep, frames and seed must match across schemes");
        if (c.channel.profile != ref.channel.profile ||
            c.channel.speed_kmh != ref.channel.speed_kmh ||
            c.channel.custom_taps != ref.channel.custom_taps)
            throw std::invalid_argument("compare: channel spec must match across schemes");
    }
    std::vector<std::vector<PointResult>> all;
    all.reserve(cfgs.size());
    for (const auto& c : cfgs) all.push_back(run(c));
    for (size_t si = 0; si < ref.snr_db.size(); ++si) {
        for (size_t c = 1; c < all.size(); ++c) {
            if (all[c][si].frames == all[0][si].frames &&
                all[c][si].channel_hash != all[0][si].channel_hash)
                throw std::runtime_error("compare: paired channel realizations diverged");
        }
    }
    return all;
}

namespace {
void append_point(std::ostringstream& os, const PointResult& r) {
    os << r.ber() << "," << r.fer() << "," << r.bit_errors << "," << r.bits << ","
       << r.frame_errors << "," << r.frames << "," << r.mean_det_iters() << ","
       << r.mean_turbo_iters() << "," << r.seconds;
}
}  // namespace

std::string results_csv(const SimConfig& cfg, const std::vector<PointResult>& results) {
    std::ostringstream os;
    os.precision(10);
    os << "# otsm-sim results\n";
    std::istringstream echo(cfg.echo());
    std::string line;
    while (std::getline(echo, line)) os << "# " << line << "\n";
    os << "snr_db,ber,fer,bit_errors,bits,frame_errors,frames,mean_det_iters,mean_turbo_iters,"
          "seconds\n";
    for (const auto& r : results) {
        os << r.snr_db << ",";
        append_point(os, r);
        os << "\n";
    }
    return os.str();
}

std::string compare_csv(const std::vector<SimConfig>& cfgs,
                        const std::vector<std::vector<PointResult>>& results) {
    std::ostringstream os;
    os.precision(10);
    os << "# otsm-sim comparison\n";
    for (size_t c = 0; c < cfgs.size(); ++c) {
        os << "# --- scheme " << cfgs[c].effective_label() << " ---\n";
        std::istringstream echo(cfgs[c].echo());
        std::string line;
        while (std::getline(echo, line)) os << "# " << line << "\n";
    }
    os << "snr_db";
    const char* cols[] = {"ber", "fer", "bit_errors", "bits", "frame_errors", "frames",
                          "mean_det_iters", "mean_turbo_iters", "seconds"};
    for (const auto& c : cfgs)
        for (const char* col : cols) os << "," << c.effective_label() << "_" << col;
    os << "\n";
    for (size_t si = 0; si < results[0].size(); ++si) {
        os << results[0][si].snr_db;
        for (size_t c = 0; c < results.size(); ++c) {
            os << ",";
            std::ostringstream tmp;
            tmp.precision(10);
            append_point(tmp, results[c][si]);
            os << tmp.str();
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace otsm
