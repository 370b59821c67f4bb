#include "otsm/frame.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace otsm {

namespace {
bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }
}

void FrameParams::validate() const {
    std::ostringstream err;
    if (!is_pow2(n_blocks)) err << "N (" << n_blocks << ") must be a power of two; ";
    if (m_slots < 2) err << "M (" << m_slots << ") must be >= 2; ";
    if (delta_f_hz <= 0) err << "delta_f must be positive; ";
    if (carrier_hz <= 0) err << "carrier frequency must be positive; ";
    if (l_max < 0) err << "l_max must be >= 0; ";
    if (l_zp < 2 * l_max + 1) err << "l_zp (" << l_zp << ") must be >= 2*l_max+1 = " << 2 * l_max + 1 << "; ";
    if (l_zp >= m_slots) err << "l_zp must leave at least one data row; ";
    if (pilot_seq < 0 || pilot_seq >= n_blocks) err << "pilot sequency index out of [0,N); ";
    if (qam_order != 4 && qam_order != 16 && qam_order != 64) err << "qam_order must be 4, 16 or 64; ";
    std::string msg = err.str();
    if (!msg.empty()) throw std::invalid_argument("FrameParams: " + msg);
}

std::vector<std::pair<int, int>> data_positions(const FrameParams& p) {
    std::vector<std::pair<int, int>> pos;
    pos.reserve(p.data_symbol_count());
    for (int m = 0; m < p.mprime(); ++m)
        for (int n = 0; n < p.n_blocks; ++n) pos.emplace_back(m, n);
    return pos;
}

DelaySequencyGrid build_grid(const FrameParams& p, const Eigen::VectorXcd& data,
                             double pilot_amplitude) {
    p.validate();
    const int want = p.data_symbol_count();
    if (data.size() != want) {
        std::ostringstream err;
        err << "build_grid: expected " << want << " data symbols (N*M' = " << p.n_blocks << "*"
            << p.mprime() << "), got " << data.size();
        throw std::invalid_argument(err.str());
    }
    DelaySequencyGrid x = DelaySequencyGrid::Zero(p.m_slots, p.n_blocks);
    int idx = 0;
    for (int m = 0; m < p.mprime(); ++m)
        for (int n = 0; n < p.n_blocks; ++n) x(m, n) = data(idx++);
    x(p.pilot_delay(), p.pilot_seq) = cx(pilot_amplitude, 0.0);
    return x;
}

Eigen::VectorXcd extract_data(const FrameParams& p, const DelaySequencyGrid& x) {
    if (x.rows() != p.m_slots || x.cols() != p.n_blocks)
        throw std::invalid_argument("extract_data: grid dimensions mismatch");
    Eigen::VectorXcd data(p.data_symbol_count());
    int idx = 0;
    for (int m = 0; m < p.mprime(); ++m)
        for (int n = 0; n < p.n_blocks; ++n) data(idx++) = x(m, n);
    return data;
}

QamConstellation::QamConstellation(int order) : order_(order) {
    if (order != 4 && order != 16 && order != 64)
        throw std::invalid_argument("QamConstellation: order must be 4, 16 or 64");
    bits_ = 0;
    while ((1 << bits_) < order) ++bits_;
    const int axis_bits = bits_ / 2;
    const int levels = 1 << axis_bits;
    // per-axis mean square of {±1, ±3, ...} is (K^2-1)/3
    const double axis_ms = (static_cast<double>(levels) * levels - 1.0) / 3.0;
    const double scale = 1.0 / std::sqrt(2.0 * axis_ms);
    auto gray_decode = [](int g) {
        int b = 0;
        for (; g; g >>= 1) b ^= g;
        return b;
    };
    points_.resize(order);
    for (int label = 0; label < order; ++label) {
        int gi = label >> axis_bits;
        int gq = label & (levels - 1);
        double ai = (levels - 1) - 2.0 * gray_decode(gi);
        double aq = (levels - 1) - 2.0 * gray_decode(gq);
        points_[label] = cx(ai * scale, aq * scale);
    }
}

Eigen::VectorXcd QamConstellation::map(const std::vector<uint8_t>& bits) const {
    if (bits.size() % bits_ != 0)
        throw std::invalid_argument("qam_map: bit count not divisible by bits per symbol");
    const int nsym = static_cast<int>(bits.size()) / bits_;
    Eigen::VectorXcd out(nsym);
    for (int s = 0; s < nsym; ++s) {
        int label = 0;
        for (int b = 0; b < bits_; ++b) label = (label << 1) | (bits[s * bits_ + b] & 1);
        out(s) = points_[label];
    }
    return out;
}

std::vector<uint8_t> QamConstellation::demap_hard(const Eigen::VectorXcd& symbols) const {
    std::vector<uint8_t> bits(symbols.size() * bits_);
    for (int s = 0; s < symbols.size(); ++s) {
        int label = nearest_index(symbols(s));
        for (int b = 0; b < bits_; ++b)
            bits[s * bits_ + b] = static_cast<uint8_t>((label >> (bits_ - 1 - b)) & 1);
    }
    return bits;
}

int QamConstellation::nearest_index(cx y) const {
    int best = 0;
    double best_d = std::norm(y - points_[0]);
    for (int i = 1; i < order_; ++i) {
        double d = std::norm(y - points_[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

}  // namespace otsm
