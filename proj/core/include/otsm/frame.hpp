#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "otsm/transforms.hpp"

namespace otsm {

/// Grid and frame constants. N blocks of M samples; the last l_zp delay
/// rows are reserved for zero padding, with the pilot embedded at row
/// m_p = M - l_max - 1, sequency column n_p.
struct FrameParams {
    int n_blocks = 64;         // N, power of two
    int m_slots = 64;          // M
    double delta_f_hz = 15e3;  // subcarrier spacing
    double carrier_hz = 4e9;
    int l_max = 3;             // maximum discrete delay tap
    int l_zp = 7;              // ZP rows, >= 2*l_max + 1
    int pilot_seq = 0;         // n_p
    int qam_order = 4;

    int pilot_delay() const { return m_slots - l_max - 1; }  // m_p
    int cp_len() const { return l_max + 1; }
    int mprime() const { return m_slots - l_zp; }  // M', data rows
    long frame_len() const { return static_cast<long>(n_blocks) * m_slots; }
    int data_symbol_count() const { return n_blocks * mprime(); }
    double symbol_time() const { return 1.0 / delta_f_hz; }            // T
    double frame_duration() const { return n_blocks * symbol_time(); }  // T_f = N*T
    double bandwidth_hz() const { return m_slots * delta_f_hz; }        // B = M*df
    double sample_rate_hz() const { return bandwidth_hz(); }

    /// Throws invalid_argument listing every violated constraint.
    void validate() const;
};

/// M x N complex delay-sequency matrix X; row = delay index m,
/// column = sequency index n.
using DelaySequencyGrid = Eigen::MatrixXcd;

/// Data slots in fill order (row-major ascending over the data rows).
std::vector<std::pair<int, int>> data_positions(const FrameParams& p);

/// Place data symbols and the pilot. Data must have exactly
/// data_symbol_count() entries; ZP rows stay zero except for the pilot.
DelaySequencyGrid build_grid(const FrameParams& p, const Eigen::VectorXcd& data,
                             double pilot_amplitude);

/// Inverse of build_grid on the data slots.
Eigen::VectorXcd extract_data(const FrameParams& p, const DelaySequencyGrid& x);

/// Square Gray-labeled QAM with unit average energy. The point index is
/// the integer value of its bit label, MSB first; the first half of a
/// label selects the I level, the second half the Q level. Per axis,
/// label g picks amplitude (K-1) - 2*gray_decode(g) with K levels, so
/// 4-QAM maps bits 00 to (1+1j)/sqrt(2).
class QamConstellation {
public:
    explicit QamConstellation(int order);

    int order() const { return order_; }
    int bits_per_symbol() const { return bits_; }
    const std::vector<cx>& points() const { return points_; }
    cx point(int index) const { return points_.at(index); }

    Eigen::VectorXcd map(const std::vector<uint8_t>& bits) const;
    std::vector<uint8_t> demap_hard(const Eigen::VectorXcd& symbols) const;

    /// Nearest point in Euclidean distance; ties go to the smallest index.
    int nearest_index(cx y) const;
    cx nearest(cx y) const { return points_[nearest_index(y)]; }

private:
    int order_;
    int bits_;
    std::vector<cx> points_;
};

}  // namespace otsm
