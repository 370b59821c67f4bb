#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "otsm/detector.hpp"
#include "otsm/frame.hpp"
#include "otsm/modem.hpp"

namespace otsm {

/// Sparse binary parity check matrix in alist form.
struct ParityCheckMatrix {
    int n = 0;  // columns / codeword length
    int m = 0;  // rows / checks
    std::vector<std::vector<int>> col_rows;  // per column, sorted row indices
    std::vector<std::vector<int>> row_cols;  // per row, sorted column indices

    static ParityCheckMatrix parse_alist(const std::string& text);
    static ParityCheckMatrix load_alist_file(const std::string& path);
    std::string to_alist() const;

    bool check(const std::vector<uint8_t>& codeword) const;
};

/// Systematic encoder + normalized min-sum decoder on top of a parity
/// check matrix. Pivot columns are found by GF(2) elimination at load;
/// the remaining (free) columns carry the information bits.
class LdpcCode {
public:
    explicit LdpcCode(ParityCheckMatrix h);

    int n() const { return h_.n; }
    int k() const { return static_cast<int>(info_cols_.size()); }
    double rate() const { return static_cast<double>(k()) / n(); }
    const ParityCheckMatrix& parity() const { return h_; }
    const std::vector<int>& info_positions() const { return info_cols_; }

    std::vector<uint8_t> encode(const std::vector<uint8_t>& info) const;

    struct DecodeResult {
        std::vector<uint8_t> bits;  // full codeword decision
        bool parity_ok = false;
        int iterations = 0;
    };
    /// llr(i) > 0 means bit i is more likely 0.
    DecodeResult decode(const std::vector<double>& llr, int max_iters = 25,
                        double norm_factor = 0.75) const;

    std::vector<uint8_t> extract_info(const std::vector<uint8_t>& codeword) const;

private:
    ParityCheckMatrix h_;
    std::vector<int> info_cols_;                 // free columns, ascending
    std::vector<int> pivot_cols_;                // pivot column of each reduced row
    std::vector<std::vector<int>> pivot_deps_;   // free columns XORed into each pivot
};

/// Max-log bit LLRs for a vector of symbol estimates with scalar gains.
/// Bits are MSB-first per symbol, matching QamConstellation::map.
std::vector<double> soft_demap(const Eigen::VectorXcd& y, const Eigen::VectorXcd& gains,
                               double sigma_eff2, const QamConstellation& c);

/// Seeded Fisher-Yates permutation, shared by transmitter and receiver.
std::vector<int> random_permutation(int n, uint64_t seed);

/// How a frame's data-bit capacity is split into LDPC codewords. Coded
/// bits are scattered over the frame through a seeded permutation; slots
/// left over after floor(capacity/n) codewords carry seed-derived filler
/// bits known to both ends and excluded from error counts.
struct CodedFrameLayout {
    int capacity_bits = 0;
    int n_codewords = 0;
    int coded_bits = 0;
    std::vector<int> slot_of;      // frame bit slot of coded/filler stream position
    std::vector<uint8_t> filler;

    std::vector<uint8_t> assemble(const std::vector<uint8_t>& coded_stream) const;
    std::vector<double> gather_llrs(const std::vector<double>& frame_llrs) const;
};

CodedFrameLayout make_coded_layout(int capacity_bits, const LdpcCode& code, uint64_t seed);

struct TurboConfig {
    int max_turbo_iters = 5;
    int detector_iters_per_turbo = 5;
    int decoder_iters_per_turbo = 25;

    void validate() const;
};

struct TurboResult {
    std::vector<uint8_t> info_bits;          // concatenated per codeword
    std::vector<uint8_t> coded_bits;         // decoder codeword decisions
    bool all_parity_ok = false;
    int turbo_iterations = 0;
    int detector_iterations = 0;             // summed over turbo rounds
    std::vector<int> parity_pass_per_iter;   // codewords passing after each round
};

/// Detector-decoder loop: detect, soft demap, deinterleave, LDPC decode,
/// re-map and re-modulate the decisions as the next detector estimate.
/// Stops when every codeword satisfies parity or after max_turbo_iters.
TurboResult turbo_decode(const MatchedBlocks& mb, const FrameParams& p,
                         const QamConstellation& constellation, Modem modem,
                         const LdpcCode& code, const CodedFrameLayout& layout,
                         const TurboConfig& turbo, const DetectorConfig& det,
                         double pilot_amplitude, double noise_var);

}  // namespace otsm
