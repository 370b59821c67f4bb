#include "otsm/coding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "otsm/rng.hpp"

namespace otsm {

namespace {

// The alist format is line oriented: header lines, one degree list per
// dimension, then one entry line per column and per row. Padded files
// fill short lines with zeros.
struct AlistLines {
    std::vector<std::pair<int, std::vector<long>>> lines;  // (line number, tokens)
    size_t next = 0;

    explicit AlistLines(const std::string& text) {
        std::istringstream in(text);
        std::string raw;
        int no = 0;
        while (std::getline(in, raw)) {
            ++no;
            std::istringstream ls(raw);
            std::vector<long> toks;
            long v;
            while (ls >> v) toks.push_back(v);
            if (!ls.eof())
                throw std::runtime_error("alist parse error at line " + std::to_string(no) +
                                         ": non-numeric token");
            if (!toks.empty()) lines.emplace_back(no, std::move(toks));
        }
    }

    const std::pair<int, std::vector<long>>& take(const char* what) {
        if (next >= lines.size())
            throw std::runtime_error(std::string("alist parse error: unexpected end of input, expected ") +
                                     what);
        return lines[next++];
    }
};

[[noreturn]] void alist_fail(int line, const std::string& msg) {
    throw std::runtime_error("alist parse error at line " + std::to_string(line) + ": " + msg);
}

}  // namespace

ParityCheckMatrix ParityCheckMatrix::parse_alist(const std::string& text) {
    AlistLines r(text);
    ParityCheckMatrix h;

    {
        const auto& [no, toks] = r.take("dimensions");
        if (toks.size() != 2 || toks[0] <= 0 || toks[1] <= 0)
            alist_fail(no, "expected two positive integers: n m");
        h.n = static_cast<int>(toks[0]);
        h.m = static_cast<int>(toks[1]);
    }
    int max_col = 0, max_row = 0;
    {
        const auto& [no, toks] = r.take("maximum degrees");
        if (toks.size() != 2 || toks[0] < 0 || toks[1] < 0)
            alist_fail(no, "expected two integers: max column degree, max row degree");
        max_col = static_cast<int>(toks[0]);
        max_row = static_cast<int>(toks[1]);
    }

    auto read_degrees = [&r](int count, int max_deg, const char* what) {
        const auto& [no, toks] = r.take(what);
        if (static_cast<int>(toks.size()) != count)
            alist_fail(no, std::string(what) + ": expected " + std::to_string(count) +
                               " values, got " + std::to_string(toks.size()));
        std::vector<int> deg(count);
        for (int i = 0; i < count; ++i) {
            if (toks[i] < 0 || toks[i] > max_deg) alist_fail(no, std::string(what) + ": degree out of range");
            deg[i] = static_cast<int>(toks[i]);
        }
        return deg;
    };
    std::vector<int> col_deg = read_degrees(h.n, max_col, "column degree list");
    std::vector<int> row_deg = read_degrees(h.m, max_row, "row degree list");

    long col_edges = 0, row_edges = 0;
    for (int d : col_deg) col_edges += d;
    for (int d : row_deg) row_edges += d;
    if (col_edges != row_edges)
        throw std::runtime_error("alist parse error at line 3: column/row degree sums differ (" +
                                 std::to_string(col_edges) + " vs " + std::to_string(row_edges) + ")");

    auto read_entries = [&r](int count, const std::vector<int>& deg, int max_deg, int index_limit,
                             const char* what) {
        std::vector<std::vector<int>> out(count);
        for (int i = 0; i < count; ++i) {
            const auto& [no, toks] = r.take(what);
            if (static_cast<int>(toks.size()) < deg[i] || static_cast<int>(toks.size()) > max_deg)
                alist_fail(no, std::string(what) + " " + std::to_string(i + 1) + ": expected " +
                                   std::to_string(deg[i]) + " entries (max " +
                                   std::to_string(max_deg) + "), got " + std::to_string(toks.size()));
            for (long v : toks) {
                if (v == 0) continue;  // padding
                if (v < 1 || v > index_limit) alist_fail(no, "index out of range");
                out[i].push_back(static_cast<int>(v) - 1);
            }
            if (static_cast<int>(out[i].size()) != deg[i])
                alist_fail(no, std::string(what) + " " + std::to_string(i + 1) + ": has " +
                                   std::to_string(out[i].size()) + " nonzero entries, expected " +
                                   std::to_string(deg[i]));
            std::sort(out[i].begin(), out[i].end());
        }
        return out;
    };
    h.col_rows = read_entries(h.n, col_deg, max_col, h.m, "column list");
    h.row_cols = read_entries(h.m, row_deg, max_row, h.n, "row list");

    // cross-check the two adjacency lists
    std::vector<std::vector<int>> from_cols(h.m);
    for (int c = 0; c < h.n; ++c)
        for (int rr : h.col_rows[c]) from_cols[rr].push_back(c);
    for (int rr = 0; rr < h.m; ++rr) {
        std::sort(from_cols[rr].begin(), from_cols[rr].end());
        if (from_cols[rr] != h.row_cols[rr])
            throw std::runtime_error("alist parse error: row " + std::to_string(rr + 1) +
                                     " adjacency inconsistent with column lists");
    }
    return h;
}

ParityCheckMatrix ParityCheckMatrix::load_alist_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open alist file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_alist(ss.str());
}

std::string ParityCheckMatrix::to_alist() const {
    std::ostringstream out;
    int max_col = 0, max_row = 0;
    for (const auto& c : col_rows) max_col = std::max(max_col, static_cast<int>(c.size()));
    for (const auto& r : row_cols) max_row = std::max(max_row, static_cast<int>(r.size()));
    out << n << " " << m << "\n" << max_col << " " << max_row << "\n";
    for (int c = 0; c < n; ++c) out << col_rows[c].size() << (c + 1 < n ? " " : "\n");
    for (int r = 0; r < m; ++r) out << row_cols[r].size() << (r + 1 < m ? " " : "\n");
    for (const auto& c : col_rows) {
        for (size_t j = 0; j < c.size(); ++j) out << c[j] + 1 << (j + 1 < c.size() ? " " : "");
        out << "\n";
    }
    for (const auto& r : row_cols) {
        for (size_t j = 0; j < r.size(); ++j) out << r[j] + 1 << (j + 1 < r.size() ? " " : "");
        out << "\n";
    }
    return out.str();
}

bool ParityCheckMatrix::check(const std::vector<uint8_t>& codeword) const {
    if (static_cast<int>(codeword.size()) != n)
        throw std::invalid_argument("parity check: codeword length mismatch");
    for (const auto& cols : row_cols) {
        int acc = 0;
        for (int c : cols) acc ^= codeword[c] & 1;
        if (acc) return false;
    }
    return true;
}

LdpcCode::LdpcCode(ParityCheckMatrix h) : h_(std::move(h)) {
    // GF(2) row reduction to reduced echelon form on a dense bit copy
    std::vector<std::vector<uint8_t>> rows(h_.m, std::vector<uint8_t>(h_.n, 0));
    for (int r = 0; r < h_.m; ++r)
        for (int c : h_.row_cols[r]) rows[r][c] = 1;

    std::vector<int> pivot_of_row;
    int rank = 0;
    for (int col = 0; col < h_.n && rank < h_.m; ++col) {
        int sel = -1;
        for (int r = rank; r < h_.m; ++r)
            if (rows[r][col]) {
                sel = r;
                break;
            }
        if (sel < 0) continue;
        std::swap(rows[rank], rows[sel]);
        for (int r = 0; r < h_.m; ++r) {
            if (r != rank && rows[r][col])
                for (int c = col; c < h_.n; ++c) rows[r][c] ^= rows[rank][c];
        }
        pivot_of_row.push_back(col);
        ++rank;
    }

    std::vector<uint8_t> is_pivot(h_.n, 0);
    for (int c : pivot_of_row) is_pivot[c] = 1;
    for (int c = 0; c < h_.n; ++c)
        if (!is_pivot[c]) info_cols_.push_back(c);

    pivot_cols_ = pivot_of_row;
    pivot_deps_.resize(rank);
    for (int r = 0; r < rank; ++r)
        for (int c = 0; c < h_.n; ++c)
            if (rows[r][c] && !is_pivot[c]) pivot_deps_[r].push_back(c);
}

std::vector<uint8_t> LdpcCode::encode(const std::vector<uint8_t>& info) const {
    if (info.size() != info_cols_.size())
        throw std::invalid_argument("ldpc_encode: expected " + std::to_string(info_cols_.size()) +
                                    " information bits, got " + std::to_string(info.size()));
    std::vector<uint8_t> cw(h_.n, 0);
    for (size_t i = 0; i < info_cols_.size(); ++i) cw[info_cols_[i]] = info[i] & 1;
    for (size_t r = 0; r < pivot_cols_.size(); ++r) {
        int acc = 0;
        for (int c : pivot_deps_[r]) acc ^= cw[c];
        cw[pivot_cols_[r]] = static_cast<uint8_t>(acc);
    }
    return cw;
}

std::vector<uint8_t> LdpcCode::extract_info(const std::vector<uint8_t>& codeword) const {
    std::vector<uint8_t> info(info_cols_.size());
    for (size_t i = 0; i < info_cols_.size(); ++i) info[i] = codeword[info_cols_[i]] & 1;
    return info;
}

LdpcCode::DecodeResult LdpcCode::decode(const std::vector<double>& llr, int max_iters,
                                        double norm_factor) const {
    if (static_cast<int>(llr.size()) != h_.n)
        throw std::invalid_argument("ldpc_decode: LLR length mismatch");

    // edge arrays in row-major order
    std::vector<int> edge_col;
    std::vector<int> row_begin(h_.m + 1, 0);
    for (int r = 0; r < h_.m; ++r) {
        row_begin[r] = static_cast<int>(edge_col.size());
        for (int c : h_.row_cols[r]) edge_col.push_back(c);
    }
    row_begin[h_.m] = static_cast<int>(edge_col.size());

    std::vector<double> r_msg(edge_col.size(), 0.0);  // check -> variable
    std::vector<double> posterior(llr);
    DecodeResult res;
    res.bits.assign(h_.n, 0);

    for (int it = 1; it <= max_iters; ++it) {
        res.iterations = it;
        for (int r = 0; r < h_.m; ++r) {
            const int b = row_begin[r], e = row_begin[r + 1];
            // variable-to-check: posterior minus previous check message
            double min1 = std::numeric_limits<double>::infinity();
            double min2 = min1;
            int min_pos = -1;
            int sign = 1;
            for (int j = b; j < e; ++j) {
                double q = posterior[edge_col[j]] - r_msg[j];
                double a = std::abs(q);
                if (q < 0) sign = -sign;
                if (a < min1) {
                    min2 = min1;
                    min1 = a;
                    min_pos = j;
                } else if (a < min2) {
                    min2 = a;
                }
            }
            for (int j = b; j < e; ++j) {
                double q = posterior[edge_col[j]] - r_msg[j];
                int s = (q < 0) ? -sign : sign;
                double mag = (j == min_pos) ? min2 : min1;
                double newmsg = s * norm_factor * mag;
                posterior[edge_col[j]] = q + newmsg;
                r_msg[j] = newmsg;
            }
        }
        for (int c = 0; c < h_.n; ++c) res.bits[c] = posterior[c] < 0.0 ? 1 : 0;
        if (h_.check(res.bits)) {
            res.parity_ok = true;
            break;
        }
    }
    return res;
}

std::vector<double> soft_demap(const Eigen::VectorXcd& y, const Eigen::VectorXcd& gains,
                               double sigma_eff2, const QamConstellation& c) {
    if (y.size() != gains.size()) throw std::invalid_argument("soft_demap: length mismatch");
    if (sigma_eff2 <= 0.0) throw std::invalid_argument("soft_demap: sigma_eff2 must be positive");
    const int q = c.bits_per_symbol();
    std::vector<double> llr(y.size() * q);
    for (long s = 0; s < y.size(); ++s) {
        for (int b = 0; b < q; ++b) {
            double best0 = std::numeric_limits<double>::infinity();
            double best1 = best0;
            for (int label = 0; label < c.order(); ++label) {
                double d = std::norm(y(s) - gains(s) * c.point(label));
                if ((label >> (q - 1 - b)) & 1) {
                    best1 = std::min(best1, d);
                } else {
                    best0 = std::min(best0, d);
                }
            }
            llr[s * q + b] = (best1 - best0) / sigma_eff2;
        }
    }
    return llr;
}

std::vector<int> random_permutation(int n, uint64_t seed) {
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    auto rng = make_rng(seed);
    for (int i = n - 1; i > 0; --i) {
        std::uniform_int_distribution<int> d(0, i);
        std::swap(perm[i], perm[d(rng)]);
    }
    return perm;
}

CodedFrameLayout make_coded_layout(int capacity_bits, const LdpcCode& code, uint64_t seed) {
    CodedFrameLayout lay;
    lay.capacity_bits = capacity_bits;
    lay.n_codewords = lay.capacity_bits / code.n();
    if (lay.n_codewords < 1)
        throw std::invalid_argument("make_coded_layout: frame too small for one codeword");
    lay.coded_bits = lay.n_codewords * code.n();
    lay.slot_of = random_permutation(lay.capacity_bits, seed);
    const int fill = lay.capacity_bits - lay.coded_bits;
    lay.filler.resize(fill);
    auto rng = make_rng(derive_seed(seed, 0x66616c6cULL));
    std::uniform_int_distribution<int> bit(0, 1);
    for (int i = 0; i < fill; ++i) lay.filler[i] = static_cast<uint8_t>(bit(rng));
    return lay;
}

std::vector<uint8_t> CodedFrameLayout::assemble(const std::vector<uint8_t>& coded_stream) const {
    if (static_cast<int>(coded_stream.size()) != coded_bits)
        throw std::invalid_argument("assemble: coded stream length mismatch");
    std::vector<uint8_t> frame(capacity_bits, 0);
    for (int i = 0; i < coded_bits; ++i) frame[slot_of[i]] = coded_stream[i] & 1;
    for (int i = 0; i < static_cast<int>(filler.size()); ++i)
        frame[slot_of[coded_bits + i]] = filler[i];
    return frame;
}

std::vector<double> CodedFrameLayout::gather_llrs(const std::vector<double>& frame_llrs) const {
    if (static_cast<int>(frame_llrs.size()) != capacity_bits)
        throw std::invalid_argument("gather_llrs: LLR length mismatch");
    std::vector<double> out(coded_bits);
    for (int i = 0; i < coded_bits; ++i) out[i] = frame_llrs[slot_of[i]];
    return out;
}

void TurboConfig::validate() const {
    if (max_turbo_iters < 1 || detector_iters_per_turbo < 1 || decoder_iters_per_turbo < 1)
        throw std::invalid_argument("TurboConfig: all iteration counts must be >= 1");
}

TurboResult turbo_decode(const MatchedBlocks& mb, const FrameParams& p,
                         const QamConstellation& constellation, Modem modem, const LdpcCode& code,
                         const CodedFrameLayout& layout, const TurboConfig& turbo,
                         const DetectorConfig& det, double pilot_amplitude, double noise_var) {
    turbo.validate();
    DetectorConfig det_cfg = det;
    det_cfg.max_iters = turbo.detector_iters_per_turbo;

    const double sigma_eff2 = noise_var > 0.0 ? noise_var : 1e-12;
    const int q = constellation.bits_per_symbol();

    TurboResult res;
    res.parity_pass_per_iter.reserve(turbo.max_turbo_iters);

    Eigen::VectorXcd s_est = Eigen::VectorXcd::Zero(p.frame_len());
    for (int it = 1; it <= turbo.max_turbo_iters; ++it) {
        res.turbo_iterations = it;
        DetectionResult dr = gs_detect(mb, det_cfg, p, constellation, modem, pilot_amplitude,
                                       noise_var, it == 1 ? nullptr : &s_est);
        res.detector_iterations += dr.iterations;

        Eigen::VectorXcd data = extract_data(p, dr.grid_soft);
        Eigen::VectorXcd gains = Eigen::VectorXcd::Ones(data.size());
        std::vector<double> frame_llrs = soft_demap(data, gains, sigma_eff2, constellation);
        std::vector<double> coded_llrs = layout.gather_llrs(frame_llrs);

        res.coded_bits.assign(layout.coded_bits, 0);
        res.info_bits.clear();
        int pass = 0;
        for (int cw = 0; cw < layout.n_codewords; ++cw) {
            std::vector<double> llr(coded_llrs.begin() + static_cast<long>(cw) * code.n(),
                                    coded_llrs.begin() + static_cast<long>(cw + 1) * code.n());
            auto dec = code.decode(llr, turbo.decoder_iters_per_turbo);
            if (dec.parity_ok) ++pass;
            std::copy(dec.bits.begin(), dec.bits.end(),
                      res.coded_bits.begin() + static_cast<long>(cw) * code.n());
            auto info = code.extract_info(dec.bits);
            res.info_bits.insert(res.info_bits.end(), info.begin(), info.end());
        }
        res.parity_pass_per_iter.push_back(pass);
        if (pass == layout.n_codewords) {
            res.all_parity_ok = true;
            break;
        }
        if (it == turbo.max_turbo_iters) break;

        // re-map the decoder decisions and refresh the time-domain estimate
        std::vector<uint8_t> frame_bits = layout.assemble(res.coded_bits);
        Eigen::VectorXcd symbols = constellation.map(frame_bits);
        DelaySequencyGrid grid = build_grid(p, symbols, pilot_amplitude);
        s_est = remodulate_body(modem, p, grid);
    }
    (void)q;
    return res;
}

}  // namespace otsm
