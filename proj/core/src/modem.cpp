#include "otsm/modem.hpp"

#include <stdexcept>

namespace otsm {

std::string to_string(Modem m) {
    switch (m) {
        case Modem::otsm: return "otsm";
        case Modem::otfs: return "otfs";
        case Modem::ofdm: return "ofdm";
        case Modem::sc: return "sc";
    }
    return "?";
}

Modem modem_from_string(const std::string& s) {
    if (s == "otsm") return Modem::otsm;
    if (s == "otfs") return Modem::otfs;
    if (s == "ofdm") return Modem::ofdm;
    if (s == "sc") return Modem::sc;
    throw std::invalid_argument("unknown modem '" + s + "'");
}

Eigen::MatrixXcd fold_body(const FrameParams& p, const Eigen::VectorXcd& body) {
    if (body.size() != p.frame_len()) throw std::invalid_argument("fold_body: length mismatch");
    Eigen::MatrixXcd dt(p.m_slots, p.n_blocks);
    for (int n = 0; n < p.n_blocks; ++n)
        dt.col(n) = body.segment(static_cast<long>(n) * p.m_slots, p.m_slots);
    return dt;
}

Eigen::VectorXcd unfold_body(const Eigen::MatrixXcd& delay_time) {
    Eigen::VectorXcd body(delay_time.size());
    const int m = static_cast<int>(delay_time.rows());
    for (int n = 0; n < delay_time.cols(); ++n)
        body.segment(static_cast<long>(n) * m, m) = delay_time.col(n);
    return body;
}

namespace {

// Row-wise transform helpers. X has one symbol vector per row.
Eigen::MatrixXcd rows_wht(const Eigen::MatrixXcd& x) {
    Eigen::MatrixXcd out(x.rows(), x.cols());
    Eigen::VectorXcd row(x.cols());
    for (int m = 0; m < x.rows(); ++m) {
        row = x.row(m).transpose();
        wht_inplace(row.data(), static_cast<int>(row.size()));
        out.row(m) = row.transpose();
    }
    return out;
}

Eigen::MatrixXcd rows_idft(const Eigen::MatrixXcd& x) {
    Eigen::MatrixXcd out(x.rows(), x.cols());
    for (int m = 0; m < x.rows(); ++m)
        out.row(m) = idft(x.row(m).transpose()).transpose();
    return out;
}

Eigen::MatrixXcd rows_dft(const Eigen::MatrixXcd& x) {
    Eigen::MatrixXcd out(x.rows(), x.cols());
    for (int m = 0; m < x.rows(); ++m)
        out.row(m) = dft(x.row(m).transpose()).transpose();
    return out;
}

TimeFrame frame_from_delay_time(const FrameParams& p, const Eigen::MatrixXcd& dt) {
    TimeFrame tf;
    tf.body = unfold_body(dt);
    tf.cp = tf.body.tail(p.cp_len());
    return tf;
}

void check_grid(const FrameParams& p, const Eigen::MatrixXcd& x, const char* who) {
    if (x.rows() != p.m_slots || x.cols() != p.n_blocks)
        throw std::invalid_argument(std::string(who) + ": grid dimensions mismatch");
}

void check_rx(const FrameParams& p, const ReceivedFrame& rx, const char* who) {
    if (rx.body.size() != p.frame_len())
        throw std::invalid_argument(std::string(who) + ": received body length mismatch");
}

}  // namespace

TimeFrame otsm_modulate(const FrameParams& p, const DelaySequencyGrid& x) {
    check_grid(p, x, "otsm_modulate");
    return frame_from_delay_time(p, rows_wht(x));
}

DelaySequencyGrid otsm_demodulate(const FrameParams& p, const ReceivedFrame& rx) {
    check_rx(p, rx, "otsm_demodulate");
    return rows_wht(fold_body(p, rx.body));
}

TimeFrame otfs_modulate(const FrameParams& p, const DelaySequencyGrid& x) {
    check_grid(p, x, "otfs_modulate");
    return frame_from_delay_time(p, rows_idft(x));
}

DelaySequencyGrid otfs_demodulate(const FrameParams& p, const ReceivedFrame& rx) {
    check_rx(p, rx, "otfs_demodulate");
    return rows_dft(fold_body(p, rx.body));
}

TimeFrame sc_modulate(const FrameParams& p, const DelaySequencyGrid& x) {
    check_grid(p, x, "sc_modulate");
    return frame_from_delay_time(p, x);
}

DelaySequencyGrid sc_demodulate(const FrameParams& p, const ReceivedFrame& rx) {
    check_rx(p, rx, "sc_demodulate");
    return fold_body(p, rx.body);
}

TimeFrame ofdm_modulate(const FrameParams& p, const Eigen::MatrixXcd& grid) {
    check_grid(p, grid, "ofdm_modulate");
    const int m = p.m_slots;
    const int cp = p.l_max;
    TimeFrame tf;
    tf.body.resize(static_cast<long>(p.n_blocks) * (m + cp));
    for (int n = 0; n < p.n_blocks; ++n) {
        Eigen::VectorXcd sym = idft(grid.col(n));
        long base = static_cast<long>(n) * (m + cp);
        tf.body.segment(base, cp) = sym.tail(cp);
        tf.body.segment(base + cp, m) = sym;
    }
    return tf;
}

Eigen::MatrixXcd ofdm_demodulate(const FrameParams& p, const ReceivedFrame& rx) {
    const int m = p.m_slots;
    const int cp = p.l_max;
    if (rx.body.size() != static_cast<long>(p.n_blocks) * (m + cp))
        throw std::invalid_argument("ofdm_demodulate: received body length mismatch");
    Eigen::MatrixXcd grid(m, p.n_blocks);
    for (int n = 0; n < p.n_blocks; ++n) {
        long base = static_cast<long>(n) * (m + cp);
        grid.col(n) = dft(rx.body.segment(base + cp, m));
    }
    return grid;
}

long stream_length(Modem m, const FrameParams& p) {
    if (m == Modem::ofdm) return static_cast<long>(p.n_blocks) * (p.m_slots + p.l_max);
    return p.frame_len() + p.cp_len();
}

Eigen::VectorXcd remodulate_body(Modem m, const FrameParams& p, const DelaySequencyGrid& x) {
    check_grid(p, x, "remodulate_body");
    return unfold_body(rows_to_time(m, x));
}

Eigen::MatrixXcd rows_to_symbol(Modem m, const Eigen::MatrixXcd& delay_time) {
    switch (m) {
        case Modem::otsm: return rows_wht(delay_time);
        case Modem::otfs: return rows_dft(delay_time);
        case Modem::sc: return delay_time;
        case Modem::ofdm: break;
    }
    throw std::invalid_argument("rows_to_symbol: not defined for OFDM");
}

Eigen::MatrixXcd rows_to_time(Modem m, const Eigen::MatrixXcd& grid) {
    switch (m) {
        case Modem::otsm: return rows_wht(grid);
        case Modem::otfs: return rows_idft(grid);
        case Modem::sc: return grid;
        case Modem::ofdm: break;
    }
    throw std::invalid_argument("rows_to_time: not defined for OFDM");
}

}  // namespace otsm
