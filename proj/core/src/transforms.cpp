#include "otsm/transforms.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace otsm {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

int log2i(int n) {
    int k = 0;
    while ((1 << k) < n) ++k;
    return k;
}

// Natural (Sylvester) Hadamard row index of the n-th sequency-ordered row:
// bit-reverse the Gray code of n over log2(N) bits.
int sequency_to_natural(int n, int bits) {
    int g = n ^ (n >> 1);
    int r = 0;
    for (int b = 0; b < bits; ++b)
        if (g & (1 << b)) r |= 1 << (bits - 1 - b);
    return r;
}

// Unnormalized natural-order Hadamard butterfly, in place.
void hadamard_butterfly(cx* x, int n) {
    for (int len = 1; len < n; len <<= 1) {
        for (int i = 0; i < n; i += len << 1) {
            for (int j = i; j < i + len; ++j) {
                cx a = x[j];
                cx b = x[j + len];
                x[j] = a + b;
                x[j + len] = a - b;
            }
        }
    }
}

// Iterative radix-2 Cooley-Tukey, unnormalized, sign = -1 forward.
void fft_pow2(std::vector<cx>& x, int sign) {
    const int n = static_cast<int>(x.size());
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        double ang = sign * 2.0 * std::numbers::pi / len;
        cx wlen(std::cos(ang), std::sin(ang));
        for (int i = 0; i < n; i += len) {
            cx w(1.0, 0.0);
            for (int j = 0; j < len / 2; ++j) {
                cx u = x[i + j];
                cx v = x[i + j + len / 2] * w;
                x[i + j] = u + v;
                x[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

Eigen::VectorXcd dft_impl(const Eigen::VectorXcd& x, int sign) {
    const int n = static_cast<int>(x.size());
    if (n == 0) throw std::invalid_argument("dft: empty input");
    Eigen::VectorXcd y(n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    if (is_pow2(n)) {
        std::vector<cx> buf(x.data(), x.data() + n);
        fft_pow2(buf, sign);
        for (int i = 0; i < n; ++i) y(i) = buf[i] * scale;
        return y;
    }
    for (int k = 0; k < n; ++k) {
        cx acc(0.0, 0.0);
        for (int j = 0; j < n; ++j) {
            double ang = sign * 2.0 * std::numbers::pi * k * j / n;
            acc += x(j) * cx(std::cos(ang), std::sin(ang));
        }
        y(k) = acc * scale;
    }
    return y;
}

}  // namespace

Eigen::MatrixXd walsh_matrix(int n) {
    if (!is_pow2(n)) throw std::invalid_argument("walsh_matrix: order must be a power of two");
    const int bits = log2i(n);
    // Sylvester natural order: H(i,j) = (-1)^popcount(i & j)
    Eigen::MatrixXd w(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int r = 0; r < n; ++r) {
        int nat = sequency_to_natural(r, bits);
        for (int c = 0; c < n; ++c) {
            int par = __builtin_popcount(nat & c) & 1;
            w(r, c) = par ? -scale : scale;
        }
    }
    return w;
}

Eigen::MatrixXcd fourier_matrix(int n) {
    if (n <= 0) throw std::invalid_argument("fourier_matrix: order must be positive");
    Eigen::MatrixXcd f(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) {
            double ang = -2.0 * std::numbers::pi * k * j / n;
            f(k, j) = cx(std::cos(ang), std::sin(ang)) * scale;
        }
    return f;
}

void wht_inplace(cx* data, int n) {
    if (!is_pow2(n)) throw std::invalid_argument("wht: length must be a power of two");
    if (n == 1) return;
    const int bits = log2i(n);
    hadamard_butterfly(data, n);
    // reorder natural -> sequency and apply the 1/sqrt(N) scale
    static thread_local std::vector<cx> tmp;
    tmp.assign(data, data + n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int i = 0; i < n; ++i) data[i] = tmp[sequency_to_natural(i, bits)] * scale;
}

Eigen::VectorXcd wht(const Eigen::VectorXcd& x) {
    Eigen::VectorXcd y = x;
    wht_inplace(y.data(), static_cast<int>(y.size()));
    return y;
}

Eigen::VectorXcd dft(const Eigen::VectorXcd& x) { return dft_impl(x, -1); }

Eigen::VectorXcd idft(const Eigen::VectorXcd& x) { return dft_impl(x, +1); }

Eigen::VectorXcd dyadic_convolution(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    const int n = static_cast<int>(a.size());
    if (b.size() != n) throw std::invalid_argument("dyadic_convolution: length mismatch");
    if (!is_pow2(n)) throw std::invalid_argument("dyadic_convolution: length must be a power of two");
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) out(i) += a(k) * b(i ^ k);
    return out;
}

Eigen::VectorXcd circular_convolution(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    const int n = static_cast<int>(a.size());
    if (b.size() != n) throw std::invalid_argument("circular_convolution: length mismatch");
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) out(i) += a(k) * b(((i - k) % n + n) % n);
    return out;
}

ShufflePermutation perfect_shuffle(int m, int n) {
    if (m < 1 || n < 1) throw std::invalid_argument("perfect_shuffle: sizes must be >= 1");
    ShufflePermutation p;
    p.rows_m = m;
    p.cols_n = n;
    p.dest.resize(static_cast<size_t>(m) * n);
    for (int mm = 0; mm < m; ++mm)
        for (int nn = 0; nn < n; ++nn) p.dest[nn + mm * n] = mm + nn * m;
    return p;
}

Eigen::VectorXcd ShufflePermutation::apply(const Eigen::VectorXcd& x) const {
    const int sz = static_cast<int>(dest.size());
    if (x.size() != sz) throw std::invalid_argument("shuffle apply: length mismatch");
    Eigen::VectorXcd y(sz);
    for (int i = 0; i < sz; ++i) y(dest[i]) = x(i);
    return y;
}

Eigen::VectorXcd ShufflePermutation::apply_transpose(const Eigen::VectorXcd& x) const {
    const int sz = static_cast<int>(dest.size());
    if (x.size() != sz) throw std::invalid_argument("shuffle apply_transpose: length mismatch");
    Eigen::VectorXcd y(sz);
    for (int i = 0; i < sz; ++i) y(i) = x(dest[i]);
    return y;
}

Eigen::MatrixXd ShufflePermutation::dense() const {
    const int sz = static_cast<int>(dest.size());
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(sz, sz);
    for (int i = 0; i < sz; ++i) p(dest[i], i) = 1.0;
    return p;
}

}  // namespace otsm
