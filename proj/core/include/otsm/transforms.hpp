#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace otsm {

using cx = std::complex<double>;

/// Sequency-ordered, normalized (1/sqrt(N)) Walsh-Hadamard matrix.
/// Row n has exactly n sign changes; the matrix is real, symmetric and
/// involutory (W*W = I).
Eigen::MatrixXd walsh_matrix(int n);

/// Unitary DFT matrix, entry (k,n) = exp(-j*2*pi*k*n/N)/sqrt(N).
Eigen::MatrixXcd fourier_matrix(int n);

/// Fast sequency-ordered WHT, y = W_N * x. Butterfly additions plus one
/// final scale; requires power-of-two length. Involutory: wht(wht(x)) = x.
Eigen::VectorXcd wht(const Eigen::VectorXcd& x);

/// In-place variant working on a raw buffer of length n (power of two).
void wht_inplace(cx* data, int n);

/// Unitary DFT / inverse DFT. Radix-2 FFT for power-of-two lengths,
/// direct evaluation otherwise (sizes here are small).
Eigen::VectorXcd dft(const Eigen::VectorXcd& x);
Eigen::VectorXcd idft(const Eigen::VectorXcd& x);

/// out(n) = sum_k a(k) * b(n XOR k). Equal power-of-two lengths required.
Eigen::VectorXcd dyadic_convolution(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);

/// out(n) = sum_k a(k) * b([n-k] mod N). Equal lengths required.
Eigen::VectorXcd circular_convolution(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);

/// Row-column interleaver ("perfect shuffle") for an M*N stack of M
/// blocks of length N: element (n + m*N) moves to (m + n*M).
/// Satisfies A (x) B = P * (B (x) A) * P^T for A NxN, B MxM.
struct ShufflePermutation {
    int rows_m = 1;
    int cols_n = 1;
    std::vector<int> dest;  // dest[i] = output position of input element i

    Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
    Eigen::VectorXcd apply_transpose(const Eigen::VectorXcd& x) const;
    Eigen::MatrixXd dense() const;
};

ShufflePermutation perfect_shuffle(int m, int n);

}  // namespace otsm
