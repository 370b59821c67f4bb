#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "otsm/transforms.hpp"

using namespace otsm;

namespace {

Eigen::VectorXcd random_cvec(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v(i) = cx(g(rng), g(rng));
    return v;
}

// brute-force oracles, independent of the library implementations
Eigen::VectorXcd dyadic_oracle(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    const int n = static_cast<int>(a.size());
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) out(i) += a(k) * b(i ^ k);
    return out;
}

int sign_changes(const Eigen::VectorXd& row) {
    int c = 0;
    for (int i = 1; i < row.size(); ++i)
        if (row(i - 1) * row(i) < 0) ++c;
    return c;
}

template <typename A, typename B>
auto kron(const A& a, const B& b) {
    using Scalar = decltype(a(0, 0) * b(0, 0));
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                              a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

}  // namespace

TEST_CASE("walsh matrix small orders") {
    auto w1 = walsh_matrix(1);
    CHECK(w1.rows() == 1);
    CHECK(w1(0, 0) == doctest::Approx(1.0));

    auto w2 = walsh_matrix(2);
    const double r2 = 1.0 / std::sqrt(2.0);
    CHECK(w2(0, 0) == doctest::Approx(r2));
    CHECK(w2(0, 1) == doctest::Approx(r2));
    CHECK(w2(1, 0) == doctest::Approx(r2));
    CHECK(w2(1, 1) == doctest::Approx(-r2));

    // N=4 sign patterns: ++++, ++--, +--+, +-+-
    auto w4 = walsh_matrix(4);
    const int expected[4][4] = {{1, 1, 1, 1}, {1, 1, -1, -1}, {1, -1, -1, 1}, {1, -1, 1, -1}};
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) CHECK(w4(r, c) == doctest::Approx(0.5 * expected[r][c]));
}

TEST_CASE("walsh matrix invariants across orders") {
    for (int n = 2; n <= 256; n *= 2) {
        auto w = walsh_matrix(n);
        // symmetric, involutory, entries of magnitude 1/sqrt(N)
        CHECK((w - w.transpose()).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
        CHECK((w * w - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((w.cwiseAbs().array() - 1.0 / std::sqrt(double(n))).abs().maxCoeff() < 1e-14);
        for (int r = 0; r < n; ++r) CHECK(sign_changes(w.row(r)) == r);
    }
    CHECK_THROWS_AS(walsh_matrix(12), std::invalid_argument);
    CHECK_THROWS_AS(walsh_matrix(0), std::invalid_argument);
}

TEST_CASE("fast wht examples and involution") {
    Eigen::VectorXcd e0(2);
    e0 << cx(1, 0), cx(0, 0);
    auto y = wht(e0);
    CHECK(std::abs(y(0) - cx(1.0 / std::sqrt(2.0), 0)) < 1e-15);
    CHECK(std::abs(y(1) - cx(1.0 / std::sqrt(2.0), 0)) < 1e-15);

    Eigen::VectorXcd ones4 = Eigen::VectorXcd::Ones(4);
    auto y4 = wht(ones4);
    CHECK(std::abs(y4(0) - cx(2, 0)) < 1e-15);
    for (int i = 1; i < 4; ++i) CHECK(std::abs(y4(i)) < 1e-15);

    auto x = random_cvec(16, 7);
    CHECK((wht(wht(x)) - x).cwiseAbs().maxCoeff() < 1e-12);

    Eigen::VectorXcd bad(3);
    bad.setZero();
    CHECK_THROWS_AS(wht(bad), std::invalid_argument);
}

TEST_CASE("fast wht equals dense walsh product") {
    for (int n = 2; n <= 256; n *= 2) {
        auto x = random_cvec(n, 100 + n);
        Eigen::VectorXcd dense = walsh_matrix(n) * x;
        CHECK((wht(x) - dense).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("dft examples and unitarity") {
    Eigen::VectorXcd e0 = Eigen::VectorXcd::Zero(4);
    e0(0) = 1.0;
    auto y = dft(e0);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(y(i) - cx(0.5, 0)) < 1e-15);

    auto yc = dft(Eigen::VectorXcd::Ones(4));
    CHECK(std::abs(yc(0) - cx(2, 0)) < 1e-14);
    for (int i = 1; i < 4; ++i) CHECK(std::abs(yc(i)) < 1e-14);

    auto x = random_cvec(8, 11);
    CHECK((idft(dft(x)) - x).cwiseAbs().maxCoeff() < 1e-12);

    // non power of two goes through the direct path
    auto x9 = random_cvec(9, 12);
    CHECK((idft(dft(x9)) - x9).cwiseAbs().maxCoeff() < 1e-12);
    auto f9 = fourier_matrix(9);
    CHECK((f9 * f9.adjoint() - Eigen::MatrixXcd::Identity(9, 9)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((dft(x9) - f9 * x9).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fourier matrix unitary across orders") {
    for (int n = 2; n <= 256; n *= 2) {
        auto f = fourier_matrix(n);
        CHECK((f * f.adjoint() - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("dyadic convolution") {
    Eigen::VectorXcd a(4);
    a << cx(1, 0), cx(2, 0), cx(3, 0), cx(4, 0);
    Eigen::VectorXcd imp = Eigen::VectorXcd::Zero(4);
    imp(0) = 1.0;
    CHECK((dyadic_convolution(a, imp) - a).cwiseAbs().maxCoeff() < 1e-15);

    Eigen::VectorXcd b(4);
    b << cx(1, 0), cx(0, 0), cx(0, 0), cx(1, 0);
    auto out = dyadic_convolution(a, b);
    auto expect = dyadic_oracle(a, b);
    CHECK((out - expect).cwiseAbs().maxCoeff() < 1e-15);
    // frozen from the brute-force oracle: every entry pairs a(n) with a(n^3)
    for (int i = 0; i < 4; ++i) CHECK(std::abs(out(i) - cx(5, 0)) < 1e-15);

    auto ra = random_cvec(16, 21);
    auto rb = random_cvec(16, 22);
    CHECK((dyadic_convolution(ra, rb) - dyadic_oracle(ra, rb)).cwiseAbs().maxCoeff() < 1e-12);

    Eigen::VectorXcd wrong(8);
    wrong.setZero();
    CHECK_THROWS_AS(dyadic_convolution(a, wrong), std::invalid_argument);
}

TEST_CASE("wht multiplication property") {
    // with the normalized transform: W(a dyconv b) = sqrt(N) (Wa) o (Wb)
    const int n = 16;
    auto a = random_cvec(n, 31);
    auto b = random_cvec(n, 32);
    Eigen::VectorXcd lhs = wht(dyadic_convolution(a, b));
    Eigen::VectorXcd rhs = std::sqrt(double(n)) * wht(a).cwiseProduct(wht(b));
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("circular convolution") {
    Eigen::VectorXcd a(4);
    a << cx(1, 0), cx(2, 0), cx(3, 0), cx(4, 0);
    Eigen::VectorXcd imp = Eigen::VectorXcd::Zero(4);
    imp(0) = 1.0;
    CHECK((circular_convolution(a, imp) - a).cwiseAbs().maxCoeff() < 1e-15);

    Eigen::VectorXcd shift = Eigen::VectorXcd::Zero(4);
    shift(1) = 1.0;
    auto out = circular_convolution(a, shift);
    Eigen::VectorXcd expect(4);
    expect << cx(4, 0), cx(1, 0), cx(2, 0), cx(3, 0);
    CHECK((out - expect).cwiseAbs().maxCoeff() < 1e-15);

    // DFT multiplication property with the same sqrt(N) scale
    const int n = 16;
    auto ra = random_cvec(n, 41);
    auto rb = random_cvec(n, 42);
    Eigen::VectorXcd lhs = dft(circular_convolution(ra, rb));
    Eigen::VectorXcd rhs = std::sqrt(double(n)) * dft(ra).cwiseProduct(dft(rb));
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);

    Eigen::VectorXcd wrong(8);
    wrong.setZero();
    CHECK_THROWS_AS(circular_convolution(a, wrong), std::invalid_argument);
}

TEST_CASE("perfect shuffle") {
    // M=1 or N=1 degenerate to identity
    for (auto [m, n] : {std::pair{1, 5}, std::pair{4, 1}}) {
        auto p = perfect_shuffle(m, n);
        auto x = random_cvec(m * n, 50 + m + n);
        CHECK((p.apply(x) - x).cwiseAbs().maxCoeff() == 0.0);
    }

    // Eq-style defining property: A (x) B = P (B (x) A) P^T for A NxN, B MxM
    std::mt19937 rng(99);
    std::normal_distribution<double> g;
    Eigen::MatrixXd a(3, 3), b(2, 2);
    for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = g(rng);
    for (int i = 0; i < 4; ++i) b(i / 2, i % 2) = g(rng);
    auto p = perfect_shuffle(2, 3);
    Eigen::MatrixXd pd = p.dense();
    Eigen::MatrixXd lhs = kron(a, b);
    Eigen::MatrixXd rhs = pd * kron(b, a) * pd.transpose();
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() == doctest::Approx(0.0));

    // apply / apply_transpose invert each other
    auto x = random_cvec(6, 51);
    CHECK((p.apply_transpose(p.apply(x)) - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("transmitter identities through the shuffle") {
    // s = P (I_M (x) W_N) x equals (W_N (x) I_M) (P x), N=4, M=3
    const int n = 4, m = 3;
    auto x = random_cvec(n * m, 61);
    auto p = perfect_shuffle(m, n);
    Eigen::MatrixXd pd = p.dense();
    Eigen::MatrixXcd w = walsh_matrix(n).cast<cx>();
    Eigen::MatrixXcd im = Eigen::MatrixXcd::Identity(m, m);
    Eigen::VectorXcd s1 = pd * (kron(im, w) * x);
    Eigen::VectorXcd s2 = kron(w, im) * (pd * x);
    CHECK((s1 - s2).cwiseAbs().maxCoeff() < 1e-12);
}
