/*
 * numerics.hpp — scalar special functions, random orthogonal matrices and
 * the symmetric eigendecomposition contract the rest of the library builds on.
 *
 *   lambert_w0        : principal real branch of w e^w = x, Halley iteration
 *   random_orthogonal : Haar-distributed orthogonal matrix (QR of a Gaussian)
 *   sym_eig           : descending eigensystem with a deterministic sign fix
 */
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace ebmlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace numerics {

// Derives an independent stream seed from a master seed (splitmix64 mix of
// master and stream id). Streams with distinct ids are decorrelated even for
// adjacent master seeds.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

namespace detail {

// 1 + W0(-(1 - delta)/e) evaluated by the branch-point series in
// p = sqrt(2*delta). Accurate to ~p^7 absolute.
inline double one_plus_w0_near_branch(double delta) {
    const double p = std::sqrt(2.0 * delta);
    return p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 + p * (-43.0 / 540.0 + p * (769.0 / 17280.0 - p * 221.0 / 8505.0)))));
}

} // namespace detail

// Principal real branch W0 of w e^w = x for x >= -1/e. Inputs up to 1e-12
// below the branch point are clamped; anything lower is a domain error.
inline double lambert_w0(double x) {
    constexpr double inv_e = 0.36787944117144233; // 1/e
    if (std::isnan(x)) throw std::domain_error("lambert_w0: NaN argument");
    if (x < -inv_e - 1e-12)
        throw std::domain_error("lambert_w0: argument " + std::to_string(x) + " below -1/e");
    if (x <= -inv_e) return -1.0;
    if (x == 0.0) return 0.0;

    const double delta = 1.0 + x / inv_e; // 1 + e*x, distance from the branch point
    if (delta > 0.0 && delta < 1e-8)
        return -1.0 + detail::one_plus_w0_near_branch(delta);

    double w;
    if (x < -0.25) {
        w = -1.0 + detail::one_plus_w0_near_branch(delta);
    } else if (x < 3.0) {
        const double l = std::log1p(x);
        w = l * (1.0 - std::log1p(l) / (2.0 + l)); // Winitzki approximation
    } else {
        const double l1 = std::log(x);
        const double l2 = std::log(l1);
        w = l1 - l2 + l2 / l1;
    }

    for (int i = 0; i < 64; ++i) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        const double wp1 = w + 1.0;
        const double denom = ew * wp1 - f * (w + 2.0) / (2.0 * wp1);
        const double step = f / denom;
        w -= step;
        if (w <= -1.0) w = -1.0 + 1e-300; // stay on the principal branch
        if (std::abs(step) <= 2e-16 * (1.0 + std::abs(w))) break;
    }
    return w;
}

// Haar-distributed orthogonal matrix: QR of an i.i.d. standard-normal matrix
// with the R-diagonal sign correction. Deterministic given the seed.
inline Matrix random_orthogonal(Index n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("random_orthogonal: n must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix a(n, n);
    for (Index col = 0; col < n; ++col)
        for (Index row = 0; row < n; ++row)
            a(row, col) = gauss(rng);
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    const Vector rdiag = qr.matrixQR().diagonal();
    for (Index j = 0; j < n; ++j)
        if (rdiag(j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

// Eigenvalues sorted non-increasing, one orthonormal basis column per value.
struct EigenSystem {
    Vector values; // descending
    Matrix basis;  // column alpha pairs with values[alpha]
};

// Sigma_a values[a] v_a v_a^T, symmetrized against rounding.
inline Matrix assemble(const Vector& values, const Matrix& basis) {
    if (basis.rows() != basis.cols() || values.size() != basis.cols())
        throw std::invalid_argument("assemble: dimension mismatch");
    Matrix m = basis * values.asDiagonal() * basis.transpose();
    return ((m + m.transpose()) * 0.5).eval();
}

inline Matrix assemble(const EigenSystem& es) { return assemble(es.values, es.basis); }

// Symmetric eigendecomposition. Rejects inputs with max-abs asymmetry above
// 1e-10. The sign of each eigenvector is fixed so its largest-magnitude
// component is positive, making the output reproducible across runs.
inline EigenSystem sym_eig(const Matrix& m) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("sym_eig: matrix is not square");
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10)
        throw std::invalid_argument("sym_eig: asymmetry " + std::to_string(asym) + " exceeds 1e-10");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(((m + m.transpose()) * 0.5).eval());
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("sym_eig: eigensolver failed to converge");

    const Index n = m.rows();
    EigenSystem out{Vector(n), Matrix(n, n)};
    for (Index k = 0; k < n; ++k) {
        out.values(k) = solver.eigenvalues()(n - 1 - k);
        out.basis.col(k) = solver.eigenvectors().col(n - 1 - k);
    }
    for (Index k = 0; k < n; ++k) {
        Index imax = 0;
        out.basis.col(k).cwiseAbs().maxCoeff(&imax);
        if (out.basis(imax, k) < 0.0) out.basis.col(k) = -out.basis.col(k);
    }
    return out;
}

} // namespace numerics
} // namespace ebmlab
