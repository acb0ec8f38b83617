/*
 * metrics.hpp — scalar quality measures for coupling estimates.
 *
 * Conventions follow the two norms used throughout the library:
 *   coupling_error    E_J = ||J - J*||_F^2 / N   (squared, normalized)
 *   generation_error  E_C = ||C* - J^-1||_F      (plain Frobenius)
 */
#pragma once

#include "numerics.hpp"
#include "trajectory.hpp"

#include <cmath>
#include <optional>
#include <string>

namespace ebmlab {
namespace metrics {

struct MetricReport {
    std::optional<double> e_train, e_test, ll_train, ll_test, e_j, e_c, w2;
};

// Tr(J C) / N. E_train for C = empirical covariance, E_test for C = C*.
inline double trace_energy(const Matrix& j, const Matrix& c) {
    if (j.rows() != c.rows() || j.cols() != c.cols() || j.rows() != j.cols())
        throw std::invalid_argument("trace_energy: dimension mismatch");
    return j.cwiseProduct(c).sum() / static_cast<double>(j.rows());
}

// (1/2N) log det J - (1/2) Tr(J C)/N; requires J positive-definite.
inline double log_likelihood(const Matrix& j, const Matrix& c) {
    if (j.rows() != c.rows() || j.rows() != j.cols())
        throw std::invalid_argument("log_likelihood: dimension mismatch");
    Eigen::LLT<Matrix> llt(j);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("log_likelihood: coupling matrix is not positive-definite");
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return 0.5 * logdet / static_cast<double>(j.rows()) - 0.5 * trace_energy(j, c);
}

// ||J - J_true||_F^2 / N.
inline double coupling_error(const Matrix& j, const Matrix& j_true) {
    if (j.rows() != j_true.rows() || j.cols() != j_true.cols())
        throw std::invalid_argument("coupling_error: dimension mismatch");
    return (j - j_true).squaredNorm() / static_cast<double>(j.rows());
}

// ||C_pop - J^-1||_F; requires J positive-definite.
inline double generation_error(const Matrix& c_pop, const Matrix& j) {
    if (j.rows() != c_pop.rows() || j.rows() != j.cols())
        throw std::invalid_argument("generation_error: dimension mismatch");
    Eigen::LLT<Matrix> llt(j);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("generation_error: coupling matrix is not positive-definite");
    const Matrix c_model = llt.solve(Matrix::Identity(j.rows(), j.cols()));
    return (c_pop - c_model).norm();
}

namespace detail {

// PSD square root through the eigendecomposition; eigenvalues in
// [-1e-10, 0) are treated as zero, anything lower is rejected.
inline Matrix psd_sqrt(const Matrix& c, const char* who) {
    numerics::EigenSystem es = numerics::sym_eig(c);
    Vector v = es.values;
    for (Index i = 0; i < v.size(); ++i) {
        if (v(i) < -1e-10) throw std::invalid_argument(std::string(who) + ": input is not PSD");
        v(i) = std::sqrt(std::max(v(i), 0.0));
    }
    return numerics::assemble(v, es.basis);
}

} // namespace detail

// Wasserstein-2 distance between zero-mean Gaussians:
// sqrt( Tr C1 + Tr C2 - 2 Tr (C1^1/2 C2 C1^1/2)^1/2 ).
inline double gaussian_w2(const Matrix& c1, const Matrix& c2) {
    if (c1.rows() != c2.rows() || c1.cols() != c2.cols() || c1.rows() != c1.cols())
        throw std::invalid_argument("gaussian_w2: dimension mismatch");
    const Matrix s1 = detail::psd_sqrt(c1, "gaussian_w2");
    const Matrix inner = s1 * c2 * s1;
    const Matrix cross = detail::psd_sqrt(((inner + inner.transpose()) * 0.5).eval(), "gaussian_w2");
    const double arg = c1.trace() + c2.trace() - 2.0 * cross.trace();
    return std::sqrt(std::max(arg, 0.0));
}

enum class OptimumSense { minimize, maximize };

// Recorded (time, value) achieving the extremum of a trajectory metric;
// ties break toward the earliest time.
inline std::pair<double, double> find_optimum(const Trajectory& traj, const std::string& metric,
                                              OptimumSense sense) {
    const auto& vals = traj.metric(metric);
    if (vals.size() < 3)
        throw std::invalid_argument("find_optimum: metric '" + metric + "' has fewer than 3 samples");
    std::size_t best = 0;
    for (std::size_t k = 1; k < vals.size(); ++k) {
        const bool better = sense == OptimumSense::minimize ? vals[k] < vals[best]
                                                            : vals[k] > vals[best];
        if (better) best = k;
    }
    return {traj.times[best], vals[best]};
}

} // namespace metrics
} // namespace ebmlab
