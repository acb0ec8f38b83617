/*
 * gebm.hpp — Gaussian EBM training.
 *
 * The log-likelihood of a coupling matrix J against a covariance C is
 * (1/2) log det J - (1/2) Tr[J C]; gradient ascent iterates
 *
 *   J <- J + gamma (J^-1 - C - reg)
 *
 * with time measured as t = steps * gamma (tau = 1/gamma). Once J commutes
 * with C the eigenvalues evolve independently:
 *
 *   dJ_a/dt = 1/J_a - c_a   =>   J_a(t) = (1 + W0(B e^{-c_a^2 t})) / c_a,
 *   B = (c_a j0 - 1) e^{c_a j0 - 1}.
 *
 * Modes with larger c_a relax faster (timescale ~ c_a^-2) and to smaller
 * stationary values 1/c_a.
 */
#pragma once

#include "metrics.hpp"
#include "numerics.hpp"
#include "trajectory.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace ebmlab {
namespace gebm {

struct GebmState {
    Matrix coupling;   // symmetric positive-definite
    double time = 0.0; // in units of tau = 1/gamma
};

namespace detail {

// Solves w + log(w) = y for w > 0 (equivalent to w = W0(e^y)) for arguments
// too large to exponentiate.
inline double w0_of_exp(double y) {
    double w = y - std::log(y);
    for (int i = 0; i < 8; ++i) {
        const double f = w + std::log(w) - y;
        w -= f / (1.0 + 1.0 / w);
    }
    return w;
}

} // namespace detail

// Closed-form eigenvalue trajectory J(t) for one mode of the unregularized
// dynamics; j0 is the initial value, c_hat the covariance eigenvalue. The
// branch-point neighbourhood (j0 near 0, small c^2 t) is evaluated through
// series expansions to keep full relative precision.
inline double analytic_mode_trajectory(double c_hat, double j0, double t) {
    if (!(c_hat > 0.0)) throw std::domain_error("analytic_mode_trajectory: c_hat must be positive");
    if (t < 0.0) throw std::domain_error("analytic_mode_trajectory: t must be non-negative");
    if (j0 < 0.0) throw std::domain_error("analytic_mode_trajectory: j0 must be non-negative");

    const double s = c_hat * c_hat * t;
    const double g = c_hat * j0;

    if (g >= 1.0) {
        const double a = g - 1.0; // B = a e^a >= 0
        if (a == 0.0) return 1.0 / c_hat;
        const double log_arg = std::log(a) + a - s;
        const double w = log_arg > 600.0 ? detail::w0_of_exp(log_arg)
                                         : numerics::lambert_w0(a * std::exp(a - s));
        return (1.0 + w) / c_hat;
    }

    // B in [-1/e, 0): track the distance of the W0 argument from -1/e.
    // With beta = -e B = (1-g) e^g, the distance is
    //   delta = 1 - beta e^{-s} = (g e^g - expm1(g)) + beta (-expm1(-s)).
    const double beta = (1.0 - g) * std::exp(g);
    const double one_minus_beta = g * std::exp(g) - std::expm1(g);
    const double delta = one_minus_beta + beta * (-std::expm1(-s));
    double one_plus_w;
    if (delta < 1e-8) {
        one_plus_w = numerics::detail::one_plus_w0_near_branch(delta);
    } else {
        constexpr double inv_e = 0.36787944117144233;
        one_plus_w = 1.0 + numerics::lambert_w0(-(1.0 - delta) * inv_e);
    }
    return one_plus_w / c_hat;
}

// Score-matching closed form j_t(x) = (1 - e^{-x t})/x, continuous at x = 0.
inline double score_matching_j(double x, double t) {
    if (t < 0.0) throw std::domain_error("score_matching_j: t must be non-negative");
    if (x == 0.0) return t;
    return -std::expm1(-x * t) / x;
}

enum class RegKind { none, l2, spectral_l1 };

struct Regularization {
    RegKind kind = RegKind::none;
    double lambda = 0.0;
};

// Stationary eigenvalue of the regularized dynamics:
//   l2:          1/J - c - lambda J = 0  =>  (-c + sqrt(c^2 + 4 lambda)) / (2 lambda)
//   spectral_l1: 1/J - c - lambda   = 0  =>  1 / (c + lambda)
inline double regularized_fixed_point(double c, double lambda, RegKind kind) {
    if (c < 0.0) throw std::domain_error("regularized_fixed_point: c must be non-negative");
    if (lambda < 0.0) throw std::domain_error("regularized_fixed_point: lambda must be non-negative");
    if (kind == RegKind::l2) {
        if (lambda == 0.0) {
            if (c == 0.0) throw std::domain_error("regularized_fixed_point: c and lambda both zero");
            return 1.0 / c;
        }
        // 2/(c + sqrt(c^2+4l)) is the cancellation-free form of the root
        return 2.0 / (c + std::sqrt(c * c + 4.0 * lambda));
    }
    if (kind == RegKind::spectral_l1) {
        if (c + lambda <= 0.0)
            throw std::domain_error("regularized_fixed_point: c and lambda both zero");
        return 1.0 / (c + lambda);
    }
    throw std::domain_error("regularized_fixed_point: unregularized kind");
}

// RK4 integration of tau dJ/dt = 1/J - c - lambda J on the given time grid;
// no closed form exists for the L2-regularized trajectory. The grid must be
// non-decreasing and start at t >= 0 (the value at t = 0 is j0).
inline std::vector<double> l2_mode_dynamics(double c, double j0, double lambda,
                                            const std::vector<double>& t_grid,
                                            double step = 1e-3) {
    if (!(c > 0.0)) throw std::domain_error("l2_mode_dynamics: c must be positive");
    if (!(j0 > 0.0)) throw std::domain_error("l2_mode_dynamics: j0 must be positive");
    if (!(step > 0.0)) throw std::domain_error("l2_mode_dynamics: step must be positive");
    const auto rhs = [c, lambda](double j) { return 1.0 / j - c - lambda * j; };
    std::vector<double> out;
    out.reserve(t_grid.size());
    double t = 0.0, j = j0;
    for (double target : t_grid) {
        if (target < t) throw std::invalid_argument("l2_mode_dynamics: t_grid must be non-decreasing");
        while (t < target) {
            const double remaining = target - t;
            const long chunks = static_cast<long>(std::ceil(remaining / step));
            const double h = remaining / static_cast<double>(chunks);
            const double k1 = rhs(j);
            const double k2 = rhs(j + 0.5 * h * k1);
            const double k3 = rhs(j + 0.5 * h * k2);
            const double k4 = rhs(j + h * k3);
            j += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += h;
            if (!(j > 0.0))
                throw std::runtime_error("l2_mode_dynamics: mode left the positive domain at t=" +
                                         std::to_string(t));
        }
        out.push_back(j);
    }
    return out;
}

// Instantaneous eigenvector rotation generator: entry (a,b) is
// c_ab / (J_a - J_b) in J's eigenbasis, zero on the diagonal. Vanishes
// exactly when j and c_hat commute.
inline Matrix eigenvector_rotation_rate(const Matrix& j, const Matrix& c_hat) {
    if (j.rows() != c_hat.rows() || j.cols() != c_hat.cols())
        throw std::invalid_argument("eigenvector_rotation_rate: dimension mismatch");
    const numerics::EigenSystem es = numerics::sym_eig(j);
    const Index n = es.values.size();
    for (Index a = 0; a + 1 < n; ++a)
        if (es.values(a) - es.values(a + 1) <= 1e-10)
            throw std::invalid_argument("eigenvector_rotation_rate: eigenvalues " + std::to_string(a + 1) +
                                        " and " + std::to_string(a + 2) + " are degenerate");
    const Matrix c_proj = es.basis.transpose() * c_hat * es.basis;
    Matrix omega = Matrix::Zero(n, n);
    for (Index a = 0; a < n; ++a)
        for (Index b = 0; b < n; ++b)
            if (a != b) omega(a, b) = c_proj(a, b) / (es.values(a) - es.values(b));
    return omega;
}

using MetricObserver = std::function<std::map<std::string, double>(double t, const Matrix& j)>;

struct TrainOptions {
    double rate = 1e-3;        // learning rate gamma; tau = 1/gamma
    long steps = 10000;
    Regularization reg{};
    bool diag_double = false;  // double the diagonal step (symmetric-perturbation compensation)
    long record_every = 100;
    bool record_modes = true;
    MetricObserver observer;   // extra per-record metric columns
};

// Full-matrix gradient ascent on the (optionally regularized) likelihood.
// Aborts with the offending step index if J loses positive-definiteness,
// which signals an over-large learning rate.
inline Trajectory gradient_ascent_train(const Matrix& c_hat, const Matrix& j0,
                                        const TrainOptions& opt) {
    if (c_hat.rows() != c_hat.cols() || j0.rows() != j0.cols() || c_hat.rows() != j0.rows())
        throw std::invalid_argument("gradient_ascent_train: dimension mismatch");
    if ((c_hat - c_hat.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("gradient_ascent_train: c_hat is not symmetric");
    if ((j0 - j0.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("gradient_ascent_train: j0 is not symmetric");
    if (!(opt.rate > 0.0)) throw std::invalid_argument("gradient_ascent_train: rate must be positive");
    if (opt.steps < 1 || opt.record_every < 1)
        throw std::invalid_argument("gradient_ascent_train: steps and record_every must be >= 1");

    const Index n = c_hat.rows();
    const Matrix identity = Matrix::Identity(n, n);
    Matrix j = ((j0 + j0.transpose()) * 0.5).eval();

    Trajectory traj;
    const auto record = [&](long step) {
        const double t = static_cast<double>(step) * opt.rate;
        Vector modes;
        if (opt.record_modes) modes = numerics::sym_eig(j).values;
        std::map<std::string, double> row;
        if (opt.observer) row = opt.observer(t, j);
        traj.append(t, modes, row);
    };

    record(0);
    for (long step = 1; step <= opt.steps; ++step) {
        Eigen::LLT<Matrix> llt(j);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("gradient_ascent_train: coupling lost positive-definiteness at step " +
                                     std::to_string(step) + " (reduce the learning rate)");
        Matrix grad = llt.solve(identity);
        grad -= c_hat;
        if (opt.reg.kind == RegKind::l2)
            grad -= opt.reg.lambda * j;
        else if (opt.reg.kind == RegKind::spectral_l1)
            grad.diagonal().array() -= opt.reg.lambda;
        Matrix delta = opt.rate * grad;
        if (opt.diag_double) delta.diagonal() *= 2.0;
        j += delta;
        j = ((j + j.transpose()) * 0.5).eval();
        if (step % opt.record_every == 0 || step == opt.steps) record(step);
    }
    return traj;
}

// Spectral fast path for aligned initializations: when J(0) commutes with
// c_hat (identity, zero or any function of c_hat), J(t) keeps c_hat's
// eigenbasis and each mode follows the closed form. Returns the mode values
// at the requested times for the given covariance eigenvalues.
inline Matrix analytic_mode_values(const Vector& c_eigs, const Vector& j0_modes,
                                   const std::vector<double>& times) {
    if (c_eigs.size() != j0_modes.size())
        throw std::invalid_argument("analytic_mode_values: dimension mismatch");
    Matrix out(static_cast<Index>(times.size()), c_eigs.size());
    for (std::size_t k = 0; k < times.size(); ++k)
        for (Index a = 0; a < c_eigs.size(); ++a)
            out(static_cast<Index>(k), a) = analytic_mode_trajectory(c_eigs(a), j0_modes(a), times[k]);
    return out;
}

} // namespace gebm
} // namespace ebmlab
