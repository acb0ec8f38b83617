/*
 * ising_bm.hpp — binary-variable extension: 2D Ising ground truth, Metropolis
 * data generation and Boltzmann-machine training.
 *
 * The BM energy is E(x) = -sum_{i<j} J_ij x_i x_j with x in {-1,+1}^N and no
 * fields. Training follows the likelihood gradient
 *
 *   J <- J + gamma (C_hat - C_model)   restricted to off-diagonal entries,
 *
 * with the model correlator either from the mean-field linear response
 * C = (I - J)^-1 or from persistent Metropolis chains. Projected on the
 * empirical eigenbasis the mean-field dynamics admits the approximate
 * closed form
 *
 *   J_a(t) ~= 1 - 1/c_a - W0(B e^{-c_a^2 t}) / c_a,
 *   B = (c_a (1 - j0) - 1) e^{c_a (1 - j0) - 1},
 *
 * with fixed point 1 - 1/c_a: strong covariance modes (c_a > 1) map to
 * positive couplings, weak ones to negative couplings.
 */
#pragma once

#include "gebm.hpp"
#include "numerics.hpp"
#include "spectra.hpp"
#include "trajectory.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace ebmlab {
namespace ising {

struct IsingModel {
    int side = 0;                // lattice side L
    double coupling_scale = 0.0; // beta
    Matrix couplings;            // N x N with N = L^2, zero diagonal
};

// Periodic nearest-neighbour couplings of weight beta on the L x L torus.
// For L = 2 the two bonds joining the same pair of sites are merged into a
// single edge of weight beta.
inline IsingModel build_ising_2d(int side, double beta) {
    if (side < 2) throw std::invalid_argument("build_ising_2d: side must be >= 2");
    if (!(beta > 0.0)) throw std::invalid_argument("build_ising_2d: beta must be positive");
    const Index n = static_cast<Index>(side) * side;
    IsingModel model{side, beta, Matrix::Zero(n, n)};
    const auto at = [side](int r, int c) {
        return static_cast<Index>(((r + side) % side) * side + (c + side) % side);
    };
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            const Index i = at(r, c);
            for (const Index j : {at(r, c + 1), at(r + 1, c)}) {
                if (i == j) continue;
                model.couplings(i, j) = beta;
                model.couplings(j, i) = beta;
            }
        }
    }
    return model;
}

struct SamplerParams {
    long burn_in = 1000; // sweeps discarded before the first sample
    long thin = 10;      // sweeps between kept samples
};

// Single-site Metropolis sampler for p(x) ~ exp(sum_{i<j} J_ij x_i x_j).
// Sweeps run in site order with a cached local field; deterministic given
// the seed.
inline spectra::Dataset metropolis_sample(const Matrix& couplings, Index m,
                                          const SamplerParams& params, std::uint64_t seed) {
    if (couplings.rows() != couplings.cols())
        throw std::invalid_argument("metropolis_sample: couplings must be square");
    if (m < 1) throw std::invalid_argument("metropolis_sample: m must be >= 1");
    if (params.burn_in < 1 || params.thin < 1)
        throw std::invalid_argument("metropolis_sample: burn_in and thin must be >= 1");

    const Index n = couplings.rows();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vector x(n);
    for (Index i = 0; i < n; ++i) x(i) = unif(rng) < 0.5 ? -1.0 : 1.0;
    Vector field = couplings * x;

    const auto sweep = [&] {
        for (Index i = 0; i < n; ++i) {
            const double delta_e = 2.0 * x(i) * field(i);
            if (delta_e <= 0.0 || unif(rng) < std::exp(-delta_e)) {
                field -= 2.0 * x(i) * couplings.col(i);
                x(i) = -x(i);
            }
        }
    };

    for (long s = 0; s < params.burn_in; ++s) sweep();
    spectra::Dataset d;
    d.samples.resize(n, m);
    d.seed = seed;
    for (Index k = 0; k < m; ++k) {
        for (long s = 0; s < params.thin; ++s) sweep();
        d.samples.col(k) = x;
    }
    return d;
}

inline spectra::Dataset metropolis_sample(const IsingModel& model, Index m,
                                          const SamplerParams& params, std::uint64_t seed) {
    return metropolis_sample(model.couplings, m, params, seed);
}

struct BmState {
    Matrix coupling;   // symmetric, zero diagonal
    double time = 0.0; // t = steps * gamma
};

enum class BmGradient { mean_field, mcmc };

struct BmTrainOptions {
    double rate = 1e-2;
    long steps = 10000;
    long record_every = 100;
    BmGradient gradient = BmGradient::mean_field;
    Index chains = 64;          // persistent chains (mcmc mode)
    long sweeps_per_update = 1; // chain sweeps between parameter updates
    std::uint64_t seed = 0;     // chain initialization/updates (mcmc mode)
    bool rediagonalize = false; // record eigenvalues of J instead of the
                                // projection onto the fixed c_hat basis
    bool record_modes = true;
    gebm::MetricObserver observer;
};

// Likelihood-gradient training of the pairwise binary model from a unit-
// diagonal covariance. The diagonal gradient is zeroed (self-couplings are
// constant energy terms). In mean-field mode the run aborts with the step
// index if I - J leaves the positive-definite domain.
inline Trajectory bm_train(const Matrix& c_hat, const BmState& j0, const BmTrainOptions& opt) {
    if (c_hat.rows() != c_hat.cols() || j0.coupling.rows() != c_hat.rows() ||
        j0.coupling.rows() != j0.coupling.cols())
        throw std::invalid_argument("bm_train: dimension mismatch");
    if ((c_hat - c_hat.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("bm_train: c_hat is not symmetric");
    if (!(opt.rate > 0.0)) throw std::invalid_argument("bm_train: rate must be positive");
    if (opt.steps < 1 || opt.record_every < 1)
        throw std::invalid_argument("bm_train: steps and record_every must be >= 1");

    const Index n = c_hat.rows();
    const Matrix identity = Matrix::Identity(n, n);
    Matrix j = ((j0.coupling + j0.coupling.transpose()) * 0.5).eval();
    j.diagonal().setZero();

    const Matrix basis = opt.record_modes && !opt.rediagonalize
                             ? numerics::sym_eig(c_hat).basis
                             : Matrix();

    // persistent chains for the mcmc gradient
    Matrix chains;
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    if (opt.gradient == BmGradient::mcmc) {
        if (opt.chains < 2) throw std::invalid_argument("bm_train: need at least 2 chains");
        chains.resize(n, opt.chains);
        for (Index c = 0; c < opt.chains; ++c)
            for (Index i = 0; i < n; ++i) chains(i, c) = unif(rng) < 0.5 ? -1.0 : 1.0;
    }
    const auto advance_chains = [&] {
        for (Index c = 0; c < opt.chains; ++c) {
            Vector x = chains.col(c);
            Vector field = j * x;
            for (long s = 0; s < opt.sweeps_per_update; ++s) {
                for (Index i = 0; i < n; ++i) {
                    const double delta_e = 2.0 * x(i) * field(i);
                    if (delta_e <= 0.0 || unif(rng) < std::exp(-delta_e)) {
                        field -= 2.0 * x(i) * j.col(i);
                        x(i) = -x(i);
                    }
                }
            }
            chains.col(c) = x;
        }
    };

    Trajectory traj;
    const auto record = [&](long step) {
        const double t = static_cast<double>(step) * opt.rate;
        Vector modes;
        if (opt.record_modes) {
            if (opt.rediagonalize) {
                modes = numerics::sym_eig(j).values;
            } else {
                modes.resize(n);
                for (Index a = 0; a < n; ++a) modes(a) = basis.col(a).dot(j * basis.col(a));
            }
        }
        std::map<std::string, double> row;
        if (opt.observer) row = opt.observer(t, j);
        row["updates"] = static_cast<double>(step);
        traj.append(t, modes, row);
    };

    record(0);
    for (long step = 1; step <= opt.steps; ++step) {
        Matrix c_model;
        if (opt.gradient == BmGradient::mean_field) {
            Eigen::LLT<Matrix> llt(identity - j);
            if (llt.info() != Eigen::Success)
                throw std::runtime_error("bm_train: I - J lost positive-definiteness at step " +
                                         std::to_string(step) + " (reduce the learning rate)");
            c_model = llt.solve(identity);
        } else {
            advance_chains();
            c_model = Matrix::Zero(n, n);
            c_model.selfadjointView<Eigen::Lower>().rankUpdate(chains,
                                                               1.0 / static_cast<double>(opt.chains));
            c_model.triangularView<Eigen::StrictlyUpper>() = c_model.transpose();
        }
        Matrix grad = c_hat - c_model;
        grad.diagonal().setZero();
        j += opt.rate * grad;
        j = ((j + j.transpose()) * 0.5).eval();
        j.diagonal().setZero();
        if (step % opt.record_every == 0 || step == opt.steps) record(step);
    }
    return traj;
}

// Approximate closed-form eigenvalue trajectory of the mean-field BM
// dynamics; reduces to 1 - J_gebm(c, 1 - j0, t) and converges to 1 - 1/c.
// Requires j0 < 1 (the mean-field correlator diverges at J_a = 1).
inline double bm_analytic_mode_trajectory(double c_hat_alpha, double j0, double t) {
    if (!(c_hat_alpha > 0.0))
        throw std::domain_error("bm_analytic_mode_trajectory: c_hat_alpha must be positive");
    if (!(j0 < 1.0))
        throw std::domain_error("bm_analytic_mode_trajectory: j0 must be below 1");
    return 1.0 - gebm::analytic_mode_trajectory(c_hat_alpha, 1.0 - j0, t);
}

// Frobenius distance between the covariance of freshly generated
// configurations and a reference covariance (train or test).
inline double bm_generation_error(const BmState& model, const Matrix& reference_cov, Index n_gen,
                                  const SamplerParams& params, std::uint64_t seed) {
    if (reference_cov.rows() != model.coupling.rows() || reference_cov.rows() != reference_cov.cols())
        throw std::invalid_argument("bm_generation_error: dimension mismatch");
    const spectra::Dataset gen = metropolis_sample(model.coupling, n_gen, params, seed);
    const Matrix c_gen = spectra::empirical_covariance(gen);
    return (c_gen - reference_cov).norm();
}

} // namespace ising
} // namespace ebmlab
