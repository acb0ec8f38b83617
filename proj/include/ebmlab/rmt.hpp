/*
 * rmt.hpp — asymptotic N,M -> infinity predictions for training from an
 * empirical covariance at aspect ratio rho = M/N > 1.
 *
 * For z = y - i eps on the physical branch, Gamma and Lambda obey
 *
 *   Gamma(z) = (1/rho) * sum_k w_k x_k / (z - Lambda(z) x_k),
 *   Lambda(z) = 1 / (1 - Gamma(z)),
 *
 * over the population spectrum nu = sum_k w_k delta(x_k). The empirical
 * spectral density is nu_bar(y) = rho * Im Lambda / (pi y), and energies /
 * coupling error are real-line integrals of an estimator profile j(y):
 *
 *   E_train = (rho/pi) Int j (Lr Gi + Li Gr) dy
 *   E_test  = (rho/pi) Int j Gi dy
 *   E_J     = Int nu(dx)/x^2 + Int nu_bar(dy) j [ j - (2/rho)((1-rho) + 2 rho Lr)/y ] dy
 *
 * The over-parameterized branch rho < 1 is intentionally not implemented.
 */
#pragma once

#include "gebm.hpp"
#include "numerics.hpp"

#include <cmath>
#include <complex>
#include <string>
#include <vector>

namespace ebmlab {
namespace rmt {

// Discrete population spectrum: nu = sum_k weights_k * delta(points_k).
struct DiscreteSpectrum {
    Vector points;
    Vector weights;

    static DiscreteSpectrum from_eigenvalues(const Vector& values) {
        if (values.size() == 0) throw std::invalid_argument("DiscreteSpectrum: empty spectrum");
        DiscreteSpectrum s;
        s.points = values;
        s.weights = Vector::Constant(values.size(), 1.0 / static_cast<double>(values.size()));
        return s;
    }

    double mean() const { return points.dot(weights); }
};

struct RmtOptions {
    double eps = 1e-6;     // imaginary offset of the evaluation line
    double damping = 0.5;  // fixed-point mixing factor
    double tol = 1e-11;    // residual |Gamma_new - Gamma|
    long max_iter = 50000;
};

struct RmtSolution {
    double rho = 0.0;
    Vector grid; // increasing positive abscissae
    Vector lambda_r, lambda_i, gamma_r, gamma_i;
    Vector density; // nu_bar on the grid
};

// Log-spaced grid spanning the Marchenko-Pastur-widened support with margin:
// [0.5 x_min (1 - rho^-1/2)^2, 2 x_max (1 + rho^-1/2)^2].
inline Vector default_grid(double x_min, double x_max, double rho, Index points = 2000) {
    if (!(x_min > 0.0) || !(x_max >= x_min)) throw std::invalid_argument("default_grid: bad support");
    if (points < 2) throw std::invalid_argument("default_grid: need at least 2 points");
    const double edge = 1.0 / std::sqrt(rho);
    const double lo = 0.5 * x_min * (1.0 - edge) * (1.0 - edge);
    const double hi = 2.0 * x_max * (1.0 + edge) * (1.0 + edge);
    Vector g(points);
    const double step = std::log(hi / lo) / static_cast<double>(points - 1);
    for (Index i = 0; i < points; ++i) g(i) = lo * std::exp(step * static_cast<double>(i));
    return g;
}

inline Vector default_grid(const DiscreteSpectrum& pop, double rho, Index points = 2000) {
    return default_grid(pop.points.minCoeff(), pop.points.maxCoeff(), rho, points);
}

// Solves the self-consistent pair (Gamma, Lambda) on the grid by damped
// fixed-point iteration, warm-starting each point from the previous one.
inline RmtSolution solve_self_consistent(const DiscreteSpectrum& pop, double rho, const Vector& grid,
                                         const RmtOptions& opt = {}) {
    if (!(rho > 1.0))
        throw std::invalid_argument("rmt: rho must exceed 1 (the rho < 1 branch is not implemented)");
    if (pop.points.size() != pop.weights.size() || pop.points.size() == 0)
        throw std::invalid_argument("rmt: malformed population spectrum");
    if (grid.size() < 2 || grid.minCoeff() <= 0.0)
        throw std::invalid_argument("rmt: grid must be positive with at least 2 points");

    using Complexd = std::complex<double>;
    const Index n_pop = pop.points.size();
    RmtSolution sol;
    sol.rho = rho;
    sol.grid = grid;
    sol.lambda_r.resize(grid.size());
    sol.lambda_i.resize(grid.size());
    sol.gamma_r.resize(grid.size());
    sol.gamma_i.resize(grid.size());
    sol.density.resize(grid.size());

    Complexd g(0.0, 0.1); // warm-start seed
    for (Index i = 0; i < grid.size(); ++i) {
        const Complexd z(grid(i), -opt.eps);
        double residual = 0.0;
        bool ok = false;
        for (long it = 0; it < opt.max_iter; ++it) {
            const Complexd lam = 1.0 / (1.0 - g);
            Complexd acc(0.0, 0.0);
            for (Index k = 0; k < n_pop; ++k)
                acc += pop.weights(k) * pop.points(k) / (z - lam * pop.points(k));
            const Complexd g_new = acc / rho;
            residual = std::abs(g_new - g);
            if (residual < opt.tol) {
                g = g_new;
                ok = true;
                break;
            }
            g = opt.damping * g_new + (1.0 - opt.damping) * g;
        }
        if (!ok)
            throw std::runtime_error("rmt: no convergence at y=" + std::to_string(grid(i)) +
                                     " (residual " + std::to_string(residual) + ")");
        const Complexd lam = 1.0 / (1.0 - g);
        sol.gamma_r(i) = g.real();
        sol.gamma_i(i) = g.imag();
        sol.lambda_r(i) = lam.real();
        sol.lambda_i(i) = lam.imag();
        sol.density(i) = rho * lam.imag() / (M_PI * grid(i));
    }
    return sol;
}

// Estimator profiles on the empirical spectrum. For the regularized kinds
// the parameter is the inverse penalty alpha = 1/lambda.
struct JFunctional {
    enum class Kind { time, spectral_l1, l2 };
    Kind kind = Kind::time;
    double parameter = 0.0; // t for Kind::time, alpha otherwise

    static JFunctional time(double t) { return {Kind::time, t}; }
    static JFunctional spectral_l1(double alpha) { return {Kind::spectral_l1, alpha}; }
    static JFunctional l2(double alpha) { return {Kind::l2, alpha}; }
};

inline double eval_j(const JFunctional& f, double x) {
    if (x < 0.0) throw std::domain_error("eval_j: x must be non-negative");
    if (f.parameter < 0.0) throw std::domain_error("eval_j: parameter must be non-negative");
    switch (f.kind) {
    case JFunctional::Kind::time:
        // j_t(x) = (1 + W0(-e^{-x^2 t - 1})) / x, continued to sqrt(2t) at x = 0
        if (x == 0.0) return std::sqrt(2.0 * f.parameter);
        return gebm::analytic_mode_trajectory(x, 0.0, f.parameter);
    case JFunctional::Kind::spectral_l1:
        return f.parameter / (1.0 + f.parameter * x);
    case JFunctional::Kind::l2:
        // (alpha/2)(sqrt(x^2 + 4/alpha) - x) in its cancellation-free form
        if (f.parameter == 0.0) return 0.0;
        return 2.0 / (x + std::sqrt(x * x + 4.0 / f.parameter));
    }
    throw std::logic_error("eval_j: unknown kind");
}

namespace detail {

inline double trapezoid(const Vector& x, const Vector& f) {
    double acc = 0.0;
    for (Index i = 0; i + 1 < x.size(); ++i) acc += 0.5 * (f(i) + f(i + 1)) * (x(i + 1) - x(i));
    return acc;
}

inline Vector j_on_grid(const RmtSolution& sol, const JFunctional& f) {
    Vector j(sol.grid.size());
    for (Index i = 0; i < sol.grid.size(); ++i) j(i) = eval_j(f, sol.grid(i));
    return j;
}

} // namespace detail

// Asymptotic (E_train, E_test) for the estimator profile f.
inline std::pair<double, double> asymptotic_energies(const RmtSolution& sol, const JFunctional& f) {
    const Vector j = detail::j_on_grid(sol, f);
    const Vector train_kernel =
        (sol.lambda_r.array() * sol.gamma_i.array() + sol.lambda_i.array() * sol.gamma_r.array()).matrix();
    const double e_train =
        sol.rho / M_PI * detail::trapezoid(sol.grid, j.cwiseProduct(train_kernel));
    const double e_test = sol.rho / M_PI * detail::trapezoid(sol.grid, j.cwiseProduct(sol.gamma_i));
    return {e_train, e_test};
}

// Asymptotic coupling error E_J for the estimator profile f.
inline double asymptotic_coupling_error(const RmtSolution& sol, const JFunctional& f,
                                        const DiscreteSpectrum& pop) {
    const double base = (pop.weights.array() / pop.points.array().square()).sum();
    const Vector j = detail::j_on_grid(sol, f);
    Vector integrand(sol.grid.size());
    for (Index i = 0; i < sol.grid.size(); ++i) {
        const double y = sol.grid(i);
        const double bracket =
            j(i) - 2.0 / sol.rho * ((1.0 - sol.rho) + 2.0 * sol.rho * sol.lambda_r(i)) / y;
        integrand(i) = sol.density(i) * j(i) * bracket;
    }
    return base + detail::trapezoid(sol.grid, integrand);
}

// Asymptotic test log-likelihood, (1/2) Int nu_bar log j dy - E_test / 2.
// Real-line reduction of the Cauchy-integral expression; requires j > 0 on
// the support, hence parameter > 0.
inline double asymptotic_test_ll(const RmtSolution& sol, const JFunctional& f) {
    if (!(f.parameter > 0.0)) throw std::domain_error("asymptotic_test_ll: parameter must be positive");
    const Vector j = detail::j_on_grid(sol, f);
    Vector integrand(sol.grid.size());
    for (Index i = 0; i < sol.grid.size(); ++i)
        integrand(i) = sol.density(i) * std::log(j(i));
    const double e_test = asymptotic_energies(sol, f).second;
    return 0.5 * detail::trapezoid(sol.grid, integrand) - 0.5 * e_test;
}

// Leave-one-out train/test identity for the spectral-L1 estimator.
inline double gcv_test_from_train(double e_train, double rho) {
    const double denom = 1.0 - e_train / rho;
    if (denom <= 0.0)
        throw std::domain_error("gcv_test_from_train: e_train must be below rho");
    return e_train / denom;
}

inline double gcv_train_from_test(double e_test, double rho) {
    return e_test / (1.0 + e_test / rho);
}

enum class ScanObjective { coupling_error, test_ll };

struct ScanResult {
    double best_param = 0.0;
    std::vector<double> params;
    std::vector<double> values;
};

// Evaluates the objective over a parameter grid for one functional kind and
// returns the optimizer (argmin for E_J, argmax for test LL) plus the curve.
inline ScanResult optimum_scan(const DiscreteSpectrum& pop, double rho, JFunctional::Kind kind,
                               const std::vector<double>& param_grid, ScanObjective objective,
                               const RmtOptions& opt = {}, Index grid_points = 2000) {
    if (param_grid.empty()) throw std::invalid_argument("optimum_scan: empty parameter grid");
    const Vector grid = default_grid(pop, rho, grid_points);
    const RmtSolution sol = solve_self_consistent(pop, rho, grid, opt);
    ScanResult res;
    res.params = param_grid;
    res.values.reserve(param_grid.size());
    std::size_t best = 0;
    for (std::size_t k = 0; k < param_grid.size(); ++k) {
        const JFunctional f{kind, param_grid[k]};
        const double v = objective == ScanObjective::coupling_error
                             ? asymptotic_coupling_error(sol, f, pop)
                             : asymptotic_test_ll(sol, f);
        res.values.push_back(v);
        const bool better = objective == ScanObjective::coupling_error ? v < res.values[best]
                                                                       : v > res.values[best];
        if (better) best = k;
    }
    res.best_param = param_grid[best];
    return res;
}

} // namespace rmt
} // namespace ebmlab
