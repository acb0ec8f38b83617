#include <catch2/catch_amalgamated.hpp>

#include <ebmlab/metrics.hpp>
#include <ebmlab/rmt.hpp>
#include <ebmlab/spectra.hpp>

#include <cmath>

using namespace ebmlab;
using Catch::Approx;

namespace {

// Closed-form Marchenko-Pastur density for an identity population at
// aspect ratio rho (q = 1/rho), coded independently of the solver.
double mp_density(double y, double rho) {
    const double q = 1.0 / rho;
    const double lo = (1.0 - std::sqrt(q)) * (1.0 - std::sqrt(q));
    const double hi = (1.0 + std::sqrt(q)) * (1.0 + std::sqrt(q));
    if (y <= lo || y >= hi) return 0.0;
    return std::sqrt((hi - y) * (y - lo)) / (2.0 * M_PI * q * y);
}

rmt::DiscreteSpectrum delta_at(double x) {
    rmt::DiscreteSpectrum s;
    s.points = Vector::Constant(1, x);
    s.weights = Vector::Constant(1, 1.0);
    return s;
}

double trapz(const Vector& x, const Vector& f) {
    double acc = 0.0;
    for (Index i = 0; i + 1 < x.size(); ++i) acc += 0.5 * (f(i) + f(i + 1)) * (x(i + 1) - x(i));
    return acc;
}

const spectra::PowerLawSpectrumParams kRmtSpectrum{0.5, 1.0, 0.5, 0.1, 10.0};

} // namespace

TEST_CASE("solver reproduces the Marchenko-Pastur density") {
    const double rho = 4.0;
    const Vector grid = Vector::LinSpaced(1200, 0.02, 3.0);
    const auto sol = rmt::solve_self_consistent(delta_at(1.0), rho, grid);

    const double lo = 0.25, hi = 2.25;
    const double margin = 0.05 * (hi - lo);
    double worst = 0.0;
    for (Index i = 0; i < grid.size(); ++i) {
        if (grid(i) < lo + margin || grid(i) > hi - margin) continue;
        worst = std::max(worst, std::abs(sol.density(i) - mp_density(grid(i), rho)));
    }
    CHECK(worst < 1e-3);
    CHECK(sol.lambda_i.minCoeff() >= -1e-12);
    CHECK(sol.gamma_i.minCoeff() >= -1e-12);
    CHECK(trapz(grid, sol.density) == Approx(1.0).margin(1e-3));
}

TEST_CASE("density normalization and trace conservation for a delta population") {
    for (const double c : {0.5, 2.0}) {
        const double rho = 2.5;
        const auto grid = rmt::default_grid(c, c, rho);
        const auto sol = rmt::solve_self_consistent(delta_at(c), rho, grid);
        CHECK(trapz(grid, sol.density) == Approx(1.0).margin(1e-3));
        CHECK(trapz(grid, sol.grid.cwiseProduct(sol.density)) == Approx(c).margin(1e-3 * c));
    }
}

TEST_CASE("huge rho concentrates the spectrum on the population support") {
    const auto sol = rmt::solve_self_consistent(delta_at(1.0), 1e6, rmt::default_grid(1.0, 1.0, 1e6, 4000));
    double mass_near = 0.0, mass_total = 0.0;
    for (Index i = 0; i + 1 < sol.grid.size(); ++i) {
        const double seg = 0.5 * (sol.density(i) + sol.density(i + 1)) * (sol.grid(i + 1) - sol.grid(i));
        const double mid = 0.5 * (sol.grid(i) + sol.grid(i + 1));
        mass_total += seg;
        if (std::abs(mid - 1.0) <= 0.01) mass_near += seg;
    }
    CHECK(mass_near / mass_total > 0.95);
}

TEST_CASE("solver input validation") {
    CHECK_THROWS_WITH(rmt::solve_self_consistent(delta_at(1.0), 0.8, rmt::default_grid(1.0, 1.0, 2.0)),
                      Catch::Matchers::ContainsSubstring("rho"));
}

TEST_CASE("normalization and first moment for a power-law population") {
    const Vector pop_vals = spectra::power_law_spectrum(kRmtSpectrum, 400);
    const auto pop = rmt::DiscreteSpectrum::from_eigenvalues(pop_vals);
    const auto grid = rmt::default_grid(pop, 1.5);
    const auto sol = rmt::solve_self_consistent(pop, 1.5, grid);
    CHECK(trapz(grid, sol.density) == Approx(1.0).margin(1e-3));
    CHECK(trapz(grid, sol.grid.cwiseProduct(sol.density)) == Approx(pop.mean()).margin(1e-3 * pop.mean()));
}

TEST_CASE("eval_j profiles") {
    SECTION("time functional") {
        CHECK(rmt::eval_j(rmt::JFunctional::time(1e8), 1.0) == Approx(1.0).epsilon(1e-8));
        CHECK(rmt::eval_j(rmt::JFunctional::time(1.0), 1.0) ==
              Approx(1.0 + numerics::lambert_w0(-std::exp(-2.0))).epsilon(1e-12));
        CHECK(rmt::eval_j(rmt::JFunctional::time(2.0), 0.0) == Approx(std::sqrt(4.0)).epsilon(1e-12));
        CHECK(rmt::eval_j(rmt::JFunctional::time(0.0), 3.0) == 0.0);
    }
    SECTION("spectral L1 functional") {
        CHECK(rmt::eval_j(rmt::JFunctional::spectral_l1(1e12), 2.0) == Approx(0.5).epsilon(1e-10));
        CHECK(rmt::eval_j(rmt::JFunctional::spectral_l1(1.0), 1.0) == Approx(0.5));
    }
    SECTION("l2 functional matches the fixed-point formula") {
        for (const double alpha : {0.2, 1.0, 40.0})
            for (const double x : {0.0, 0.3, 2.0}) {
                const double expected =
                    gebm::regularized_fixed_point(x, 1.0 / alpha, gebm::RegKind::l2);
                CHECK(rmt::eval_j(rmt::JFunctional::l2(alpha), x) == Approx(expected).epsilon(1e-12));
            }
    }
}

TEST_CASE("asymptotic energies limits") {
    const Vector pop_vals = spectra::power_law_spectrum(kRmtSpectrum, 400);
    const auto pop = rmt::DiscreteSpectrum::from_eigenvalues(pop_vals);
    SECTION("E_train -> 1 at the ML fixed point") {
        const auto sol = rmt::solve_self_consistent(pop, 1.5, rmt::default_grid(pop, 1.5));
        const auto [etr, ete] = rmt::asymptotic_energies(sol, rmt::JFunctional::time(1e9));
        CHECK(etr == Approx(1.0).margin(2e-3));
        CHECK(ete > etr); // overfitting gap at finite rho
    }
    SECTION("E_test -> 1 when rho is large as well") {
        const auto sol = rmt::solve_self_consistent(pop, 2000.0, rmt::default_grid(pop, 2000.0));
        const auto [etr, ete] = rmt::asymptotic_energies(sol, rmt::JFunctional::time(1e9));
        CHECK(ete == Approx(1.0).margin(5e-3));
    }
}

TEST_CASE("asymptotic coupling error limits") {
    const Vector pop_vals = spectra::power_law_spectrum(kRmtSpectrum, 400);
    const auto pop = rmt::DiscreteSpectrum::from_eigenvalues(pop_vals);
    const double base = (pop.weights.array() / pop.points.array().square()).sum();
    SECTION("t = 0 gives the J = 0 baseline") {
        const auto sol = rmt::solve_self_consistent(pop, 1.5, rmt::default_grid(pop, 1.5));
        CHECK(rmt::asymptotic_coupling_error(sol, rmt::JFunctional::time(0.0), pop) ==
              Approx(base).epsilon(1e-10));
    }
    SECTION("large rho and t recovers the couplings") {
        const auto sol = rmt::solve_self_consistent(pop, 5000.0, rmt::default_grid(pop, 5000.0));
        const double err = rmt::asymptotic_coupling_error(sol, rmt::JFunctional::time(1e8), pop);
        CHECK(err < 0.02 * base);
    }
}

TEST_CASE("gcv identities") {
    CHECK(rmt::gcv_test_from_train(0.0, 2.0) == 0.0);
    CHECK(rmt::gcv_test_from_train(0.7, 1e9) == Approx(0.7).epsilon(1e-8));
    CHECK(rmt::gcv_train_from_test(rmt::gcv_test_from_train(0.6, 1.8), 1.8) ==
          Approx(0.6).epsilon(1e-12));
    CHECK_THROWS_AS(rmt::gcv_test_from_train(2.0, 1.5), std::domain_error);
}

TEST_CASE("gcv matches a finite-size spectral-L1 experiment") {
    // cross-module test: trace_energy on the spectral-L1 fixed point obeys
    // the train/test identity within sampling error
    const Index n = 200;
    const double rho = 2.0;
    const spectra::PowerLawSpectrumParams params{0.9, 0.9, 1.1, 0.1, 10.0};
    const Vector pop = spectra::power_law_spectrum(params, n);
    double rel_acc = 0.0;
    const int n_seeds = 5;
    for (int seed = 0; seed < n_seeds; ++seed) {
        const Matrix q = numerics::random_orthogonal(n, numerics::derive_seed(90, seed));
        const Matrix c_pop = spectra::assemble_covariance(pop, q);
        const auto data = spectra::sample_gaussian(c_pop, static_cast<Index>(rho * n),
                                                   numerics::derive_seed(91, seed));
        const Matrix c_hat = spectra::empirical_covariance(data);
        const auto es = numerics::sym_eig(c_hat);
        Vector j_modes(n);
        for (Index a = 0; a < n; ++a)
            j_modes(a) = gebm::regularized_fixed_point(std::max(es.values(a), 0.0), 1.0,
                                                       gebm::RegKind::spectral_l1);
        const Matrix j = numerics::assemble(j_modes, es.basis);
        const double e_train = metrics::trace_energy(j, c_hat);
        const double e_test = metrics::trace_energy(j, c_pop);
        rel_acc += std::abs(e_test - rmt::gcv_test_from_train(e_train, rho)) / e_test;
    }
    CHECK(rel_acc / n_seeds < 0.03);
}

TEST_CASE("optimum scan") {
    const Vector pop_vals = spectra::power_law_spectrum(kRmtSpectrum, 300);
    const auto pop = rmt::DiscreteSpectrum::from_eigenvalues(pop_vals);
    SECTION("monotone objective flags a boundary optimum") {
        // E_J along the time functional decreases monotonically at huge rho
        std::vector<double> ts;
        for (int k = 0; k < 12; ++k) ts.push_back(0.01 * std::pow(10.0, k * 0.5));
        const auto res = rmt::optimum_scan(pop, 500.0, rmt::JFunctional::Kind::time, ts,
                                           rmt::ScanObjective::coupling_error, {}, 1200);
        CHECK(res.best_param == ts.back());
    }
    SECTION("optimal lambda for E_J and test LL differ at rho=1.5") {
        std::vector<double> alphas;
        for (int k = 0; k < 41; ++k) alphas.push_back(0.01 * std::pow(1e5 / 0.01, k / 40.0));
        const auto ej = rmt::optimum_scan(pop, 1.5, rmt::JFunctional::Kind::l2, alphas,
                                          rmt::ScanObjective::coupling_error, {}, 1200);
        const auto ll = rmt::optimum_scan(pop, 1.5, rmt::JFunctional::Kind::l2, alphas,
                                          rmt::ScanObjective::test_ll, {}, 1200);
        CHECK(ej.best_param != ll.best_param);
        // interior optima on this grid
        CHECK(ej.best_param > alphas.front());
        CHECK(ej.best_param < alphas.back());
    }
    SECTION("optimal lambda vanishes as rho grows") {
        std::vector<double> alphas;
        for (int k = 0; k < 41; ++k) alphas.push_back(0.01 * std::pow(1e5 / 0.01, k / 40.0));
        const auto low = rmt::optimum_scan(pop, 1.5, rmt::JFunctional::Kind::l2, alphas,
                                           rmt::ScanObjective::coupling_error, {}, 1200);
        const auto high = rmt::optimum_scan(pop, 50.0, rmt::JFunctional::Kind::l2, alphas,
                                            rmt::ScanObjective::coupling_error, {}, 1200);
        // larger alpha = smaller lambda
        CHECK(high.best_param > low.best_param);
    }
}
