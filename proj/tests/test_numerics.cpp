#include <catch2/catch_amalgamated.hpp>

#include <ebmlab/numerics.hpp>

#include <cmath>
#include <random>

using namespace ebmlab;
using Catch::Approx;

namespace {

// Bisection oracle for w e^w = x, independent of the library implementation.
double lambert_bisect(double x) {
    double lo = -1.0, hi = 800.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid * std::exp(mid) < x)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("lambert_w0 pinned values") {
    CHECK(numerics::lambert_w0(0.0) == 0.0);
    CHECK(numerics::lambert_w0(std::exp(1.0)) == Approx(1.0).epsilon(1e-14));
    CHECK(numerics::lambert_w0(-std::exp(-1.0)) == Approx(-1.0).margin(1e-12));
    CHECK(numerics::lambert_w0(1.0) == Approx(lambert_bisect(1.0)).epsilon(1e-12));
    CHECK(numerics::lambert_w0(1.0) == Approx(0.567143290409784).epsilon(1e-12));
}

TEST_CASE("lambert_w0 domain handling") {
    CHECK_THROWS_AS(numerics::lambert_w0(-std::exp(-1.0) - 1e-11), std::domain_error);
    // within the clamp tolerance below the branch point
    CHECK(numerics::lambert_w0(-std::exp(-1.0) - 5e-13) == Approx(-1.0).margin(1e-6));
}

TEST_CASE("lambert_w0 residual bound on a log sweep") {
    // 10^4 points spanning [-1/e, 1e6]: residual |w e^w - x| <= 1e-12 max(1,|x|)
    const int n = 10000;
    const double inv_e = std::exp(-1.0);
    for (int i = 0; i < n; ++i) {
        const double f = static_cast<double>(i) / (n - 1);
        // log-spaced offset from the branch point, covering 1e-14 .. 1e6 + 1/e
        const double x = -inv_e + std::pow(10.0, -14.0 + f * 20.0);
        const double w = numerics::lambert_w0(x);
        REQUIRE(std::abs(w * std::exp(w) - x) <= 1e-12 * std::max(1.0, std::abs(x)));
        REQUIRE(w >= -1.0);
    }
}

TEST_CASE("random_orthogonal basic properties") {
    SECTION("n=1 gives a sign") {
        const Matrix q = numerics::random_orthogonal(1, 7);
        CHECK(std::abs(std::abs(q(0, 0)) - 1.0) < 1e-14);
    }
    SECTION("orthogonality at n=5") {
        const Matrix q = numerics::random_orthogonal(5, 42);
        const Matrix gram = q.transpose() * q;
        CHECK((gram - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-10);
    }
    SECTION("distinct seeds give distinct matrices, both orthogonal") {
        const Matrix a = numerics::random_orthogonal(50, 1);
        const Matrix b = numerics::random_orthogonal(50, 2);
        CHECK((a - b).cwiseAbs().maxCoeff() > 1e-3);
        CHECK((a.transpose() * a - Matrix::Identity(50, 50)).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((b.transpose() * b - Matrix::Identity(50, 50)).cwiseAbs().maxCoeff() < 1e-10);
    }
    SECTION("deterministic given seed") {
        const Matrix a = numerics::random_orthogonal(8, 99);
        const Matrix b = numerics::random_orthogonal(8, 99);
        CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("unit-norm columns") {
        const Matrix q = numerics::random_orthogonal(20, 3);
        for (Index j = 0; j < 20; ++j) CHECK(q.col(j).norm() == Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(numerics::random_orthogonal(0, 1), std::invalid_argument);
}

TEST_CASE("sym_eig contract") {
    SECTION("identity") {
        const auto es = numerics::sym_eig(Matrix::Identity(3, 3));
        CHECK(es.values(0) == Approx(1.0));
        CHECK(es.values(2) == Approx(1.0));
    }
    SECTION("diagonal ordering") {
        Matrix d = Matrix::Zero(3, 3);
        d.diagonal() << 2.0, 5.0, 1.0;
        const auto es = numerics::sym_eig(d);
        CHECK(es.values(0) == Approx(5.0));
        CHECK(es.values(1) == Approx(2.0));
        CHECK(es.values(2) == Approx(1.0));
        // basis is a signed permutation of the axes
        for (Index k = 0; k < 3; ++k) CHECK(es.basis.col(k).cwiseAbs().maxCoeff() == Approx(1.0));
    }
    SECTION("random reassembly") {
        std::mt19937_64 rng(5);
        std::normal_distribution<double> gauss;
        Matrix a(10, 10);
        for (Index i = 0; i < 10; ++i)
            for (Index j = 0; j < 10; ++j) a(i, j) = gauss(rng);
        const Matrix sym = ((a + a.transpose()) * 0.5).eval();
        const auto es = numerics::sym_eig(sym);
        const Matrix back = numerics::assemble(es);
        CHECK((back - sym).norm() / sym.norm() < 1e-10);
        CHECK((es.basis.transpose() * es.basis - Matrix::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-10);
    }
    SECTION("asymmetric input rejected") {
        Matrix bad = Matrix::Identity(3, 3);
        bad(0, 1) = 1e-6;
        CHECK_THROWS_AS(numerics::sym_eig(bad), std::invalid_argument);
    }
}

TEST_CASE("sym_eig of assemble recovers spectra across sizes") {
    for (const Index n : {2, 10, 100}) {
        for (int trial = 0; trial < (n == 100 ? 10 : 100); ++trial) {
            const std::uint64_t seed = numerics::derive_seed(2024, static_cast<std::uint64_t>(n * 1000 + trial));
            const Matrix q = numerics::random_orthogonal(n, seed);
            std::mt19937_64 rng(seed ^ 0xabcdef);
            std::uniform_real_distribution<double> unif(0.1, 10.0);
            Vector vals(n);
            for (Index i = 0; i < n; ++i) vals(i) = unif(rng);
            std::sort(vals.data(), vals.data() + n, std::greater<>());
            const auto es = numerics::sym_eig(numerics::assemble(vals, q));
            REQUIRE((es.values - vals).cwiseAbs().maxCoeff() < 1e-9 * vals(0));
        }
    }
}

TEST_CASE("sym_eig sign convention is deterministic") {
    const Matrix q = numerics::random_orthogonal(6, 11);
    Vector vals(6);
    vals << 6, 5, 4, 3, 2, 1;
    const auto es1 = numerics::sym_eig(numerics::assemble(vals, q));
    const auto es2 = numerics::sym_eig(numerics::assemble(vals, q));
    CHECK((es1.basis - es2.basis).cwiseAbs().maxCoeff() == 0.0);
    for (Index k = 0; k < 6; ++k) {
        Index imax = 0;
        es1.basis.col(k).cwiseAbs().maxCoeff(&imax);
        CHECK(es1.basis(imax, k) > 0.0);
    }
}
