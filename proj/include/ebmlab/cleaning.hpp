/*
 * cleaning.hpp — covariance eigenvalue correction protocols. Every cleaner
 * keeps the empirical eigenvectors and replaces only the eigenvalues, so the
 * output stays anchored to the basis of the input covariance.
 */
#pragma once

#include "gebm.hpp"
#include "numerics.hpp"
#include "spectra.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace ebmlab {
namespace cleaning {

enum class Method { rie, polyfit, oracle, l2_equivalent };

inline const char* method_name(Method m) {
    switch (m) {
    case Method::rie: return "rie";
    case Method::polyfit: return "polyfit";
    case Method::oracle: return "oracle";
    case Method::l2_equivalent: return "l2_equivalent";
    }
    return "?";
}

struct CleanedCovariance {
    Matrix matrix;
    Method method;
    std::string provenance; // parameters and seed used
};

namespace detail {

inline CleanedCovariance assemble_on_basis(const Vector& values, const numerics::EigenSystem& es,
                                           Method method, std::string provenance) {
    CleanedCovariance out;
    out.matrix = numerics::assemble(values, es.basis);
    out.method = method;
    out.provenance = std::move(provenance);
    return out;
}

// Clamps non-positive entries to the smallest positive entry so downstream
// training receives a positive-definite matrix.
inline void clamp_to_smallest_positive(Vector& v, const char* who) {
    double smallest = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < v.size(); ++i)
        if (v(i) > 0.0) smallest = std::min(smallest, v(i));
    if (!std::isfinite(smallest))
        throw std::runtime_error(std::string(who) + ": no positive eigenvalue to clamp to");
    for (Index i = 0; i < v.size(); ++i)
        if (v(i) <= 0.0) v(i) = smallest;
}

} // namespace detail

// Rotationally invariant estimator: eigenvalue k is shrunk to
//   xi_k = lambda_k / |1 - q + q z_k g(z_k)|^2,  z_k = lambda_k - i eta,
// with q = 1/rho, g the empirical Stieltjes transform without the self-term
// and eta = mean spacing * N^{-1/2} the kernel broadening.
inline CleanedCovariance rie_clean(const Matrix& c_hat, double rho) {
    if (!(rho > 1.0)) throw std::invalid_argument("rie_clean: rho must exceed 1");
    const numerics::EigenSystem es = numerics::sym_eig(c_hat);
    const Index n = es.values.size();
    const double q = 1.0 / rho;
    const double span = es.values(0) - es.values(n - 1);
    const double eta = std::max(span / static_cast<double>(n) / std::sqrt(static_cast<double>(n)),
                                1e-12 * std::max(1.0, std::abs(es.values(0))));
    Vector xi(n);
    for (Index k = 0; k < n; ++k) {
        const std::complex<double> z(es.values(k), -eta);
        std::complex<double> g(0.0, 0.0);
        for (Index l = 0; l < n; ++l)
            if (l != k) g += 1.0 / (z - es.values(l));
        g /= static_cast<double>(n);
        const double denom = std::norm(1.0 - q + q * z * g);
        xi(k) = es.values(k) / denom;
    }
    detail::clamp_to_smallest_positive(xi, "rie_clean");
    std::ostringstream prov;
    prov << "rie rho=" << rho << " eta=" << eta;
    return detail::assemble_on_basis(xi, es, Method::rie, prov.str());
}

// Subsampled-eigenvalue extrapolation: for every mode, the mean eigenvalue
// of covariances built from m < M samples is fitted as
//   c_a(m) = A_a m^-nu + B_a,
// and the intercepts B_a (the m -> infinity estimate) replace the empirical
// eigenvalues on the full-M basis.
inline CleanedCovariance polyfit_clean(const spectra::Dataset& dataset, double nu,
                                       const std::vector<Index>& sub_sizes, int repeats,
                                       std::uint64_t seed) {
    const Index n = dataset.n();
    const Index m_full = dataset.m();
    if (sub_sizes.size() < 2)
        throw std::invalid_argument("polyfit_clean: need at least 2 subsample sizes");
    for (const Index m : sub_sizes)
        if (m <= n || m >= m_full)
            throw std::invalid_argument("polyfit_clean: subsample sizes must satisfy N < m < M");
    if (repeats < 1) throw std::invalid_argument("polyfit_clean: repeats must be >= 1");
    if (!(nu > 0.0)) throw std::invalid_argument("polyfit_clean: nu must be positive");

    const Matrix c_full = spectra::empirical_covariance(dataset);
    const numerics::EigenSystem es = numerics::sym_eig(c_full);

    const Index n_sizes = static_cast<Index>(sub_sizes.size());
    Matrix mean_eigs(n_sizes, n);
    std::vector<Index> perm(static_cast<std::size_t>(m_full));
    for (Index i = 0; i < n_sizes; ++i) {
        const Index m = sub_sizes[static_cast<std::size_t>(i)];
        Vector acc = Vector::Zero(n);
        for (int r = 0; r < repeats; ++r) {
            std::mt19937_64 rng(numerics::derive_seed(seed, static_cast<std::uint64_t>(i) * 1000003u +
                                                                static_cast<std::uint64_t>(r)));
            for (Index k = 0; k < m_full; ++k) perm[static_cast<std::size_t>(k)] = k;
            for (Index k = 0; k < m; ++k) { // partial Fisher-Yates
                std::uniform_int_distribution<Index> pick(k, m_full - 1);
                std::swap(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(pick(rng))]);
            }
            Matrix sub(n, m);
            for (Index k = 0; k < m; ++k) sub.col(k) = dataset.samples.col(perm[static_cast<std::size_t>(k)]);
            Matrix c_sub = Matrix::Zero(n, n);
            c_sub.selfadjointView<Eigen::Lower>().rankUpdate(sub, 1.0 / static_cast<double>(m));
            c_sub.triangularView<Eigen::StrictlyUpper>() = c_sub.transpose();
            acc += numerics::sym_eig(c_sub).values;
        }
        mean_eigs.row(i) = (acc / static_cast<double>(repeats)).transpose();
    }

    // least squares per mode against x = m^-nu
    Vector x(n_sizes);
    for (Index i = 0; i < n_sizes; ++i)
        x(i) = std::pow(static_cast<double>(sub_sizes[static_cast<std::size_t>(i)]), -nu);
    const double x_bar = x.mean();
    const double denom = (x.array() - x_bar).square().sum();
    if (denom <= 0.0) throw std::invalid_argument("polyfit_clean: degenerate subsample sizes");
    Vector intercepts(n);
    for (Index a = 0; a < n; ++a) {
        const Vector y = mean_eigs.col(a);
        const double slope = ((x.array() - x_bar) * (y.array() - y.mean())).sum() / denom;
        intercepts(a) = y.mean() - slope * x_bar;
    }
    detail::clamp_to_smallest_positive(intercepts, "polyfit_clean");
    std::ostringstream prov;
    prov << "polyfit nu=" << nu << " repeats=" << repeats << " seed=" << seed << " sizes=";
    for (std::size_t k = 0; k < sub_sizes.size(); ++k)
        prov << (k ? "," : "") << sub_sizes[k];
    return detail::assemble_on_basis(intercepts, es, Method::polyfit, prov.str());
}

// Population eigenvalues on the empirical eigenvectors, rank-matched in
// descending order.
inline CleanedCovariance oracle_clean(const Vector& pop_spectrum, const Matrix& c_hat) {
    if (pop_spectrum.size() != c_hat.rows())
        throw std::invalid_argument("oracle_clean: dimension mismatch");
    const numerics::EigenSystem es = numerics::sym_eig(c_hat);
    std::vector<double> sorted(pop_spectrum.data(), pop_spectrum.data() + pop_spectrum.size());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    Vector values(pop_spectrum.size());
    for (Index i = 0; i < values.size(); ++i) values(i) = sorted[static_cast<std::size_t>(i)];
    return detail::assemble_on_basis(values, es, Method::oracle, "oracle");
}

// Shrinkage view of L2 regularization: eigenvalues become the reciprocal of
// the L2 fixed point, so unregularized training from the cleaned matrix and
// L2-regularized training from c_hat share the same fixed point.
inline CleanedCovariance l2_equivalent_clean(const Matrix& c_hat, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("l2_equivalent_clean: lambda must be positive");
    const numerics::EigenSystem es = numerics::sym_eig(c_hat);
    Vector values(es.values.size());
    for (Index a = 0; a < values.size(); ++a) {
        const double c = std::max(es.values(a), 0.0);
        values(a) = 1.0 / gebm::regularized_fixed_point(c, lambda, gebm::RegKind::l2);
    }
    std::ostringstream prov;
    prov << "l2_equivalent lambda=" << lambda;
    return detail::assemble_on_basis(values, es, Method::l2_equivalent, prov.str());
}

// Default subsample schedule: count log-spaced sizes strictly inside (N, M).
inline std::vector<Index> default_sub_sizes(Index n, Index m, int count = 8) {
    if (m <= n + 2) throw std::invalid_argument("default_sub_sizes: M too close to N");
    const double lo = static_cast<double>(n + 1);
    const double hi = static_cast<double>(m - 1);
    std::vector<Index> sizes;
    for (int i = 0; i < count; ++i) {
        const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        const Index s = static_cast<Index>(std::llround(lo * std::pow(hi / lo, f)));
        if (sizes.empty() || s > sizes.back()) sizes.push_back(s);
    }
    return sizes;
}

} // namespace cleaning
} // namespace ebmlab
