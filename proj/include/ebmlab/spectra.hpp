/*
 * spectra.hpp — synthetic population covariances, Gaussian sampling,
 * empirical covariance estimation and eigenvector-conservation diagnostics.
 *
 * Population eigenvalues follow a two-segment power-law mixture: a fraction
 * r of "weak" modes in (x1, 1) with exponent beta and the rest in (1, x2)
 * with exponent gamma. Sampling uses the inverse CDF
 *
 *   u <  r :  x = x1 + (1 - x1) (u/r)^(1/beta)
 *   u >= r :  x = 1 + (x2 - 1) ((u - r)/(1 - r))^(1/gamma)
 */
#pragma once

#include "numerics.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace ebmlab {
namespace spectra {

struct PowerLawSpectrumParams {
    double r = 0.9;     // fraction of weak modes, in (0,1)
    double beta = 0.9;  // weak-segment exponent, > 0
    double gamma = 1.1; // strong-segment exponent, > 0
    double x1 = 0.1;    // lower cutoff, in (0,1)
    double x2 = 10.0;   // upper cutoff, > 1

    void validate() const {
        if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("power-law params: r must be in (0,1)");
        if (!(beta > 0.0) || !(gamma > 0.0))
            throw std::invalid_argument("power-law params: beta and gamma must be positive");
        if (!(x1 > 0.0 && x1 < 1.0)) throw std::invalid_argument("power-law params: x1 must be in (0,1)");
        if (!(x2 > 1.0)) throw std::invalid_argument("power-law params: x2 must be > 1");
    }
};

enum class SpectrumMode { quantile, random };

// Inverse CDF of the power-law mixture, u in [0,1).
inline double power_law_inverse_cdf(const PowerLawSpectrumParams& p, double u) {
    if (u < p.r) return p.x1 + (1.0 - p.x1) * std::pow(u / p.r, 1.0 / p.beta);
    return 1.0 + (p.x2 - 1.0) * std::pow((u - p.r) / (1.0 - p.r), 1.0 / p.gamma);
}

// n eigenvalues in (x1, x2), descending. Quantile mode takes u = (a-1/2)/n
// (deterministic); random mode draws u uniformly from the given seed.
inline Vector power_law_spectrum(const PowerLawSpectrumParams& params, Index n,
                                 SpectrumMode mode = SpectrumMode::quantile,
                                 std::uint64_t seed = 0) {
    params.validate();
    if (n < 2) throw std::invalid_argument("power_law_spectrum: n must be >= 2");
    std::vector<double> vals(static_cast<std::size_t>(n));
    if (mode == SpectrumMode::quantile) {
        for (Index a = 0; a < n; ++a)
            vals[static_cast<std::size_t>(a)] =
                power_law_inverse_cdf(params, (static_cast<double>(a) + 0.5) / static_cast<double>(n));
    } else {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (auto& v : vals) v = power_law_inverse_cdf(params, unif(rng));
    }
    std::sort(vals.begin(), vals.end(), std::greater<>());
    Vector out(n);
    for (Index a = 0; a < n; ++a) out(a) = vals[static_cast<std::size_t>(a)];
    return out;
}

// Sigma_a c_a u_a u_a^T for a positive spectrum; exact eigensystem by
// construction.
inline Matrix assemble_covariance(const Vector& spectrum, const Matrix& basis) {
    if (basis.rows() != basis.cols() || spectrum.size() != basis.cols())
        throw std::invalid_argument("assemble_covariance: dimension mismatch");
    if (spectrum.size() == 0 || spectrum.minCoeff() <= 0.0)
        throw std::invalid_argument("assemble_covariance: spectrum must be positive");
    return numerics::assemble(spectrum, basis);
}

struct Dataset {
    Matrix samples; // one column per sample, N x M
    std::uint64_t seed = 0;

    Index n() const { return samples.rows(); }
    Index m() const { return samples.cols(); }
};

// m i.i.d. zero-mean Gaussian vectors with the given population covariance,
// built as x = sum_a sqrt(c_a) v_a z_a with z standard normal.
inline Dataset sample_gaussian(const Matrix& cov, Index m, std::uint64_t seed) {
    if (m < 1) throw std::invalid_argument("sample_gaussian: m must be >= 1");
    const numerics::EigenSystem es = numerics::sym_eig(cov);
    if (es.values.minCoeff() <= 0.0)
        throw std::invalid_argument("sample_gaussian: covariance is not positive-definite");
    const Index n = cov.rows();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix z(n, m);
    for (Index col = 0; col < m; ++col)
        for (Index row = 0; row < n; ++row)
            z(row, col) = gauss(rng);
    Dataset d;
    d.samples = (es.basis * es.values.cwiseSqrt().asDiagonal()) * z;
    d.seed = seed;
    return d;
}

// (1/M) sum_mu x x^T. Means are assumed zero unless subtract_mean is set.
inline Matrix empirical_covariance(const Dataset& d, bool subtract_mean = false) {
    if (d.m() < 1) throw std::invalid_argument("empirical_covariance: empty dataset");
    const double inv_m = 1.0 / static_cast<double>(d.m());
    Matrix c = Matrix::Zero(d.n(), d.n());
    if (subtract_mean) {
        const Vector mean = d.samples.rowwise().mean();
        const Matrix centered = d.samples.colwise() - mean;
        c.selfadjointView<Eigen::Lower>().rankUpdate(centered, inv_m);
    } else {
        c.selfadjointView<Eigen::Lower>().rankUpdate(d.samples, inv_m);
    }
    c.triangularView<Eigen::StrictlyUpper>() = c.transpose();
    return c;
}

// Entry (n, alpha) = || P_n^T u_alpha || where P_n stacks the first n
// reference eigenvectors; rows are cumulative in n, columns are the test
// modes. Every entry lies in [0,1] and row n = N is identically 1.
inline Matrix eigenvector_conservation(const Matrix& ref_basis, const Matrix& test_basis) {
    if (ref_basis.rows() != test_basis.rows() || ref_basis.cols() != test_basis.cols() ||
        ref_basis.rows() != ref_basis.cols())
        throw std::invalid_argument("eigenvector_conservation: dimension mismatch");
    const Index n = ref_basis.rows();
    const Matrix overlap = ref_basis.transpose() * test_basis; // (k, alpha)
    Matrix out(n, n);
    for (Index alpha = 0; alpha < n; ++alpha) {
        double acc = 0.0;
        for (Index k = 0; k < n; ++k) {
            acc += overlap(k, alpha) * overlap(k, alpha);
            out(k, alpha) = std::sqrt(std::min(acc, 1.0));
        }
    }
    return out;
}

// Spectrum CSV: one positive value per line, '.' decimal separator, an
// optional single header line. Returned descending.
inline Vector load_spectrum_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_spectrum_csv: cannot open " + path);
    std::vector<double> vals;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string trimmed = line;
        trimmed.erase(trimmed.find_last_not_of(" \t\r\n") + 1);
        trimmed.erase(0, trimmed.find_first_not_of(" \t"));
        if (trimmed.empty()) continue;
        std::size_t pos = 0;
        double v = 0.0;
        bool parsed = true;
        try {
            v = std::stod(trimmed, &pos);
        } catch (const std::exception&) {
            parsed = false;
        }
        if (parsed && pos != trimmed.size()) parsed = false;
        if (!parsed) {
            if (line_no == 1 && vals.empty()) continue; // header line
            throw std::runtime_error("load_spectrum_csv: parse error at " + path + ":" +
                                     std::to_string(line_no) + " ('" + trimmed + "')");
        }
        if (v <= 0.0)
            throw std::runtime_error("load_spectrum_csv: non-positive value at " + path + ":" +
                                     std::to_string(line_no));
        vals.push_back(v);
    }
    if (vals.empty()) throw std::runtime_error("load_spectrum_csv: no values in " + path);
    std::sort(vals.begin(), vals.end(), std::greater<>());
    Vector out(static_cast<Index>(vals.size()));
    for (Index i = 0; i < out.size(); ++i) out(i) = vals[static_cast<std::size_t>(i)];
    return out;
}

inline void save_spectrum_csv(const std::string& path, const Vector& spectrum) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_spectrum_csv: cannot open " + path);
    char buf[40];
    for (Index i = 0; i < spectrum.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", spectrum(i));
        out << buf << '\n';
    }
}

} // namespace spectra
} // namespace ebmlab
