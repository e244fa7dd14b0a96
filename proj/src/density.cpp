#include "ume/density.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>

#include "ume/mcharness.hpp"

namespace ume {

namespace {
constexpr double kPi = std::numbers::pi;
}

double integrate(const RealFn& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, tol);
}

double integrate_endpoint_singular(const RealFn& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate(f, a, b, tol);
}

double semicircle(double eps) {
    if (std::abs(eps) >= 1.0) return 0.0;
    return 2.0 / kPi * std::sqrt(1.0 - eps * eps);
}

MeanDensityValue ume_mean_density_checked(double eps, int N) {
    if (N < 3) throw InvalidDimension("ume_mean_density needs N >= 3");
    if (std::abs(eps) > 1.0) return {0.0, true};
    const double num = 2.0 / kPi * std::sqrt(std::max(0.0, 1.0 - eps * eps));
    const double den = 1.0 + 1.0 / (N - 2.0) - 4.0 * eps * eps / (N - 1.0);
    // The denominator is 2(1 - eps^2) at N = 3 and strictly positive for N > 3.
    if (den <= 0.0) return {0.0, false};
    return {num / den, true};
}

double ume_mean_density(double eps, int N) { return ume_mean_density_checked(eps, N).value; }

double gue_finite_density_unscaled(double energy, int N) {
    if (N < 1) throw InvalidDimension("gue_finite_density needs N >= 1");
    // Normalized oscillator functions for the weight exp(-x^2/2):
    // phi_{k+1} = (x phi_k - sqrt(k) phi_{k-1}) / sqrt(k+1).
    double prev = 0.0;
    double cur = std::exp(-0.25 * energy * energy) / std::pow(2.0 * kPi, 0.25);
    double acc = cur * cur;
    for (int k = 0; k + 1 < N; ++k) {
        const double next = (energy * cur - std::sqrt(static_cast<double>(k)) * prev) / std::sqrt(k + 1.0);
        prev = cur;
        cur = next;
        acc += cur * cur;
    }
    return acc / N;
}

double gue_finite_density(double x, int N) {
    const double s = std::sqrt(static_cast<double>(N));
    return s * gue_finite_density_unscaled(s * x, N);
}

OscillationValue gue_density_oscillation(double x, int N) {
    if (std::abs(x) >= 2.0) throw DomainError("gue_density_oscillation: |x| must be < 2");
    const double r = std::sqrt(1.0 - 0.25 * x * x);
    const double phase = N * x * r + 2.0 * N * std::atan2(-2.0 * r, x);
    const double amp = 1.0 / (N * kPi * (1.0 - 0.25 * x * x));
    const std::complex<double> v = std::polar(amp, phase);
    return {v, v.real(), amp};
}

double delta_kernel_prefactor(double xi) { return 1.0 / (1.0 + 0.5 * kPi * std::sqrt(1.0 - xi * xi)); }

void check_delta_band(double xi, int nstar, double c) {
    if (nstar < 1) throw DomainError("delta_kernel: N* must be >= 1");
    if (!(std::abs(xi) < 1.0 - c / nstar)) throw DomainError("delta_kernel: xi outside |xi| < 1 - c/N*");
}

double delta_kernel(double x, double xi, int nstar, double c) {
    check_delta_band(xi, nstar, c);
    double a0 = 1.0, a1 = x, b0 = 1.0, b1 = xi;
    double acc = 1.0 + (nstar >= 1 ? x * xi : 0.0);
    for (int m = 2; m <= nstar; ++m) {
        const double a2 = 2.0 * x * a1 - a0, b2 = 2.0 * xi * b1 - b0;
        acc += a2 * b2;
        a0 = a1, a1 = a2, b0 = b1, b1 = b2;
    }
    return acc * delta_kernel_prefactor(xi);
}

ChebyshevCoefficients chebyshev_coefficients(const RealFn& f, int m_max, int nodes) {
    if (m_max < 0) throw DomainError("chebyshev_coefficients: m_max < 0");
    const int k = std::max({nodes, 4 * m_max, 8});
    ChebyshevCoefficients out{m_max, std::vector<double>(static_cast<std::size_t>(m_max) + 1, 0.0)};
    for (int j = 0; j < k; ++j) {
        const double theta = kPi * (j + 0.5) / k;
        const double v = f(std::cos(theta));
        for (int m = 0; m <= m_max; ++m) out.f[m] += v * std::cos(m * theta);
    }
    for (int m = 0; m <= m_max; ++m) out.f[m] *= (m == 0 ? 1.0 : 2.0) / k;
    return out;
}

double Polynomial::operator()(double x) const {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
}

Polynomial chebyshev_polynomial(int n) {
    Polynomial p{std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0)};
    const auto d = chebyshev_monomial_coefficients(n);
    for (std::size_t r = 0; r < d.size(); ++r) p.c[n - 2 * r] = d[r];
    return p;
}

TraceFormulaSides trace_formula_sides(const HermitianMatrix& m, const Polynomial& f) {
    if (m.kind != MatrixKind::UME) throw ContractViolation("trace_formula_sides expects a UME matrix");
    const int N = m.dim;
    const Spectrum spec = eigenvalues(m);
    const int deg = std::max(0, f.degree());
    const auto fm = chebyshev_coefficients([&f](double x) { return f(x); }, deg).f;
    const auto y = y_all(spec, deg);

    TraceFormulaSides s;
    for (double e : spec.eps) s.direct += f(e);
    s.direct /= N;

    double fluct = 0.0, boundary = 0.0;
    for (int n = 3; n <= deg; ++n) {
        fluct += 0.5 * y[n] * fm[n];
        s.scale += std::abs(0.5 * y[n] * fm[n]);
    }
    for (int n = 0; n <= deg; n += 2) boundary += fm[n] * 2.0 / std::pow(N - 2.0, 0.5 * n);
    boundary *= -(N - 3.0) / 4.0;
    s.per_term = fluct + 0.5 * (N - 1.0) * fm[0] + boundary;
    s.scale += std::abs(0.5 * (N - 1.0) * fm[0]) + std::abs(boundary);

    const double smooth = integrate_endpoint_singular(
        [&](double e) { return ume_mean_density(e, N) * f(e); }, -1.0, 1.0, 1e-14);
    s.integral = fluct + smooth;
    return s;
}

double trace_formula_residual(const HermitianMatrix& m, const Polynomial& f) {
    const auto s = trace_formula_sides(m, f);
    const double denom = std::max({std::abs(s.direct), std::abs(s.per_term), s.scale});
    return denom > 0.0 ? std::abs(s.direct - s.per_term) / denom : 0.0;
}

double default_bin_width(std::uint64_t replicas) {
    return 2.0 / std::ceil(std::sqrt(static_cast<double>(std::max<std::uint64_t>(replicas, 1))));
}

DensityHistogram make_histogram(std::span<const double> samples, double width, double anchor,
                                std::uint64_t replicas) {
    if (samples.empty()) throw std::invalid_argument("make_histogram: no samples");
    if (!(width > 0.0)) throw std::invalid_argument("make_histogram: width must be positive");
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    const long k0 = static_cast<long>(std::floor((*lo_it - anchor) / width));
    const long k1 = static_cast<long>(std::floor((*hi_it - anchor) / width)) + 1;
    DensityHistogram h;
    h.replicas = replicas;
    h.total = samples.size();
    for (long k = k0; k <= k1; ++k) h.edges.push_back(anchor + static_cast<double>(k) * width);
    h.counts.assign(h.edges.size() - 1, 0);
    for (double v : samples) {
        auto b = static_cast<long>(std::floor((v - anchor) / width)) - k0;
        b = std::clamp<long>(b, 0, static_cast<long>(h.counts.size()) - 1);
        ++h.counts[static_cast<std::size_t>(b)];
    }
    for (auto c : h.counts) h.heights.push_back(static_cast<double>(c) / (static_cast<double>(h.total) * width));
    return h;
}

double l1_distance(const DensityHistogram& h, const RealFn& f, double a, double b) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < h.edges.size(); ++i) {
        const double lo = std::max(a, h.edges[i]), hi = std::min(b, h.edges[i + 1]);
        if (lo >= hi) continue;
        const double height = h.heights[i];
        acc += integrate([&](double x) { return std::abs(height - f(x)); }, lo, hi, 1e-10);
    }
    // Parts of [a, b] outside the histogram range count the full |f|.
    if (!h.edges.empty()) {
        if (a < h.edges.front()) acc += integrate([&](double x) { return std::abs(f(x)); }, a, std::min(b, h.edges.front()));
        if (b > h.edges.back()) acc += integrate([&](double x) { return std::abs(f(x)); }, std::max(a, h.edges.back()), b);
    }
    return acc;
}

std::vector<double> smoothed_density_sample(const Spectrum& spec, std::span<const double> grid, int nstar, double c) {
    std::vector<double> out(grid.size(), 0.0);
    for (double xi : grid) check_delta_band(xi, nstar, c);
    // (1/N) Tr delta(W; xi) = prefactor(xi) sum_m T_m(xi) (1/N) Tr T_m(W).
    std::vector<double> tr(static_cast<std::size_t>(nstar) + 1, 0.0);
    for (double e : spec.eps) {
        const auto t = chebyshev_all(nstar, e);
        for (int m = 0; m <= nstar; ++m) tr[m] += t[m];
    }
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const auto t = chebyshev_all(nstar, grid[j]);
        double acc = 0.0;
        for (int m = 0; m <= nstar; ++m) acc += t[m] * tr[m];
        out[j] = acc / spec.dim * delta_kernel_prefactor(grid[j]);
    }
    return out;
}

DensityCurve smoothed_mean_density(std::span<const Spectrum> spectra, std::span<const double> grid, int nstar,
                                   double c) {
    if (spectra.empty()) throw std::invalid_argument("smoothed_mean_density: empty ensemble");
    MomentAccumulator acc(grid.size());
    for (const auto& s : spectra) acc.add(smoothed_density_sample(s, grid, nstar, c));
    DensityCurve curve{"eps", {grid.begin(), grid.end()}, {}, {}, false};
    const double n = static_cast<double>(acc.count());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        curve.y.push_back(acc.mean()[static_cast<Eigen::Index>(j)]);
        curve.se.push_back(std::sqrt(acc.variance(j) / n));
    }
    return curve;
}

}  // namespace ume
