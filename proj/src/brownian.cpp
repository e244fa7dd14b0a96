#include "ume/brownian.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ume/mcharness.hpp"
#include "ume/nbwalks.hpp"
#include "ume/spectral.hpp"

namespace ume {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double x) {
    double r = std::fmod(x, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

std::vector<double> traces_of(const Spectrum& s, std::span<const int> ns) {
    std::vector<double> out;
    out.reserve(ns.size());
    for (int n : ns) out.push_back(chebyshev_trace(s, n));
    return out;
}

struct OneStepMoments {
    std::vector<double> drift, drift_se;
    Eigen::MatrixXd diffusion, diffusion_se;
};

// Antithetic one-step moments: each increment g is used as phi + g and phi - g.
OneStepMoments one_step_moments(const PhaseConfiguration& phi, std::span<const int> ns, double ds,
                                std::uint64_t replicas, const SeedSpec& seed) {
    if (!(ds > 0.0)) throw std::invalid_argument("ds must be positive");
    if (replicas < 2) throw std::invalid_argument("need at least two one-step replicas");
    const std::size_t k = ns.size();
    const auto f0 = chebyshev_traces(phi, ns);
    MomentAccumulator acc(k + k * k);
    std::vector<double> row(k + k * k);
    CounterRng rng(seed);
    const double sd = std::sqrt(2.0 * ds);
    PhaseConfiguration plus = phi, minus = phi;
    for (std::uint64_t r = 0; r < replicas; ++r) {
        for (std::size_t i = 0; i < phi.phases.size(); ++i) {
            const double g = sd * rng.normal();
            plus.phases[i] = wrap(phi.phases[i] + g);
            minus.phases[i] = wrap(phi.phases[i] - g);
        }
        const auto fp = chebyshev_traces(plus, ns);
        const auto fm = chebyshev_traces(minus, ns);
        for (std::size_t a = 0; a < k; ++a) {
            row[a] = (fp[a] + fm[a] - 2.0 * f0[a]) / (2.0 * ds);
            for (std::size_t b = 0; b < k; ++b)
                row[k + a * k + b] =
                    ((fp[a] - f0[a]) * (fp[b] - f0[b]) + (fm[a] - f0[a]) * (fm[b] - f0[b])) / (2.0 * ds);
        }
        acc.add(row);
    }
    OneStepMoments out;
    const double n = static_cast<double>(acc.count());
    out.diffusion.resize(k, k);
    out.diffusion_se.resize(k, k);
    for (std::size_t a = 0; a < k; ++a) {
        out.drift.push_back(acc.mean()[a]);
        out.drift_se.push_back(std::sqrt(acc.variance(a) / n));
        for (std::size_t b = 0; b < k; ++b) {
            const std::size_t j = k + a * k + b;
            out.diffusion(a, b) = acc.mean()[j];
            out.diffusion_se(a, b) = std::sqrt(acc.variance(j) / n);
        }
    }
    return out;
}

double kolmogorov_survival(double lambda) {
    if (lambda < 1e-3) return 1.0;
    double acc = 0.0;
    for (int k = 1; k <= 100; ++k) acc += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * lambda * lambda);
    return std::clamp(acc, 0.0, 1.0);
}

}  // namespace

PhaseConfiguration brownian_step(const PhaseConfiguration& phi, double ds, CounterRng& rng) {
    if (!(ds > 0.0)) throw std::invalid_argument("brownian_step: ds must be positive");
    PhaseConfiguration out = phi;
    const double sd = std::sqrt(2.0 * ds);
    for (double& p : out.phases) p = wrap(p + sd * rng.normal());
    return out;
}

std::vector<double> chebyshev_traces(const PhaseConfiguration& phi, std::span<const int> ns) {
    return traces_of(eigenvalues(build_ume(phi)), ns);
}

double centering_mean(int n, int N) { return chebyshev_mean_closed_form(n, N); }

DriftEstimate estimate_drift(const PhaseConfiguration& phi, int n, double ds, std::uint64_t replicas,
                             const SeedSpec& seed, double mean) {
    if (n < 3) throw DomainError("estimate_drift: n must be >= 3");
    const int ns[] = {n};
    const auto m = one_step_moments(phi, ns, ds, replicas, seed);
    DriftEstimate d;
    d.F = chebyshev_traces(phi, ns)[0] - mean;
    d.empirical = m.drift[0];
    d.se = m.drift_se[0];
    d.predicted = -n * d.F;
    d.remainder = d.empirical - d.predicted;
    return d;
}

DriftEstimate estimate_drift(const PhaseConfiguration& phi, int n, double ds, std::uint64_t replicas,
                             const SeedSpec& seed) {
    return estimate_drift(phi, n, ds, replicas, seed, centering_mean(n, phi.size));
}

DiffusionEstimate estimate_diffusion(const PhaseConfiguration& phi, int n, int m, double ds, std::uint64_t replicas,
                                     const SeedSpec& seed) {
    if (n < 3 || m < 3) throw DomainError("estimate_diffusion: n, m must be >= 3");
    const int ns[] = {n, m};
    const auto mom = one_step_moments(phi, ns, ds, replicas, seed);
    DiffusionEstimate d;
    d.empirical = mom.diffusion(0, 1);
    d.se = mom.diffusion_se(0, 1);
    d.predicted = n == m ? 0.5 * n * n : 0.0;
    d.remainder = d.empirical - d.predicted;
    return d;
}

ValueWithError third_moment_check(const PhaseConfiguration& phi, int n, int m, int l, double ds,
                                  std::uint64_t replicas, const SeedSpec& seed) {
    if (n < 3 || m < 3 || l < 3) throw DomainError("third_moment_check: indices must be >= 3");
    if (!(ds > 0.0) || replicas < 2) throw std::invalid_argument("third_moment_check: bad ds or replicas");
    const int ns[] = {n, m, l};
    const auto f0 = chebyshev_traces(phi, ns);
    CounterRng rng(seed);
    MomentAccumulator acc(1);
    for (std::uint64_t r = 0; r < replicas; ++r) {
        const auto f = chebyshev_traces(brownian_step(phi, ds, rng), ns);
        const double v = std::abs((f[0] - f0[0]) * (f[1] - f0[1]) * (f[2] - f0[2])) / ds;
        acc.add(std::span<const double>(&v, 1));
    }
    return {acc.mean()[0], std::sqrt(acc.variance(0) / static_cast<double>(acc.count()))};
}

GeneratorValues exact_generator(const PhaseConfiguration& phi, std::span<const int> ns) {
    const int N = phi.size;
    const HermitianMatrix m = build_ume(phi);
    const Spectrum spec = eigenvalues(m, true);
    const CMatrix& v = *spec.vectors;
    const double s = scale_divisor(N);
    const std::size_t k = ns.size();

    GeneratorValues g;
    g.ns.assign(ns.begin(), ns.end());
    g.traces = traces_of(spec, ns);
    g.gradient.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(phi.phases.size()));

    // Q_kl = 1 - sum_mu |V_mu k|^2 |V_mu l|^2 - Re(u^T (M o M) conj(u)), u_mu = conj(V_mu k V_mu l):
    // the phase-summed |(V^dag dW/dphi V)_kl|^2 times s^2.
    const CMatrix mm = m.entries.cwiseProduct(m.entries);
    const Eigen::MatrixXd a2 = v.cwiseAbs2();
    Eigen::MatrixXd q(N, N);
    for (int kk = 0; kk < N; ++kk) {
        // R = diag(conj V_k) (M o M) diag(V_k) V; then Q_kl picks column l against conj(V_l).
        const CMatrix pk = v.col(kk).conjugate().asDiagonal() * mm * v.col(kk).asDiagonal();
        const CMatrix r = pk * v;
        for (int l = 0; l < N; ++l) {
            const std::complex<double> quad = (v.col(l).conjugate().cwiseProduct(r.col(l))).sum();
            q(kk, l) = 1.0 - a2.col(kk).dot(a2.col(l)) - quad.real();
        }
    }

    g.drift.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        const int n = ns[i];
        std::vector<double> d1(N), d2(N);
        for (int j = 0; j < N; ++j) {
            d1[j] = chebyshev_derivative(n, spec.eps[j]);
            d2[j] = chebyshev_second_derivative(n, spec.eps[j]);
        }
        double first = 0.0, second = 0.0;
        for (int j = 0; j < N; ++j) first -= spec.eps[j] * d1[j];
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b) {
                const double gap = spec.eps[a] - spec.eps[b];
                const double dd = std::abs(gap) > 1e-9 ? (d1[a] - d1[b]) / gap : 0.5 * (d2[a] + d2[b]);
                second += dd * q(a, b);
            }
        g.drift[i] = first + second / (s * s);

        // dF/dphi_{mu nu} = -(2/s) Im(M_{mu nu} G_{nu mu}),  G = V diag(T_n') V^dag.
        const CMatrix gm = v * Eigen::Map<const Eigen::VectorXd>(d1.data(), N).cast<std::complex<double>>().asDiagonal() *
                           v.adjoint();
        std::size_t e = 0;
        for (int mu = 0; mu < N; ++mu)
            for (int nu = mu + 1; nu < N; ++nu, ++e)
                g.gradient(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(e)) =
                    -2.0 / s * (m.entries(mu, nu) * gm(nu, mu)).imag();
    }
    g.diffusion = 2.0 * g.gradient * g.gradient.transpose();
    return g;
}

DriftDiffusionReport drift_diffusion_report(const DriftDiffusionRun& run) {
    const std::size_t k = run.ns.size();
    const std::size_t C = run.configurations;
    if (C < 3) throw std::invalid_argument("drift_diffusion_report: need at least 3 configurations");
    DriftDiffusionReport rep;
    rep.N = run.N;
    rep.ns = run.ns;
    rep.configurations = C;
    rep.mean_abs_drift_remainder.assign(k, 0.0);
    rep.mean_abs_diffusion_remainder = Eigen::MatrixXd::Zero(k, k);
    rep.diffusion_exact = Eigen::MatrixXd::Zero(k, k);

    std::vector<double> means;
    for (int n : run.ns) means.push_back(centering_mean(n, run.N));
    Eigen::MatrixXd F(C, k), drift(C, k);
    std::vector<Eigen::MatrixXd> diff;
    for (std::size_t c = 0; c < C; ++c) {
        const PhaseConfiguration phi = sample_phases(run.N, {run.motion.seed, c, 0});
        const GeneratorValues g = exact_generator(phi, run.ns);
        for (std::size_t i = 0; i < k; ++i) {
            F(c, i) = g.traces[i] - means[i];
            rep.mean_abs_drift_remainder[i] += std::abs(g.drift[i] + run.ns[i] * F(c, i)) / C;
            for (std::size_t j = 0; j < k; ++j) {
                const double pred = i == j ? 0.5 * run.ns[i] * run.ns[i] : 0.0;
                rep.mean_abs_diffusion_remainder(i, j) += std::abs(g.diffusion(i, j) - pred) / C;
            }
        }
        rep.diffusion_exact += g.diffusion / static_cast<double>(C);
        if (run.monte_carlo) {
            const auto m = one_step_moments(phi, run.ns, run.motion.ds, run.motion.replicas, {run.motion.seed, c, 1});
            for (std::size_t i = 0; i < k; ++i) drift(c, i) = m.drift[i];
            diff.push_back(m.diffusion);
        } else {
            for (std::size_t i = 0; i < k; ++i) drift(c, i) = g.drift[i];
            diff.push_back(g.diffusion);
        }
    }

    for (std::size_t i = 0; i < k; ++i) {
        const Eigen::VectorXd x = F.col(i), y = drift.col(i);
        const double xm = x.mean(), ym = y.mean();
        const double sxx = (x.array() - xm).square().sum();
        const double slope = ((x.array() - xm) * (y.array() - ym)).sum() / sxx;
        const double res = ((y.array() - ym) - slope * (x.array() - xm)).square().sum();
        rep.slope.push_back(slope);
        rep.slope_se.push_back(std::sqrt(res / (static_cast<double>(C) - 2.0) / sxx));
    }
    rep.diffusion = Eigen::MatrixXd::Zero(k, k);
    rep.diffusion_se = Eigen::MatrixXd::Zero(k, k);
    for (const auto& d : diff) rep.diffusion += d / static_cast<double>(C);
    for (const auto& d : diff) rep.diffusion_se += (d - rep.diffusion).cwiseAbs2() / (static_cast<double>(C) - 1.0);
    rep.diffusion_se = (rep.diffusion_se / static_cast<double>(C)).cwiseSqrt();
    return rep;
}

bool StationarityReport::pass() const {
    for (const auto& m : moments)
        if (!m.agree) return false;
    return chi2_p >= 0.01;
}

StationarityReport stationarity_check(int N, double horizon, std::uint64_t replicas, int steps, std::uint64_t seed,
                                      int workers) {
    if (horizon < 0.0 || steps < 1) throw std::invalid_argument("stationarity_check: bad horizon or steps");
    const std::vector<int> ns{3, 4, 5, 6};
    constexpr int kBins = 20;
    const std::size_t k = ns.size();
    RunConfig cfg;
    cfg.N = N;
    cfg.replicas = replicas;
    cfg.master_seed = seed;
    cfg.workers = workers;
    const Eigen::MatrixXd rows = collect_samples(cfg, [&](const SeedSpec& s) {
        PhaseConfiguration phi = sample_phases(N, {s.master_seed, s.replica_index, 0});
        std::vector<double> out;
        for (double t : chebyshev_traces(phi, ns)) out.push_back(t);
        if (horizon > 0.0) {
            CounterRng rng({s.master_seed, s.replica_index, 1});
            for (int i = 0; i < steps; ++i) phi = brownian_step(phi, horizon / steps, rng);
        }
        for (double t : chebyshev_traces(phi, ns)) out.push_back(t);
        std::vector<double> bins(kBins, 0.0);
        for (double p : phi.phases) bins[std::min(kBins - 1, static_cast<int>(p / kTwoPi * kBins))] += 1.0;
        out.insert(out.end(), bins.begin(), bins.end());
        return out;
    });

    StationarityReport rep;
    rep.N = N;
    rep.horizon = horizon;
    rep.replicas = replicas;
    const double R = static_cast<double>(replicas);
    auto moments = [&](Eigen::Index col, double& mean, double& mse, double& var, double& vse) {
        const Eigen::ArrayXd x = rows.col(col).array();
        mean = x.mean();
        const Eigen::ArrayXd c = x - mean;
        var = c.square().sum() / (R - 1.0);
        mse = std::sqrt(var / R);
        const double m4 = c.pow(4).mean();
        vse = std::sqrt(std::max(0.0, m4 - var * var) / R);
    };
    for (std::size_t i = 0; i < k; ++i) {
        MomentComparison mc;
        mc.n = ns[i];
        moments(static_cast<Eigen::Index>(i), mc.mean0, mc.mean0_se, mc.var0, mc.var0_se);
        moments(static_cast<Eigen::Index>(k + i), mc.mean1, mc.mean1_se, mc.var1, mc.var1_se);
        mc.agree = std::abs(mc.mean0 - mc.mean1) <= 3.0 * std::hypot(mc.mean0_se, mc.mean1_se) &&
                   std::abs(mc.var0 - mc.var1) <= 3.0 * std::hypot(mc.var0_se, mc.var1_se);
        rep.moments.push_back(mc);
    }
    const Eigen::VectorXd counts = rows.rightCols(kBins).colwise().sum();
    const double expected = counts.sum() / kBins;
    for (int b = 0; b < kBins; ++b) rep.chi2 += std::pow(counts[b] - expected, 2) / expected;
    rep.chi2_dof = kBins - 1;
    rep.chi2_p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(rep.chi2_dof), rep.chi2));
    return rep;
}

ExchangeableReport exchangeable_pair_check(int N, int n, double ds, std::uint64_t replicas, std::uint64_t seed) {
    std::vector<double> a, b;
    const int ns[] = {n};
    for (std::uint64_t r = 0; r < replicas; ++r) {
        const PhaseConfiguration phi = sample_phases(N, {seed, r, 0});
        CounterRng rng({seed, r, 1});
        a.push_back(chebyshev_traces(phi, ns)[0]);
        b.push_back(chebyshev_traces(brownian_step(phi, ds, rng), ns)[0]);
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    const double ne = static_cast<double>(a.size()) * b.size() / (a.size() + b.size());
    const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    return {d, kolmogorov_survival(lambda)};
}

double wasserstein1_gaussian(std::vector<double> sample, double variance) {
    if (sample.empty()) throw std::invalid_argument("wasserstein1_gaussian: empty sample");
    std::sort(sample.begin(), sample.end());
    const boost::math::normal_distribution<double> z(0.0, std::sqrt(variance));
    const double R = static_cast<double>(sample.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i)
        acc += std::abs(sample[i] - boost::math::quantile(z, (static_cast<double>(i) + 0.5) / R));
    return acc / R;
}

GaussianityReport gaussianity_report(const Eigen::MatrixXd& samples, std::span<const int> ns) {
    if (samples.rows() < 100) throw std::invalid_argument("gaussianity_report: need at least 100 samples");
    if (static_cast<std::size_t>(samples.cols()) != ns.size())
        throw std::invalid_argument("gaussianity_report: one column per n expected");
    GaussianityReport rep;
    const double R = static_cast<double>(samples.rows());
    rep.samples = static_cast<std::size_t>(samples.rows());
    const Eigen::Index k = samples.cols();
    Eigen::MatrixXd centered = samples.rowwise() - samples.colwise().mean();
    for (Eigen::Index i = 0; i < k; ++i) {
        const Eigen::ArrayXd c = centered.col(i).array();
        ComponentDiagnostics d;
        d.n = ns[i];
        d.mean = samples.col(i).mean();
        const double m2 = c.square().mean(), m3 = c.cube().mean(), m4 = c.square().square().mean();
        d.variance = m2 * R / (R - 1.0);
        d.mean_se = std::sqrt(d.variance / R);
        d.variance_se = std::sqrt(std::max(0.0, m4 - m2 * m2) / R);
        d.skewness = m3 / std::pow(m2, 1.5);
        d.excess_kurtosis = m4 / (m2 * m2) - 3.0;
        d.skewness_se = std::sqrt(6.0 / R);
        d.kurtosis_se = std::sqrt(24.0 / R);
        const Eigen::VectorXd col = samples.col(i);
        d.wasserstein = wasserstein1_gaussian({col.data(), col.data() + col.size()}, ns[i] / 4.0);
        rep.components.push_back(d);
    }
    rep.cross_covariance = centered.transpose() * centered / (R - 1.0);
    rep.cross_covariance_se = Eigen::MatrixXd(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) {
            const Eigen::ArrayXd p = centered.col(i).array() * centered.col(j).array();
            const double var = (p - p.mean()).square().sum() / (R - 1.0);
            rep.cross_covariance_se(i, j) = std::sqrt(var / R);
        }
    return rep;
}

Eigen::MatrixXd sample_centered_traces(int N, std::span<const int> ns, std::uint64_t replicas, std::uint64_t seed,
                                       int workers) {
    RunConfig cfg;
    cfg.N = N;
    cfg.replicas = replicas;
    cfg.master_seed = seed;
    cfg.workers = workers;
    std::vector<double> means;
    for (int n : ns) means.push_back(centering_mean(n, N));
    return collect_samples(cfg, [&](const SeedSpec& s) {
        auto t = chebyshev_traces(sample_phases(N, s), ns);
        for (std::size_t i = 0; i < t.size(); ++i) t[i] -= means[i];
        return t;
    });
}

}  // namespace ume
