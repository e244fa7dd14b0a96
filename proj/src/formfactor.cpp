#include "ume/formfactor.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "ume/ensemble.hpp"

namespace ume {

namespace {
constexpr double kPi = std::numbers::pi;

std::complex<double> phase_sum(const std::vector<double>& theta, int t) {
    std::complex<double> s = 0.0;
    for (double th : theta) s += std::polar(1.0, th * t);
    return s;
}
}  // namespace

std::optional<std::vector<double>> unfold_angles(const Spectrum& spec) {
    if (!spec.ramanujan) return std::nullopt;
    std::vector<double> theta(spec.eps.size());
    for (std::size_t k = 0; k < theta.size(); ++k) theta[k] = 2.0 * std::acos(spec.eps[k]);
    return theta;
}

ValueWithError form_factor_empirical(std::span<const std::vector<double>> angles, int t) {
    if (angles.empty()) throw std::invalid_argument("form_factor_empirical: empty ensemble");
    if (t < 1) throw std::invalid_argument("form_factor_empirical: t must be >= 1");
    MomentAccumulator acc(1);
    double N = static_cast<double>(angles.front().size());
    for (const auto& theta : angles) {
        const double v = std::norm(phase_sum(theta, t)) / N;
        acc.add(std::span<const double>(&v, 1));
    }
    return {acc.mean()[0] - N, std::sqrt(acc.variance(0) / static_cast<double>(acc.count()))};
}

ValueWithError form_factor_y_relation(std::span<const Spectrum> spectra, int t) {
    if (spectra.empty()) throw std::invalid_argument("form_factor_y_relation: empty ensemble");
    MomentAccumulator acc(1);
    const double N = spectra.front().dim;
    for (const auto& s : spectra) {
        const double y = y_n(s, 2 * t);
        const double v = 0.25 * N * y * y;
        acc.add(std::span<const double>(&v, 1));
    }
    const double delta = t == 1 ? 0.25 * N * (1.0 - 2.0 / (N - 2.0)) : 0.0;
    return {delta + acc.mean()[0], std::sqrt(acc.variance(0) / static_cast<double>(acc.count()))};
}

double form_factor_gue(double tau) {
    if (tau < 0.0) throw std::domain_error("form_factor_gue: tau must be >= 0");
    if (tau > 2.0) return 1.0;
    const double a = std::asin(std::sqrt(0.5 * tau));
    return tau * (1.0 - 2.0 / kPi * a) + (2.0 * a - std::sin(2.0 * a)) / kPi;
}

FormFactorSeries form_factor_series(const FormFactorRun& run) {
    const int N = run.N, T = run.t_max;
    if (T < 1) throw std::invalid_argument("form_factor_series: t_max must be >= 1");
    // Layout: [rejected draws, then per t: |S|^2/N, Re S, Im S, (N/4) y_{2t}^2, (sum cos)^2 / N].
    constexpr int kPer = 5;
    RunConfig cfg;
    cfg.N = N;
    cfg.replicas = run.retained;
    cfg.master_seed = run.seed;
    cfg.workers = run.workers;
    cfg.statistics.push_back("rejected");
    for (int t = 1; t <= T; ++t)
        for (const char* s : {"abs2", "re", "im", "yrel", "cos2"}) cfg.statistics.push_back(std::string(s) + std::to_string(t));

    const auto est = run_ensemble(cfg, [&](const SeedSpec& seed) -> std::optional<std::vector<double>> {
        std::vector<double> out(1 + kPer * static_cast<std::size_t>(T));
        for (std::uint32_t attempt = 0;; ++attempt) {
            const Spectrum spec = eigenvalues(build_ume(sample_phases(N, {seed.master_seed, seed.replica_index, attempt})));
            const auto theta = unfold_angles(spec);
            if (!theta) continue;
            out[0] = attempt;
            const auto y = y_all(spec, 2 * T);
            for (int t = 1; t <= T; ++t) {
                const auto s = phase_sum(*theta, t);
                double c = 0.0;
                for (double th : *theta) c += std::cos(th * t);
                double* o = &out[1 + kPer * static_cast<std::size_t>(t - 1)];
                o[0] = std::norm(s) / N;
                o[1] = s.real();
                o[2] = s.imag();
                o[3] = 0.25 * N * y[2 * t] * y[2 * t];
                o[4] = c * c / N;
            }
            return out;
        }
    });

    FormFactorSeries fs;
    fs.N = N;
    fs.t_max = T;
    fs.retained = est.count;
    const double rej = est.mean[0];
    fs.discard_fraction = rej / (1.0 + rej);
    for (int t = 1; t <= T; ++t) {
        const std::size_t b = 1 + kPer * static_cast<std::size_t>(t - 1);
        fs.t.push_back(t);
        fs.defined.push_back(est.mean[b] - N);
        fs.defined_se.push_back(est.se[b]);
        const double delta = t == 1 ? 0.25 * N * (1.0 - 2.0 / (N - 2.0)) : 0.0;
        fs.relation.push_back(delta + est.mean[b + 3]);
        fs.relation_se.push_back(est.se[b + 3]);
        fs.cosine.push_back(est.mean[b + 4]);
        fs.cosine_se.push_back(est.se[b + 4]);
        fs.connected.push_back((est.variance[b + 1] + est.variance[b + 2]) / N);
        fs.connected_se.push_back(std::hypot(est.variance_se[b + 1], est.variance_se[b + 2]) / N);
        fs.gue.push_back(form_factor_gue(static_cast<double>(t) / N));
    }
    double plateau = 0.0;
    int np = 0;
    for (int t = 2 * N + 1; t <= std::min(T, 3 * N); ++t, ++np) plateau += fs.connected[t - 1];
    fs.plateau_factor = np ? np / plateau : 1.0;
    for (double c : fs.connected) fs.normalized.push_back(c * fs.plateau_factor);
    fs.rms_t_max = std::min(run.rms_t_max, T);
    double ss = 0.0;
    for (int t = 1; t <= fs.rms_t_max; ++t) ss += std::pow(fs.normalized[t - 1] - fs.gue[t - 1], 2);
    fs.rms_deviation = std::sqrt(ss / fs.rms_t_max);
    return fs;
}

}  // namespace ume
