#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ume/mcharness.hpp"
#include "ume/spectral.hpp"

namespace ume {

// theta_k = 2 arccos(eps_k); std::nullopt for a non-Ramanujan spectrum.
std::optional<std::vector<double>> unfold_angles(const Spectrum& spec);

struct ValueWithError {
    double value = 0.0;
    double se = 0.0;
};

// <(1/N) |sum_j exp(i theta_j t)|^2> - N, with the -N kept.
ValueWithError form_factor_empirical(std::span<const std::vector<double>> angles, int t);
// (N/4)(1 - 2/(N-2)) delta_{t,1} + (N/4) <y_{2t}^2>, from the same spectra.
ValueWithError form_factor_y_relation(std::span<const Spectrum> spectra, int t);

// Convolved GUE form factor on tau = t/N; 1 beyond tau = 2.
double form_factor_gue(double tau);

struct FormFactorSeries {
    int N = 0;
    int t_max = 0;
    std::uint64_t retained = 0;
    double discard_fraction = 0.0;
    std::vector<int> t;
    // Defining average, including the -N.
    std::vector<double> defined, defined_se;
    // Right side of the y-relation.
    std::vector<double> relation, relation_se;
    // Cosine-only part (1/N)<(sum_j cos(theta_j t))^2>, the projection the y-relation describes.
    std::vector<double> cosine, cosine_se;
    // Connected form factor (1/N)(<|S_t|^2> - |<S_t>|^2).
    std::vector<double> connected, connected_se;
    // connected * plateau_factor, compared against the GUE curve.
    std::vector<double> normalized;
    std::vector<double> gue;
    double plateau_factor = 1.0;  // 1 / mean connected value over t in (2N, 3N]
    double rms_deviation = 0.0;   // over t = 1..rms_t_max
    int rms_t_max = 0;
};

struct FormFactorRun {
    int N = 20;
    std::uint64_t retained = 100000;  // every replica redraws until it is Ramanujan
    int t_max = 60;
    int rms_t_max = 40;
    std::uint64_t seed = 0;
    int workers = 0;
};

FormFactorSeries form_factor_series(const FormFactorRun& run);

}  // namespace ume
