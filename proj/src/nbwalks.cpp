#include "ume/nbwalks.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <unordered_map>

#include "ume/errors.hpp"
#include "ume/spectral.hpp"

namespace ume {

DirectedEdgeSpace::DirectedEdgeSpace(int n) : n_(n) {
    if (n < 2) throw InvalidDimension("DirectedEdgeSpace: N must be >= 2");
    const int d = n * (n - 1);
    edges_.reserve(d);
    for (int o = 0; o < n; ++o)
        for (int t = 0; t < n; ++t)
            if (t != o) edges_.push_back({o, t});
    reversal_.resize(d);
    succ_.resize(d);
    pair_.resize(d);
    orient_.resize(d);
    PhaseConfiguration layout{n, {}};
    for (int e = 0; e < d; ++e) {
        const auto [o, t] = edges_[e];
        reversal_[e] = index(t, o);
        pair_[e] = static_cast<int>(o < t ? layout.index(o, t) : layout.index(t, o));
        orient_[e] = o < t ? 1 : -1;
        for (int next = 0; next < n; ++next)
            if (next != t && next != o) succ_[e].push_back(index(t, next));
    }
}

double edge_phase(const DirectedEdgeSpace& space, const PhaseConfiguration& phi, int e) {
    return space.orientation(e) * phi.phases[space.pair(e)];
}

namespace {

MagneticOperator build_operator(const PhaseConfiguration& phi, OperatorKind kind) {
    if (phi.size < 3) throw InvalidDimension("edge operators need N >= 3");
    const DirectedEdgeSpace space(phi.size);
    const int d = space.size();
    MagneticOperator op{kind, phi.size, CMatrix::Zero(d, d)};
    for (int e = 0; e < d; ++e) {
        const double pe = edge_phase(space, phi, e);
        const int t = space.edge(e).terminus;
        for (int next = 0; next < phi.size; ++next) {
            if (next == t) continue;
            const int e2 = space.index(t, next);
            if (kind == OperatorKind::Y && e2 == space.reversal(e)) continue;
            op.entries(e2, e) = std::polar(1.0, 0.5 * (pe + edge_phase(space, phi, e2)));
        }
    }
    return op;
}

// Complex log-determinant via LU with partial pivoting.
std::complex<double> log_det(const CMatrix& a) {
    Eigen::PartialPivLU<CMatrix> lu(a);
    const CMatrix& m = lu.matrixLU();
    std::complex<double> acc = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) acc += std::log(m(i, i));
    if (lu.permutationP().determinant() < 0) acc += std::complex<double>(0.0, std::numbers::pi);
    return acc;
}

double walk_space_size(int N, int n) {
    return static_cast<double>(N) * (N - 1) * std::pow(static_cast<double>(N - 2), n - 1);
}

void check_budget(int N, int n, const EnumerationBudget& budget) {
    if (N < 3) throw InvalidDimension("walk enumeration needs N >= 3");
    if (n < 0) throw DomainError("walk length must be nonnegative");
    const double size = walk_space_size(N, n);
    if (size > budget.max_partial_walks)
        throw BudgetExceeded("enumeration of length-" + std::to_string(n) + " walks on K_" + std::to_string(N) +
                             " needs " + std::to_string(size) + " walks, budget is " +
                             std::to_string(budget.max_partial_walks));
}

// Depth-first enumeration of closed non-backtracking walks with incremental kappa.
class WalkEnumerator {
public:
    WalkEnumerator(int N, int n) : space_(N), n_(n), kappa_(PhaseConfiguration::pair_count(N), 0) {}

    template <class Visit>
    void run(bool prune_to_zero, Visit&& visit) {
        prune_ = prune_to_zero;
        for (int e = 0; e < space_.size(); ++e) {
            start_ = e;
            step(e, 1, visit);
            unstep(e);
        }
    }

    const std::vector<int>& kappa() const { return kappa_; }

private:
    void apply(int e) {
        int& k = kappa_[space_.pair(e)];
        l1_ -= std::abs(k);
        k += space_.orientation(e);
        l1_ += std::abs(k);
    }
    void unstep(int e) {
        int& k = kappa_[space_.pair(e)];
        l1_ -= std::abs(k);
        k -= space_.orientation(e);
        l1_ += std::abs(k);
    }

    template <class Visit>
    void step(int e, int depth, Visit& visit) {
        apply(e);
        if (prune_ && l1_ > n_ - depth) return;
        if (depth == n_) {
            const auto& s = space_.successors(e);
            for (int c : s)
                if (c == start_) {
                    visit(kappa_);
                    break;
                }
            return;
        }
        for (int next : space_.successors(e)) {
            step(next, depth + 1, visit);
            unstep(next);
        }
    }

    DirectedEdgeSpace space_;
    int n_;
    std::vector<int> kappa_;
    int l1_ = 0;
    int start_ = 0;
    bool prune_ = false;
};

using SignatureCounts = std::unordered_map<std::string, std::uint64_t>;

SignatureCounts nonzero_signatures(int N, int n, bool negate) {
    SignatureCounts counts;
    if (n == 0) return counts;
    WalkEnumerator walker(N, n);
    std::string key(PhaseConfiguration::pair_count(N), '\0');
    walker.run(false, [&](const std::vector<int>& kappa) {
        bool zero = true;
        for (std::size_t i = 0; i < kappa.size(); ++i) {
            key[i] = static_cast<char>(negate ? -kappa[i] : kappa[i]);
            zero = zero && kappa[i] == 0;
        }
        if (!zero) ++counts[key];
    });
    return counts;
}

}  // namespace

MagneticOperator magnetic_connectivity(const PhaseConfiguration& phi) { return build_operator(phi, OperatorKind::B); }
MagneticOperator hashimoto(const PhaseConfiguration& phi) { return build_operator(phi, OperatorKind::Y); }

namespace {

// Returns Tr (Y / c)^n for n = 0..nmax.
std::vector<std::complex<double>> scaled_traces(const PhaseConfiguration& phi, int nmax, double c) {
    if (phi.size < 3) throw InvalidDimension("edge operators need N >= 3");
    const DirectedEdgeSpace space(phi.size);
    const int d = space.size();
    // Column e of Y holds (successor, weight) pairs.
    std::vector<std::vector<std::pair<int, std::complex<double>>>> cols(d);
    for (int e = 0; e < d; ++e) {
        const double pe = edge_phase(space, phi, e);
        for (int e2 : space.successors(e))
            cols[e].push_back({e2, std::polar(1.0 / c, 0.5 * (pe + edge_phase(space, phi, e2)))});
    }
    std::vector<std::complex<double>> tr(static_cast<std::size_t>(nmax) + 1);
    tr[0] = static_cast<double>(d);
    CMatrix p = CMatrix::Identity(d, d), q(d, d);
    for (int n = 1; n <= nmax; ++n) {
        for (int e = 0; e < d; ++e) {
            auto col = q.col(e);
            col.setZero();
            for (const auto& [e2, w] : cols[e]) col += w * p.col(e2);
        }
        std::swap(p, q);
        tr[n] = p.trace();
    }
    return tr;
}

}  // namespace

std::vector<double> hashimoto_normalized_traces(const PhaseConfiguration& phi, int nmax) {
    const auto tr = scaled_traces(phi, nmax, std::sqrt(static_cast<double>(phi.size - 2)));
    std::vector<double> y(tr.size());
    for (std::size_t n = 0; n < tr.size(); ++n) y[n] = tr[n].real() / phi.size;
    return y;
}

std::vector<double> hashimoto_traces(const PhaseConfiguration& phi, int nmax) {
    const auto tr = scaled_traces(phi, nmax, 1.0);
    std::vector<double> out(tr.size());
    for (std::size_t n = 0; n < tr.size(); ++n) out[n] = tr[n].real();
    return out;
}

double bass_residual(const PhaseConfiguration& phi, std::complex<double> eta) {
    const int N = phi.size;
    const MagneticOperator y = hashimoto(phi);
    const HermitianMatrix m = build_ume(phi);
    const int d = N * (N - 1);
    const std::complex<double> lhs = log_det(eta * CMatrix::Identity(d, d) - y.entries);
    const std::complex<double> shift = eta * eta + static_cast<double>(N - 2);
    std::complex<double> rhs = log_det(shift * CMatrix::Identity(N, N) - eta * m.entries);
    const int k = N * (N - 3) / 2;
    if (k > 0) rhs += static_cast<double>(k) * std::log(eta * eta - 1.0);
    if (!std::isfinite(lhs.real()) || !std::isfinite(rhs.real()))
        throw DomainError("bass_residual: eta is (numerically) an eigenvalue of Y");
    const std::complex<double> dl = rhs - lhs;  // log(RHS / LHS)
    // Imaginary parts differ by multiples of 2 pi; exp() removes that ambiguity.
    return std::abs(1.0 - std::exp(dl)) * std::min(1.0, std::exp(-dl.real()));
}

double bass_spectrum_mismatch(const PhaseConfiguration& phi) {
    const int N = phi.size;
    const MagneticOperator y = hashimoto(phi);
    Eigen::ComplexEigenSolver<CMatrix> es(y.entries, false);
    const auto spec = eigenvalues(build_ume(phi));
    std::vector<std::complex<double>> predicted;
    for (double l : spec.lambda) {
        const std::complex<double> disc = std::sqrt(std::complex<double>(l * l - 4.0 * (N - 2)));
        predicted.push_back(0.5 * (l + disc));
        predicted.push_back(0.5 * (l - disc));
    }
    for (int i = 0; i < N * (N - 3) / 2; ++i) {
        predicted.push_back(1.0);
        predicted.push_back(-1.0);
    }
    std::vector<bool> used(predicted.size(), false);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const auto z = es.eigenvalues()[i];
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t j = 0; j < predicted.size(); ++j)
            if (!used[j] && std::abs(z - predicted[j]) < best) {
                best = std::abs(z - predicted[j]);
                arg = j;
            }
        used[arg] = true;
        worst = std::max(worst, best);
    }
    return worst;
}

WalkTally enumerate_nbw(int N, int n, EnumerationBudget budget) {
    check_budget(N, n, budget);
    WalkTally t{N, n, 0, 0};
    if (n == 0) {
        t.count = static_cast<std::uint64_t>(N) * (N - 1);
        return t;
    }
    WalkEnumerator walker(N, n);
    walker.run(false, [&](const std::vector<int>&) { ++t.count; });
    return t;
}

WalkTally enumerate_zero_phase_walks(int N, int n, EnumerationBudget budget) {
    check_budget(N, n, budget);
    WalkTally t{N, n, 0, 0};
    if (n == 0) {
        t.count = static_cast<std::uint64_t>(N) * (N - 1);
        return t;
    }
    if (n % 2) return t;  // every step changes the l1 norm of kappa by one
    WalkEnumerator walker(N, n);
    walker.run(true, [&](const std::vector<int>& kappa) {
        for (int k : kappa)
            if (k != 0) return;
        ++t.count;
    });
    return t;
}

WalkTally enumerate_retracing_pairs(int N, int n, int m, EnumerationBudget budget) {
    check_budget(N, n, budget);
    check_budget(N, m, budget);
    WalkTally t{N, n, 0, 0};
    if ((n - m) % 2 != 0) return t;  // kappa l1 parities differ
    // Reversal maps kappa to -kappa bijectively, so counting kappa_w = -kappa_w'
    // equals counting kappa_w = kappa_w'.
    const SignatureCounts a = nonzero_signatures(N, n, false);
    const SignatureCounts b = (n == m) ? SignatureCounts{} : nonzero_signatures(N, m, true);
    const SignatureCounts& bb = (n == m) ? a : b;
    for (const auto& [key, count] : a) {
        std::string target = key;
        if (n == m)
            for (char& c : target) c = static_cast<char>(-c);
        const auto it = bb.find(target);
        if (it != bb.end()) {
            t.count += count * it->second;
            ++t.classes;
        }
    }
    return t;
}

double expected_y2n_formula(int n, double N) {
    if (n < 5) return 0.0;
    const double h = n;
    if (n == 5) return h * (h - 4.0) / (N * N);
    return h / (6.0 * N * N) * ((h + 1.0) * (h - 4.0) + 3.0 * (h - 5.0));
}

double expected_chebyshev_formula(int n, double N) {
    const double h = n;
    if (n < 5) return -0.5 * N * (N - 3.0) / std::pow(N - 2.0, h);
    if (n == 5) return h * (h - 4.0) / (2.0 * N);
    return h / (12.0 * N) * ((h + 1.0) * (h - 1.0) - 18.0);
}

double chebyshev_mean_closed_form(int n, double N) {
    if (n == 0) return N;
    if (n % 2) return 0.0;
    return expected_chebyshev_formula(n / 2, N);
}

double variance_formula(int n, double N) {
    if (std::isinf(N)) return n / 4.0;
    return n / 4.0 - n * (n + 1.0) / (2.0 * N);
}

CovariancePrediction covariance_formula(int n, int m, double N) {
    const int gap = std::abs(n - m);
    if (gap % 2) return {0.0, true};
    if (gap < 6) return {std::numeric_limits<double>::quiet_NaN(), false};
    return {static_cast<double>(n) * m / (N * N * N), true};
}

}  // namespace ume
