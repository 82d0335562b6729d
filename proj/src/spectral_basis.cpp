#include "scc/spectral_basis.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace scc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const Eigen::VectorXd& v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;
    double acc = 0.0;
    for (int i = 0; i < v.size(); ++i) acc += std::exp(v[i] - m);
    return m + std::log(acc);
}

}  // namespace

namespace {

// Signed log coefficients of prod_a [ 1/(1-e_a) - x/(1+e_a) ]. These are the
// expansion weights of a Bethe product state over the pair ladder. The
// permutation-sum coefficients differ by the multiplicity k!(n-k)! of each
// subset; callers add or omit that weight as needed.
AlphaCoefficients expansion_coefficients(const RapidityVector& e) {
    const int n = e.size();
    for (int i = 0; i < n; ++i)
        if (std::abs(e.one_minus(i)) < 1e-14 || std::abs(e.one_plus(i)) < 1e-14) {
            std::ostringstream msg;
            msg << "alpha_coefficients: rapidity " << i << " at pole, e = " << e.value(i);
            throw PoleError(msg.str());
        }

    // Renormalised by the running maximum after every factor; the scale
    // goes into a shared log offset.
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(n + 1);
    coef[0] = 1.0;
    double log_offset = 0.0;
    for (int a = 0; a < n; ++a) {
        const double pa = 1.0 / e.one_minus(a);
        const double ma = -1.0 / e.one_plus(a);
        for (int k = std::min(a + 1, n); k >= 1; --k)
            coef[k] = coef[k] * pa + coef[k - 1] * ma;
        coef[0] *= pa;
        const double m = coef.head(a + 2).cwiseAbs().maxCoeff();
        if (m > 0.0 && std::isfinite(m)) {
            coef.head(a + 2) /= m;
            log_offset += std::log(m);
        }
    }

    AlphaCoefficients out;
    out.log_magnitude.resize(n + 1);
    out.sign.resize(n + 1);
    for (int k = 0; k <= n; ++k) {
        if (coef[k] == 0.0) {
            out.log_magnitude[k] = kNegInf;
            out.sign[k] = 0;
        } else {
            out.log_magnitude[k] = std::log(std::abs(coef[k])) + log_offset;
            out.sign[k] = coef[k] > 0.0 ? 1 : -1;
        }
    }
    return out;
}

}  // namespace

AlphaCoefficients alpha_coefficients(const RapidityVector& e) {
    const int n = e.size();
    AlphaCoefficients out = expansion_coefficients(e);
    for (int k = 0; k <= n; ++k)
        out.log_magnitude[k] += std::lgamma(k + 1.0) + std::lgamma(n - k + 1.0);
    return out;
}

AlphaCoefficients alpha_coefficients(const Eigen::VectorXd& rapidities) {
    return alpha_coefficients(RapidityVector::from_values(rapidities));
}

SpectralBasis build_spectral_basis(const BetheSpectrum& spectrum) {
    const int n = spectrum.params.pairs();
    const int m = static_cast<int>(spectrum.states.size());
    if (m != n + 1)
        throw ConfigError("build_spectral_basis: spectrum does not hold n+1 states");
    const FockNormTable norms = fock_norms(n);

    SpectralBasis basis;
    basis.params = spectrum.params;
    basis.energies.resize(m);
    basis.c.resize(m, n + 1);
    basis.log_norms.resize(m);

    for (int s = 0; s < m; ++s) {
        const BetheState& state = spectrum.states[s];
        basis.energies[s] = state.energy;
        // Expansion weights, not the permutation sums: the ladder transform
        // reproduces the eigenvectors only with the plain product expansion.
        const AlphaCoefficients alpha = expansion_coefficients(state.anchored);

        Eigen::VectorXd gamma(n + 1);
        for (int k = 0; k <= n; ++k)
            gamma[k] = norms.log_values[k] + 2.0 * alpha.log_magnitude[k];
        const double log_norm = log_sum_exp(gamma);
        basis.log_norms[s] = log_norm;

        for (int k = 0; k <= n; ++k) {
            if (alpha.sign[k] == 0) {
                basis.c(s, k) = 0.0;
            } else {
                basis.c(s, k) =
                    alpha.sign[k] * std::exp(alpha.log_magnitude[k] +
                                             0.5 * (norms.log_values[k] - log_norm));
            }
        }
    }
    return basis;
}

double max_ed_row_deviation(const SpectralBasis& basis, const Spectrum& ed) {
    double worst = 0.0;
    for (int s = 0; s < basis.states(); ++s) {
        const Eigen::VectorXd row = basis.c.row(s).transpose();
        const Eigen::VectorXd v = ed.vectors.col(s);
        const double dev =
            std::min((row - v).cwiseAbs().maxCoeff(), (row + v).cwiseAbs().maxCoeff());
        worst = std::max(worst, dev);
    }
    return worst;
}

SpectralBasis build_spectral_basis_checked(BetheSpectrum& spectrum,
                                           const SolverOptions& opts, double row_tol) {
    SpectralBasis basis = build_spectral_basis(spectrum);
    const Spectrum ed = exact_spectrum(build_hamiltonian(spectrum.params));
    const RichardsonProblem problem = RichardsonProblem::from_params(spectrum.params);

    for (int s = 0; s < basis.states(); ++s) {
        const Eigen::VectorXd row = basis.c.row(s).transpose();
        const Eigen::VectorXd v = ed.vectors.col(s);
        double dev =
            std::min((row - v).cwiseAbs().maxCoeff(), (row + v).cwiseAbs().maxCoeff());
        if (dev <= row_tol) continue;

        // Solver-quality failure: re-solve this state at tightened tolerance.
        BetheState& state = spectrum.states[s];
        SolverOptions tight = opts;
        tight.newton_tol = std::min(opts.newton_tol * 1e-2, 1e-14);
        state.anchored = solve_state_anchored(problem, state.seed_index, tight);
        state.rapidities = state.anchored.values();
        state.residual_norm =
            richardson_residual(state.anchored, problem).cwiseAbs().maxCoeff();
        const EnergyCharges ec = bethe_energy(state.anchored, spectrum.params);
        state.energy = ec.energy;
        state.r0 = ec.r0;
        state.r1 = ec.r1;

        SpectralBasis rebuilt = build_spectral_basis(spectrum);
        const Eigen::VectorXd new_row = rebuilt.c.row(s).transpose();
        dev = std::min((new_row - v).cwiseAbs().maxCoeff(),
                       (new_row + v).cwiseAbs().maxCoeff());
        if (dev > row_tol) {
            std::ostringstream msg;
            msg << "build_spectral_basis_checked: state " << s
                << " deviates from its oracle eigenvector by " << dev
                << " after re-solve (tolerance " << row_tol << ")";
            throw SolverError(msg.str());
        }
        basis = std::move(rebuilt);
    }
    return basis;
}

}  // namespace scc
