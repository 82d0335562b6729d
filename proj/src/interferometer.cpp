#include "scc/interferometer.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace scc {

namespace {

using Complex = std::complex<double>;
constexpr Complex kI{0.0, 1.0};

// Energy-basis coefficients of exp(i t H)|in>, with |in> the all-zeros
// ladder state (column 0 of the transform).
Eigen::VectorXcd seeded_coefficients(const SpectralBasis& basis, double t) {
    const int m = basis.states();
    Eigen::VectorXcd y(m);
    for (int s = 0; s < m; ++s)
        y[s] = basis.c(s, 0) * std::exp(kI * (basis.energies[s] * t));
    return y;
}

Eigen::VectorXcd to_ladder(const SpectralBasis& basis, const Eigen::VectorXcd& state) {
    return basis.c.transpose() * state;
}

}  // namespace

void SequenceConfig::validate() const {
    if (t < 0.0 || u < 0.0)
        throw ConfigError("SequenceConfig: seeding and dwell times must be >= 0");
    if (const auto* qf = std::get_if<QuasifreePhase>(&phase); qf && qf->q_prime == 0.0)
        throw ConfigError("SequenceConfig: quasifree stage requires q' != 0");
}

double seeded_pair_number(const SpectralBasis& basis, double t) {
    if (t < 0.0) throw ConfigError("seeded_pair_number: t must be >= 0");
    const Eigen::VectorXcd amps = to_ladder(basis, seeded_coefficients(basis, t));
    double eta = 0.0;
    for (int k = 0; k < amps.size(); ++k) eta += 2.0 * k * std::norm(amps[k]);
    return eta;
}

OutputState output_state_free(const SpectralBasis& basis, const SequenceConfig& config) {
    config.validate();
    const auto* stage = std::get_if<FreePhase>(&config.phase);
    if (!stage) throw ConfigError("output_state_free: config does not hold a free stage");

    const int m = basis.states();
    const int n = m - 1;
    const Eigen::VectorXcd amps = to_ladder(basis, seeded_coefficients(basis, config.t));

    Eigen::VectorXcd dwelled(m), dwelled_du(m);
    for (int r = 0; r < m; ++r) {
        const double freq = 2.0 * (r * stage->omega + (n - r) * stage->omega0);
        const Complex phase = std::exp(-kI * (freq * config.u));
        dwelled[r] = phase * amps[r];
        dwelled_du[r] = -kI * freq * dwelled[r];
    }

    OutputState out;
    out.x = basis.c * dwelled;
    out.dx_du = basis.c * dwelled_du;
    for (int s = 0; s < m; ++s) {
        const Complex undo = std::exp(-kI * (basis.energies[s] * config.t));
        out.x[s] *= undo;
        out.dx_du[s] *= undo;
    }
    return out;
}

OutputState output_state_quasifree(const SpectralBasis& basis, const SpectralBasis& primed,
                                   const SequenceConfig& config) {
    config.validate();
    if (!std::holds_alternative<QuasifreePhase>(config.phase))
        throw ConfigError("output_state_quasifree: config does not hold a quasifree stage");
    if (basis.params.N != primed.params.N || basis.params.lambda != primed.params.lambda)
        throw ConfigError("output_state_quasifree: bases must share N and lambda");

    const int m = basis.states();
    const Eigen::VectorXcd amps = to_ladder(basis, seeded_coefficients(basis, config.t));

    // Ladder -> primed energy basis, dwell phases, and back.
    const Eigen::VectorXcd primed_coeff = primed.c * amps;
    Eigen::VectorXcd dwelled(m), dwelled_du(m);
    for (int p = 0; p < m; ++p) {
        const Complex phase = std::exp(-kI * (primed.energies[p] * config.u));
        dwelled[p] = phase * primed_coeff[p];
        dwelled_du[p] = -kI * primed.energies[p] * dwelled[p];
    }
    const Eigen::VectorXcd back = primed.c.transpose() * dwelled;
    const Eigen::VectorXcd back_du = primed.c.transpose() * dwelled_du;

    OutputState out;
    out.x = basis.c * back;
    out.dx_du = basis.c * back_du;
    for (int s = 0; s < m; ++s) {
        const Complex undo = std::exp(-kI * (basis.energies[s] * config.t));
        out.x[s] *= undo;
        out.dx_du[s] *= undo;
    }
    return out;
}

Moments observable_moments(const OutputState& out, const SpectralBasis& basis) {
    const Eigen::VectorXcd amps = to_ladder(basis, out.x);
    double mean = 0.0, meansq = 0.0;
    for (int k = 0; k < amps.size(); ++k) {
        const double p = std::norm(amps[k]);
        mean += 2.0 * k * p;
        meansq += 4.0 * k * k * p;
    }
    return {mean, meansq - mean * mean};
}

Eigen::VectorXd fock_probabilities(const OutputState& out, const SpectralBasis& basis) {
    const Eigen::VectorXcd amps = to_ladder(basis, out.x);
    Eigen::VectorXd p(amps.size());
    for (int k = 0; k < amps.size(); ++k) p[k] = std::norm(amps[k]);
    return p;
}

PhaseCalibration estimate_fringe_frequency(const Eigen::VectorXd& u,
                                           const Eigen::VectorXd& eta) {
    const int m = static_cast<int>(u.size());
    if (m != eta.size() || m < 16)
        throw ConfigError("estimate_fringe_frequency: need >= 16 matched samples");
    const double du = u[1] - u[0];
    if (du <= 0.0)
        throw ConfigError("estimate_fringe_frequency: samples must be ascending");
    for (int j = 1; j + 1 < m; ++j)
        if (std::abs((u[j + 1] - u[j]) - du) > 1e-9 * du)
            throw ConfigError("estimate_fringe_frequency: sampling must be uniform");

    const Eigen::VectorXd y = eta.array() - eta.mean();

    // Direct power spectrum on the Fourier grid, zero bin excluded.
    const int half = m / 2;
    Eigen::VectorXd power(half + 1);
    power[0] = 0.0;
    for (int k = 1; k <= half; ++k) {
        Complex acc{0.0, 0.0};
        const double w = -2.0 * std::numbers::pi * k / m;
        for (int j = 0; j < m; ++j) acc += y[j] * std::exp(kI * (w * j));
        power[k] = std::norm(acc);
    }

    // Local maxima; the dominant one must stand out by 3x against the best
    // peak outside its two-bin leakage neighbourhood.
    int best = 1;
    for (int k = 2; k < half; ++k)
        if (power[k] > power[best]) best = k;
    double runner_up = 0.0;
    for (int k = 2; k < half; ++k) {
        if (std::abs(k - best) <= 2) continue;
        if (power[k] >= power[k - 1] && power[k] >= power[k + 1])
            runner_up = std::max(runner_up, power[k]);
    }
    if (power[best] < 3.0 * runner_up) {
        std::ostringstream msg;
        msg << "estimate_fringe_frequency: no dominant spectral peak (top "
            << power[best] << " vs runner-up " << runner_up
            << "); the signal is not a clean fringe";
        throw NoDominantPeakError(msg.str());
    }

    // Golden-section refinement of a least-squares fit within one bin of the
    // peak. The model carries the second harmonic as well: fringes of the
    // number observable are trigonometric polynomials, and absorbing the
    // first overtone removes most of the frequency bias of a plain sinusoid.
    const double bin = 2.0 * std::numbers::pi / (m * du);
    auto misfit = [&](double w) {
        using Vec5 = Eigen::Matrix<double, 5, 1>;
        Eigen::Matrix<double, 5, 5> ata = Eigen::Matrix<double, 5, 5>::Zero();
        Vec5 atb = Vec5::Zero();
        for (int j = 0; j < m; ++j) {
            Vec5 row;
            row << 1.0, std::cos(w * u[j]), std::sin(w * u[j]), std::cos(2.0 * w * u[j]),
                std::sin(2.0 * w * u[j]);
            ata += row * row.transpose();
            atb += row * y[j];
        }
        const Vec5 coeff = ata.ldlt().solve(atb);
        double ss = 0.0;
        for (int j = 0; j < m; ++j) {
            Vec5 row;
            row << 1.0, std::cos(w * u[j]), std::sin(w * u[j]), std::cos(2.0 * w * u[j]),
                std::sin(2.0 * w * u[j]);
            ss += (y[j] - row.dot(coeff)) * (y[j] - row.dot(coeff));
        }
        return ss;
    };

    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = (best - 1) * bin, hi = (best + 1) * bin;
    double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
    double f1 = misfit(x1), f2 = misfit(x2);
    for (int iter = 0; iter < 60; ++iter) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = misfit(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = misfit(x2);
        }
    }
    return PhaseCalibration{0.5 * (lo + hi)};
}

}  // namespace scc
