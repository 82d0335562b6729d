#include "scc/metrology.hpp"

#include <cmath>
#include <limits>

namespace scc {

namespace {

constexpr double kSlopeFloor = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct LadderView {
    Eigen::VectorXcd amps;     // ladder amplitudes of the output state
    Eigen::VectorXcd amps_du;  // their dwell-time derivative
};

LadderView ladder_view(const OutputState& out, const SpectralBasis& basis) {
    return {basis.c.transpose() * out.x, basis.c.transpose() * out.dx_du};
}

}  // namespace

SequenceContext SequenceContext::free_stage(const SpectralBasis& basis, double omega,
                                            double omega0, double t) {
    SequenceContext ctx;
    ctx.basis_ = &basis;
    ctx.config_ = SequenceConfig{FreePhase{omega, omega0}, t, 0.0};
    ctx.config_.validate();
    return ctx;
}

SequenceContext SequenceContext::quasifree_stage(const SpectralBasis& basis,
                                                 const SpectralBasis& primed, double t) {
    SequenceContext ctx;
    ctx.basis_ = &basis;
    ctx.primed_ = &primed;
    ctx.config_ = SequenceConfig{QuasifreePhase{primed.params.q}, t, 0.0};
    ctx.config_.validate();
    return ctx;
}

OutputState SequenceContext::output_at(double u) const {
    SequenceConfig cfg = config_;
    cfg.u = u;
    if (primed_) return output_state_quasifree(*basis_, *primed_, cfg);
    return output_state_free(*basis_, cfg);
}

SensitivityValue phase_sensitivity_error_propagation(const SequenceContext& ctx,
                                                     const PhaseCalibration& cal,
                                                     double phi) {
    if (cal.omega <= 0.0)
        throw ConfigError("phase_sensitivity_error_propagation: calibration must be positive");
    const OutputState out = ctx.output_at(phi / cal.omega);
    const SpectralBasis& basis = ctx.reference();
    const LadderView view = ladder_view(out, basis);

    double mean = 0.0, meansq = 0.0, slope_u = 0.0;
    for (int k = 0; k < view.amps.size(); ++k) {
        const double p = std::norm(view.amps[k]);
        mean += 2.0 * k * p;
        meansq += 4.0 * k * k * p;
        slope_u += 4.0 * k * std::real(std::conj(view.amps[k]) * view.amps_du[k]);
    }
    const double var = meansq - mean * mean;
    const double slope_phi = slope_u / cal.omega;
    if (std::abs(slope_phi) < kSlopeFloor) return {kInf, true};
    return {var / (slope_phi * slope_phi), false};
}

FisherValue fisher_information(const Eigen::VectorXd& p, const Eigen::VectorXd& dp_dphi,
                               double cutoff) {
    if (p.size() != dp_dphi.size())
        throw ConfigError("fisher_information: distribution and derivative sizes differ");
    FisherValue out;
    for (int k = 0; k < p.size(); ++k) {
        if (p[k] > cutoff)
            out.value += dp_dphi[k] * dp_dphi[k] / p[k];
        else
            out.dropped_mass += std::max(p[k], 0.0);
    }
    return out;
}

FisherValue fisher_information(const SequenceContext& ctx, const PhaseCalibration& cal,
                               double phi, double cutoff) {
    if (cal.omega <= 0.0)
        throw ConfigError("fisher_information: calibration must be positive");
    const OutputState out = ctx.output_at(phi / cal.omega);
    const LadderView view = ladder_view(out, ctx.reference());

    Eigen::VectorXd p(view.amps.size()), dp(view.amps.size());
    for (int k = 0; k < view.amps.size(); ++k) {
        p[k] = std::norm(view.amps[k]);
        dp[k] = 2.0 * std::real(std::conj(view.amps[k]) * view.amps_du[k]) / cal.omega;
    }
    return fisher_information(p, dp, cutoff);
}

double hellinger_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    if (p.size() != q.size())
        throw ConfigError("hellinger_distance: distributions live on different supports");
    if (std::abs(p.sum() - 1.0) > 1e-8 || std::abs(q.sum() - 1.0) > 1e-8)
        throw ConfigError("hellinger_distance: distributions must be normalised");
    double acc = 0.0;
    for (int k = 0; k < p.size(); ++k) {
        const double d = std::sqrt(std::max(p[k], 0.0)) - std::sqrt(std::max(q[k], 0.0));
        acc += d * d;
    }
    return 0.5 * acc;
}

ProxyValue hellinger_sensitivity_proxy(const SequenceContext& ctx,
                                       const PhaseCalibration& cal, double phi,
                                       double delta) {
    if (cal.omega <= 0.0)
        throw ConfigError("hellinger_sensitivity_proxy: calibration must be positive");
    if (delta <= 0.0)
        throw ConfigError("hellinger_sensitivity_proxy: delta must be positive");
    const SpectralBasis& basis = ctx.reference();
    const Eigen::VectorXd p = fock_probabilities(ctx.output_at(phi / cal.omega), basis);
    const Eigen::VectorXd q =
        fock_probabilities(ctx.output_at((phi + delta) / cal.omega), basis);
    const double dist = hellinger_distance(p, q);
    if (dist < 1e-16) return {kInf, true};
    return {delta * delta / (8.0 * dist), false};
}

double ideal_su11_sensitivity(double eta1, double phi) {
    if (eta1 <= 0.0) throw ConfigError("ideal_su11_sensitivity: eta1 must be positive");
    const double denom = 1.0 + std::cos(phi);
    if (std::abs(denom) < 1e-12)
        throw Error("ideal_su11_sensitivity: diverges at phi = pi mod 2pi");
    return (2.0 / (eta1 * (eta1 + 2.0)) + 1.0 - std::cos(phi)) / denom;
}

double ideal_pump_parameter(double eta1) {
    if (eta1 < 0.0) throw ConfigError("ideal_pump_parameter: eta1 must be >= 0");
    return std::acosh(eta1 + 1.0);
}

}  // namespace scc
