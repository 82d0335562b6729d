#pragma once

#include <Eigen/Dense>

#include "scc/interferometer.hpp"

namespace scc {

/// Bundles the bases and protocol of one interferometer run so phase-domain
/// quantities can be evaluated at arbitrary dwell times. Holds references;
/// the bases must outlive the context.
class SequenceContext {
  public:
    static SequenceContext free_stage(const SpectralBasis& basis, double omega,
                                      double omega0, double t);
    static SequenceContext quasifree_stage(const SpectralBasis& basis,
                                           const SpectralBasis& primed, double t);

    OutputState output_at(double u) const;
    const SpectralBasis& reference() const { return *basis_; }
    double seeding_time() const { return config_.t; }

  private:
    const SpectralBasis* basis_ = nullptr;
    const SpectralBasis* primed_ = nullptr;
    SequenceConfig config_;
};

struct SensitivityValue {
    double value = 0.0;
    bool diverged = false;  // fringe slope below threshold; value is +inf
};

/// Phase sensitivity by error propagation, evaluated at phi = omega * u with
/// the analytic dwell derivative: Var(eta) / (d<eta>/dphi)^2.
SensitivityValue phase_sensitivity_error_propagation(const SequenceContext& ctx,
                                                     const PhaseCalibration& cal,
                                                     double phi);

struct FisherValue {
    double value = 0.0;
    double dropped_mass = 0.0;  // probability mass excluded by the cutoff
};

/// Fisher information of the outcome distribution, from analytic amplitude
/// derivatives. Terms with probability below `cutoff` are excluded and
/// their mass reported.
FisherValue fisher_information(const SequenceContext& ctx, const PhaseCalibration& cal,
                               double phi, double cutoff = 1e-14);

/// The plain Fisher sum over an explicit distribution and its derivative.
FisherValue fisher_information(const Eigen::VectorXd& p, const Eigen::VectorXd& dp_dphi,
                               double cutoff = 1e-14);

/// Squared Hellinger distance between two normalised distributions on the
/// same support.
double hellinger_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

struct ProxyValue {
    double value = 0.0;
    bool degenerate = false;  // distance below resolution; value is +inf
};

/// Derivative-free phase-sensitivity proxy delta^2 / (8 dH^2_{phi,phi+delta}).
ProxyValue hellinger_sensitivity_proxy(const SequenceContext& ctx,
                                       const PhaseCalibration& cal, double phi,
                                       double delta = 1e-5);

/// Sensitivity of the ideal symmetry-limit interferometer at seeded number
/// eta1: [ 2/(eta1(eta1+2)) + 1 - cos(phi) ] / (1 + cos(phi)).
/// Throws on the divergence at phi = pi mod 2pi.
double ideal_su11_sensitivity(double eta1, double phi);

/// Pump parameter reproducing a seeded number eta1 = cosh(beta) - 1.
double ideal_pump_parameter(double eta1);

}  // namespace scc
