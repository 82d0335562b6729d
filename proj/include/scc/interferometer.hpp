#pragma once

#include <Eigen/Dense>
#include <complex>
#include <variant>

#include "scc/spectral_basis.hpp"

namespace scc {

/// Phase stage with all interactions off: number-operator evolution at
/// angular frequencies omega (+/- modes) and omega0 (0 mode).
struct FreePhase {
    double omega = 0.0;
    double omega0 = 0.0;
};

/// Phase stage approximated by the interacting Hamiltonian at a large
/// dressing q'; needs the eigenbasis at (lambda, q').
struct QuasifreePhase {
    double q_prime = 0.0;
};

/// Interferometric protocol: seed for time t, dwell for time u under the
/// phase stage, then invert the seeding evolution.
struct SequenceConfig {
    std::variant<FreePhase, QuasifreePhase> phase = FreePhase{};
    double t = 0.0;  // seeding time
    double u = 0.0;  // dwell time

    void validate() const;
};

/// Output state in the (unprimed) energy basis with its analytic dwell-time
/// derivative.
struct OutputState {
    Eigen::VectorXcd x;
    Eigen::VectorXcd dx_du;
};

/// Fringe calibration: the dominant angular frequency of <eta>(u), so that
/// phi = omega * u.
struct PhaseCalibration {
    double omega = 0.0;
};

/// Number of +/- bosons seeded by evolving the all-zeros input for time t.
double seeded_pair_number(const SpectralBasis& basis, double t);

/// Output coefficients for the free phase stage.
OutputState output_state_free(const SpectralBasis& basis, const SequenceConfig& config);

/// Output coefficients for the quasifree phase stage. Both bases must share
/// N and lambda; primed is the eigenbasis at dressing q'.
OutputState output_state_quasifree(const SpectralBasis& basis, const SpectralBasis& primed,
                                   const SequenceConfig& config);

struct Moments {
    double mean_eta = 0.0;
    double var_eta = 0.0;
};

/// Mean and variance of the +/- boson number in the output state.
Moments observable_moments(const OutputState& out, const SpectralBasis& basis);

/// Probabilities of measuring eta = 0, 2, ..., 2n bosons, indexed by the
/// pair count.
Eigen::VectorXd fock_probabilities(const OutputState& out, const SpectralBasis& basis);

/// Reads the fringe frequency off uniformly sampled (u, <eta>) data: the
/// dominant peak of the detrended power spectrum, refined by a local
/// least-squares sinusoid fit. Throws NoDominantPeakError when the largest
/// nonzero peak is less than 3x the runner-up.
PhaseCalibration estimate_fringe_frequency(const Eigen::VectorXd& u,
                                           const Eigen::VectorXd& eta);

}  // namespace scc
