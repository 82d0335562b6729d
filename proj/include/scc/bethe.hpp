#pragma once

#include <Eigen/Dense>
#include <vector>

#include "scc/model.hpp"

namespace scc {

/// One instance of the Richardson root problem. Only (g, d0, d1) enter the
/// equations; n fixes the number of rapidities and the state labelling.
struct RichardsonProblem {
    int n;      // number of rapidities per state
    double g;   // rescaled coupling 2*lambda/q, nonzero
    double d0;  // pseudospin of the 0 mode, (nu0 + 1/2)/2
    double d1;  // pseudospin of the +/- modes, (nu1 + 1)/2

    static RichardsonProblem from_params(const ModelParams& p) {
        return {p.pairs(), p.g(), p.d0(), p.d1()};
    }
};

/// Rapidities in pole-anchored form: e_i = anchor_i + offset_i with
/// anchor_i in {-1, +1}. Rapidities approach the poles at +/-1, where a
/// plain double for e_i cannot resolve the distances 1 -+ e_i that the
/// equations are made of; anchoring to the nearest pole keeps those
/// distances at full precision. Offsets are signed and kept in [-1, 1]
/// whenever the value lies between the poles: crossing the midpoint
/// re-anchors by adding or subtracting an exactly representable 2.
struct RapidityVector {
    Eigen::VectorXi anchor;  // -1 or +1
    Eigen::VectorXd offset;  // signed distance from the anchor

    int size() const { return static_cast<int>(offset.size()); }
    double value(int i) const { return anchor[i] + offset[i]; }
    Eigen::VectorXd values() const;
    double one_minus(int i) const {  // 1 - e_i, exact near the +1 pole
        return anchor[i] > 0 ? -offset[i] : 2.0 - offset[i];
    }
    double one_plus(int i) const {  // 1 + e_i, exact near the -1 pole
        return anchor[i] > 0 ? 2.0 + offset[i] : offset[i];
    }
    double diff(int i, int j) const {  // e_i - e_j
        return (anchor[i] - anchor[j]) + (offset[i] - offset[j]);
    }

    /// Re-anchors entries whose offset magnitude exceeds 1 to the other
    /// pole when that brings them closer to it. Value-preserving.
    void normalize_anchors();

    /// Anchors each plain value to its nearest pole.
    static RapidityVector from_values(const Eigen::VectorXd& e);
    void sort_ascending();
};

/// Left-hand side of the Richardson equations, one entry per rapidity:
///   1 + 4g [ d0/(1-e_a) - d1/(1+e_a) ] - 4g sum_{b!=a} 1/(e_a - e_b).
/// Throws PoleError when a rapidity sits within 1e-14 of +/-1 or of
/// another rapidity.
Eigen::VectorXd richardson_residual(const RapidityVector& rapidities,
                                    const RichardsonProblem& problem);
Eigen::VectorXd richardson_residual(const Eigen::VectorXd& rapidities,
                                    const RichardsonProblem& problem);
Eigen::VectorXd richardson_residual(const Eigen::VectorXd& rapidities,
                                    const ModelParams& params);

Eigen::MatrixXd richardson_jacobian(const RapidityVector& rapidities,
                                    const RichardsonProblem& problem);

/// Energy and charge eigenvalues of a state from its rapidities.
struct EnergyCharges {
    double energy;
    double r0;
    double r1;
};
EnergyCharges bethe_energy(const RapidityVector& rapidities, const ModelParams& params);
EnergyCharges bethe_energy(const Eigen::VectorXd& rapidities, const ModelParams& params);

/// Zeros of the generalised Laguerre polynomial L_m^(a), ascending (a > -1).
/// These solve the electrostatic problem that governs how rapidities split
/// off the poles at weak coupling, so they seed the continuation.
Eigen::VectorXd laguerre_zeros(int m, double a);

struct BetheState {
    int seed_index = 0;          // ladder label of the weak-coupling seed
    RapidityVector anchored;     // full-precision representation, ascending
    Eigen::VectorXd rapidities;  // plain values, ascending
    double energy = 0;
    double r0 = 0;
    double r1 = 0;
    double residual_norm = 0;    // max-abs Richardson residual
};

struct BetheSpectrum {
    ModelParams params;
    std::vector<BetheState> states;  // ascending energy
};

struct SolverOptions {
    double newton_tol = 1e-12;        // Newton convergence on the residual
    double accept_tol = 1e-10;        // final acceptance on the residual
    int max_newton_iter = 60;
    double g_seed = 1e-4;             // coupling at which cluster seeds are planted
    int initial_steps = 100;          // first continuation step = |g_target|/initial_steps
    double min_step_fraction = 1e-8;  // below this fraction of |g_target|, try the
                                      // polynomial fallback before giving up
    bool cross_check_with_ed = true;  // compare energies against exact_spectrum
    double ed_rel_tol = 1e-8;
};

/// Rapidities of the state continued from ladder label seed_index
/// (= number of rapidities splitting off -1), ascending.
RapidityVector solve_state_anchored(const RichardsonProblem& target, int seed_index,
                                    const SolverOptions& opts = {});
Eigen::VectorXd solve_state(const RichardsonProblem& target, int seed_index,
                            const SolverOptions& opts = {});

/// Re-solves a state in the coefficient space of the monic polynomial with
/// the rapidities as roots. Smooth through near-collisions of rapidities;
/// used as the fallback when Newton in rapidity space stalls.
RapidityVector refine_state_polynomial(const RapidityVector& approx,
                                       const RichardsonProblem& target,
                                       const SolverOptions& opts = {});

/// All n+1 eigenstates of the paired sector, sorted by energy, each solved
/// by continuation in g and cross-checked against the diagonalisation
/// oracle. Throws SolverError with the failing state index on breakdown.
BetheSpectrum solve_rapidities(const ModelParams& params, const SolverOptions& opts = {});

}  // namespace scc
