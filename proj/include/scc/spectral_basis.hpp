#pragma once

#include <Eigen/Dense>

#include "scc/bethe.hpp"
#include "scc/model.hpp"

namespace scc {

/// Expansion coefficients of one Bethe state over the pair ladder, as sign
/// plus log magnitude. Entry k is k!(n-k)! times the coefficient of x^k in
/// prod_a [ 1/(1-e_a) - x/(1+e_a) ], which equals the sum over all
/// permutations of pole factors. Individual values overflow doubles from
/// n ~ 50, so only ratios ever leave log space.
struct AlphaCoefficients {
    Eigen::VectorXd log_magnitude;  // size n+1; -inf marks an exact zero
    Eigen::VectorXi sign;           // -1, 0, +1
};

AlphaCoefficients alpha_coefficients(const RapidityVector& rapidities);
AlphaCoefficients alpha_coefficients(const Eigen::VectorXd& rapidities);

/// Orthogonal transform between the pair ladder and the energy eigenbasis.
/// Row s holds the ladder components of the eigenstate with energy
/// energies[s]; rows are unit vectors by construction.
struct SpectralBasis {
    ModelParams params;
    Eigen::VectorXd energies;   // ascending
    Eigen::MatrixXd c;          // (n+1) x (n+1); row = state, column = ladder index
    Eigen::VectorXd log_norms;  // log of the state normalisations

    int states() const { return static_cast<int>(c.rows()); }
};

SpectralBasis build_spectral_basis(const BetheSpectrum& spectrum);

/// Worst-case deviation between basis rows and the eigenvectors of the
/// diagonalisation oracle, minimised over the per-row sign.
double max_ed_row_deviation(const SpectralBasis& basis, const Spectrum& ed);

/// Builds the basis and verifies every row against the oracle eigenvector
/// of the same energy. A row off by more than row_tol triggers a re-solve
/// of that state's rapidities at tightened tolerance; a row that still
/// fails raises SolverError.
SpectralBasis build_spectral_basis_checked(BetheSpectrum& spectrum,
                                           const SolverOptions& opts = {},
                                           double row_tol = 1e-6);

}  // namespace scc
