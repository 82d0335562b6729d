#pragma once

#include <Eigen/Dense>

#include "scc/errors.hpp"

namespace scc {

/// Parameters of the three-species spin-changing-collision model.
///
/// The Hilbert space splits into sectors labelled by the seniorities
/// (nu0, nu1), the numbers of unpaired 0-bosons and unpaired +/- bosons.
/// All interferometric work happens in the fully paired sector
/// nu0 = nu1 = 0, where the pair count is n = N/2.
struct ModelParams {
    int N = 0;           // total boson number (even, >= 2)
    double lambda = 0;   // pair-conversion coupling
    double q = 0;        // microwave dressing
    int nu0 = 0;         // seniority of the 0 mode (0 or 1)
    int nu1 = 0;         // seniority of the +/- modes (>= 0)

    int pairs() const { return (N - nu0 - nu1) / 2; }
    bool paired_sector() const { return nu0 == 0 && nu1 == 0; }

    // Derived couplings. Never stored; always recomputed.
    double g() const;
    double d0() const { return (nu0 + 0.5) / 2.0; }
    double d1() const { return (nu1 + 1.0) / 2.0; }

    // Throws ConfigError when the fields are inconsistent.
    void validate() const;
};

/// Symmetric tridiagonal matrix of H restricted to one paired sector,
/// in the ladder basis ordered by the number k of +/- pairs.
struct SectorMatrix {
    Eigen::VectorXd diag;     // size n+1
    Eigen::VectorXd offdiag;  // size n, coupling k <-> k+1

    int dim() const { return static_cast<int>(diag.size()); }
    Eigen::MatrixXd dense() const;
    double trace() const {
        double t = 0.0;
        for (int k = 0; k < diag.size(); ++k) t += diag[k];
        return t;
    }
};

/// Full eigendecomposition of a SectorMatrix (the diagonalisation oracle).
struct Spectrum {
    Eigen::VectorXd energies;  // ascending
    Eigen::MatrixXd vectors;   // column j is the eigenvector of energies[j]
};

/// Squared norms N_k of the unnormalised paired Fock states, stored as
/// log magnitudes (they overflow doubles already near n ~ 85).
struct FockNormTable {
    Eigen::VectorXd log_values;  // log N_k for k = 0..n

    int pair_count() const { return static_cast<int>(log_values.size()) - 1; }
};

/// Matrices of the two commuting conserved charges on the paired sector.
struct ConservedCharges {
    Eigen::MatrixXd r0;
    Eigen::MatrixXd r1;
};

/// Sector Hamiltonian in the paired ladder basis.
///
/// diag[k]    = 2k (4 lambda (n-k) + q - lambda)
/// offdiag[k] = -2 lambda (k+1) sqrt(2(n-k)(2(n-k)-1))
///
/// The sign of the off-diagonal follows the pair-creation convention of the
/// basis states, in which the +/- pair creator carries a minus sign.
SectorMatrix build_hamiltonian(const ModelParams& params);

/// All eigenvalues (ascending) and orthonormal eigenvectors of a sector
/// matrix. Backed by a dedicated symmetric-tridiagonal eigensolver; serves
/// as the independent oracle for the Bethe solver.
Spectrum exact_spectrum(const SectorMatrix& matrix);

/// N_k = 2^{2(k-n)} [2(n-k)]! (k!)^2 for k = 0..n, as log magnitudes.
FockNormTable fock_norms(int n);

/// The commuting charge pair (R0, R1) with H = 2 lambda - q
/// - 4 lambda R0 + 2 (q - 2 lambda) R1. Requires q != 0.
ConservedCharges build_conserved_charges(const ModelParams& params);

}  // namespace scc
