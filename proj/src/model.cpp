#include "scc/model.hpp"

#include <cmath>
#include <string>

namespace scc {

double ModelParams::g() const {
    if (q == 0.0) throw ConfigError("ModelParams: g = 2*lambda/q undefined at q = 0");
    return 2.0 * lambda / q;
}

void ModelParams::validate() const {
    if (N < 2) throw ConfigError("ModelParams: N must be >= 2, got " + std::to_string(N));
    if (nu0 != 0 && nu0 != 1)
        throw ConfigError("ModelParams: nu0 must be 0 or 1, got " + std::to_string(nu0));
    if (nu1 < 0) throw ConfigError("ModelParams: nu1 must be >= 0, got " + std::to_string(nu1));
    if ((N - nu0 - nu1) % 2 != 0)
        throw ConfigError("ModelParams: N - nu0 - nu1 must be even (integer pair count)");
    if (pairs() < 1) throw ConfigError("ModelParams: at least one pair required");
    if (!std::isfinite(lambda) || !std::isfinite(q))
        throw ConfigError("ModelParams: couplings must be finite");
}

Eigen::MatrixXd SectorMatrix::dense() const {
    const int m = dim();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < m; ++k) out(k, k) = diag[k];
    for (int k = 0; k + 1 < m; ++k) {
        out(k, k + 1) = offdiag[k];
        out(k + 1, k) = offdiag[k];
    }
    return out;
}

SectorMatrix build_hamiltonian(const ModelParams& params) {
    params.validate();
    if (params.N % 2 != 0)
        throw ConfigError("build_hamiltonian: N must be even, got " + std::to_string(params.N));
    if (!params.paired_sector())
        throw ConfigError("build_hamiltonian: only the paired sector nu0 = nu1 = 0 is supported");

    const int n = params.pairs();
    const double lam = params.lambda;
    const double q = params.q;

    SectorMatrix m;
    m.diag.resize(n + 1);
    m.offdiag.resize(n);
    for (int k = 0; k <= n; ++k)
        m.diag[k] = 2.0 * k * (4.0 * lam * (n - k) + q - lam);
    for (int k = 0; k < n; ++k) {
        const double nk = static_cast<double>(n - k);
        m.offdiag[k] = -2.0 * lam * (k + 1) * std::sqrt(2.0 * nk * (2.0 * nk - 1.0));
    }
    return m;
}

Spectrum exact_spectrum(const SectorMatrix& matrix) {
    if (!matrix.diag.allFinite() || !matrix.offdiag.allFinite())
        throw ConfigError("exact_spectrum: matrix entries must be finite");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(matrix.diag, matrix.offdiag,
                                  Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
        throw SolverError("exact_spectrum: tridiagonal eigensolver failed");
    return Spectrum{solver.eigenvalues(), solver.eigenvectors()};
}

FockNormTable fock_norms(int n) {
    if (n < 1) throw ConfigError("fock_norms: n must be >= 1");
    FockNormTable table;
    table.log_values.resize(n + 1);
    const double log2 = std::log(2.0);
    for (int k = 0; k <= n; ++k) {
        table.log_values[k] = 2.0 * (k - n) * log2 + std::lgamma(2.0 * (n - k) + 1.0) +
                              2.0 * std::lgamma(k + 1.0);
    }
    return table;
}

ConservedCharges build_conserved_charges(const ModelParams& params) {
    params.validate();
    if (!params.paired_sector())
        throw ConfigError("build_conserved_charges: only the paired sector is supported");
    const double g = params.g();  // rejects q = 0

    const int n = params.pairs();
    ConservedCharges c;
    c.r0 = Eigen::MatrixXd::Zero(n + 1, n + 1);
    c.r1 = Eigen::MatrixXd::Zero(n + 1, n + 1);

    // lz, kz are the ladder-diagonal values of the two su(1,1) Cartan
    // generators; the pair-hopping term couples neighbours.
    for (int k = 0; k <= n; ++k) {
        const double lz = (n - k) + 0.25;
        const double kz = k + 0.5;
        c.r0(k, k) = lz - 2.0 * g * lz * kz;
        c.r1(k, k) = kz + 2.0 * g * lz * kz;
    }
    for (int k = 0; k < n; ++k) {
        const double nk = static_cast<double>(n - k);
        const double hop = 0.5 * (k + 1) * std::sqrt(2.0 * nk * (2.0 * nk - 1.0));
        c.r0(k, k + 1) = g * hop;
        c.r0(k + 1, k) = g * hop;
        c.r1(k, k + 1) = -g * hop;
        c.r1(k + 1, k) = -g * hop;
    }
    return c;
}

}  // namespace scc
