#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "scc/spectral_basis.hpp"

using namespace scc;

namespace {

Eigen::VectorXd alpha_values(const AlphaCoefficients& a) {
    Eigen::VectorXd v(a.log_magnitude.size());
    for (int k = 0; k < v.size(); ++k)
        v[k] = a.sign[k] == 0 ? 0.0 : a.sign[k] * std::exp(a.log_magnitude[k]);
    return v;
}

}  // namespace

TEST_CASE("alpha coefficients: single-pair hand values") {
    Eigen::VectorXd e(1);
    e << 0.0;
    Eigen::VectorXd a = alpha_values(alpha_coefficients(e));
    CHECK(a[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(a[1] == doctest::Approx(-1.0).epsilon(1e-14));

    e << 3.0;
    a = alpha_values(alpha_coefficients(e));
    CHECK(a[0] == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(a[1] == doctest::Approx(-0.25).epsilon(1e-14));
}

TEST_CASE("alpha coefficients: two-pair middle entry equals the pair sum") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-0.9, 0.9);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd e(2);
        e << dist(rng), 1.5 + std::abs(dist(rng));
        const Eigen::VectorXd a = alpha_values(alpha_coefficients(e));
        const double expected = -1.0 / (1.0 + e[0]) / (1.0 - e[1]) -
                                1.0 / (1.0 + e[1]) / (1.0 - e[0]);
        CHECK(a[1] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("alpha recursion equals the permutation sum for n <= 6") {
    std::mt19937 rng(123);
    std::uniform_real_distribution<double> inner(-0.85, 0.85);
    std::uniform_real_distribution<double> outer(1.2, 4.0);
    for (int n = 2; n <= 6; ++n) {
        for (int trial = 0; trial < 20; ++trial) {
            Eigen::VectorXd e(n);
            for (int i = 0; i < n; ++i)
                e[i] = (rng() % 2 == 0) ? inner(rng) : outer(rng);
            bool distinct = true;
            for (int i = 0; i < n && distinct; ++i)
                for (int j = i + 1; j < n; ++j)
                    if (std::abs(e[i] - e[j]) < 1e-3) distinct = false;
            if (!distinct) continue;

            const Eigen::VectorXd fast = alpha_values(alpha_coefficients(e));
            const Eigen::VectorXd slow = oracle::alpha_by_permutations(e);
            for (int k = 0; k <= n; ++k)
                CHECK(fast[k] ==
                      doctest::Approx(slow[k]).epsilon(1e-10).scale(slow.cwiseAbs().maxCoeff()));
        }
    }
}

TEST_CASE("alpha coefficients reject poles") {
    Eigen::VectorXd e(2);
    e << 1.0 + 1e-16, 2.0;
    CHECK_THROWS_AS(alpha_coefficients(e), PoleError);
}

TEST_CASE("spectral basis of the micro case") {
    const ModelParams p{.N = 2, .lambda = 1.0, .q = 2.0};
    const BetheSpectrum spec = solve_rapidities(p);
    const SpectralBasis basis = build_spectral_basis(spec);

    // Ascending energy: row 0 is E = -2 (e = 3), row 1 is E = 4 (e = 0).
    CHECK(basis.energies[0] == doctest::Approx(-2.0));
    CHECK(basis.energies[1] == doctest::Approx(4.0));
    CHECK(basis.c(0, 0) == doctest::Approx(-std::sqrt(2.0 / 3.0)).epsilon(1e-10));
    CHECK(basis.c(0, 1) == doctest::Approx(-std::sqrt(1.0 / 3.0)).epsilon(1e-10));
    CHECK(basis.c(1, 0) == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-10));
    CHECK(basis.c(1, 1) == doctest::Approx(-std::sqrt(2.0 / 3.0)).epsilon(1e-10));

    // The initial ladder state expands with unit weight over the rows.
    CHECK(basis.c.col(0).squaredNorm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("orthogonality and oracle match across the figure couplings") {
    for (double q : {4.0 / 3.0, 6.0, 60.0, 1000.0}) {
        const ModelParams p{.N = 100, .lambda = 1.0, .q = q};
        BetheSpectrum spec = solve_rapidities(p);
        const SpectralBasis basis = build_spectral_basis_checked(spec);

        const int m = basis.states();
        const Eigen::MatrixXd gram = basis.c * basis.c.transpose();
        const double ortho =
            (gram - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
        CHECK(ortho <= 1e-8);

        const Spectrum ed = exact_spectrum(build_hamiltonian(p));
        CHECK(max_ed_row_deviation(basis, ed) <= 1e-6);

        for (int s = 0; s < m; ++s)
            CHECK(basis.c.row(s).squaredNorm() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("rows stay real and finite in the near-pole regime") {
    const ModelParams p{.N = 60, .lambda = 1.0, .q = 1e5};
    BetheSpectrum spec = solve_rapidities(p);
    const SpectralBasis basis = build_spectral_basis_checked(spec);
    CHECK(basis.c.allFinite());
    const int m = basis.states();
    const Eigen::MatrixXd gram = basis.c * basis.c.transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff() <= 1e-8);
}
