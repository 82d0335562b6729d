#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "scc/bethe.hpp"

using namespace scc;

namespace {
const ModelParams kMicro{.N = 2, .lambda = 1.0, .q = 2.0};  // g = 1
}

TEST_CASE("Richardson residual: hand-substituted single-pair values") {
    const RichardsonProblem p = RichardsonProblem::from_params(kMicro);
    CHECK(p.g == doctest::Approx(1.0));
    CHECK(p.d0 == doctest::Approx(0.25));
    CHECK(p.d1 == doctest::Approx(0.5));

    Eigen::VectorXd e(1);
    e << 0.0;
    CHECK(richardson_residual(e, p)[0] == doctest::Approx(0.0).epsilon(1e-14));
    e << 3.0;
    CHECK(richardson_residual(e, p)[0] == doctest::Approx(0.0).epsilon(1e-14));
    e << 2.0;
    CHECK(richardson_residual(e, p)[0] == doctest::Approx(-2.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("Richardson residual: pole rejection") {
    const RichardsonProblem p{2, 1.0, 0.25, 0.5};
    Eigen::VectorXd e(2);
    e << 1.0 + 1e-16, 3.0;
    CHECK_THROWS_AS(richardson_residual(e, p), PoleError);
    e << 2.0, 2.0 + 1e-16;
    CHECK_THROWS_AS(richardson_residual(e, p), PoleError);
}

TEST_CASE("Richardson Jacobian matches finite differences") {
    const RichardsonProblem p{3, 0.7, 0.25, 0.5};
    Eigen::VectorXd e(3);
    e << -0.4, 0.3, 2.1;
    const Eigen::MatrixXd jac = richardson_jacobian(RapidityVector::from_values(e), p);
    const double h = 1e-7;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            Eigen::VectorXd ep = e, em = e;
            ep[b] += h;
            em[b] -= h;
            const double fd =
                (richardson_residual(ep, p)[a] - richardson_residual(em, p)[a]) / (2 * h);
            CHECK(jac(a, b) == doctest::Approx(fd).epsilon(1e-6));
        }
}

TEST_CASE("Bethe energy and charges: single-pair hand values") {
    Eigen::VectorXd e(1);
    e << 0.0;
    EnergyCharges ec = bethe_energy(e, kMicro);
    CHECK(ec.energy == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(ec.r0 == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(ec.r1 == doctest::Approx(2.75).epsilon(1e-14));

    e << 3.0;
    ec = bethe_energy(e, kMicro);
    CHECK(ec.energy == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(ec.r0 == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(ec.r1 == doctest::Approx(1.25).epsilon(1e-14));
}

TEST_CASE("Laguerre zeros") {
    // L_1 has its zero at 1; L_1^(-1/2) at 1/2; L_2 at 2 -+ sqrt(2).
    CHECK(laguerre_zeros(1, 0.0)[0] == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(laguerre_zeros(1, -0.5)[0] == doctest::Approx(0.5).epsilon(1e-13));
    const Eigen::VectorXd z2 = laguerre_zeros(2, 0.0);
    CHECK(z2[0] == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-13));
    CHECK(z2[1] == doctest::Approx(2.0 + std::sqrt(2.0)).epsilon(1e-13));
    CHECK(laguerre_zeros(0, 0.0).size() == 0);
}

TEST_CASE("micro case: rapidity sets {0} and {3}") {
    const BetheSpectrum spec = solve_rapidities(kMicro);
    REQUIRE(spec.states.size() == 2);
    // Ascending energy: E = -2 (e = 3) then E = 4 (e = 0).
    CHECK(spec.states[0].energy == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(spec.states[0].rapidities[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(spec.states[1].energy == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(std::abs(spec.states[1].rapidities[0]) < 1e-12);
    for (const auto& s : spec.states) CHECK(s.residual_norm <= 1e-10);
}

TEST_CASE("single pair at weak coupling approaches the poles") {
    // Roots of e^2 - 3ge + g - 1 = 0: e -> 1 + g and -1 + 2g as g -> 0.
    const double g = 1e-3;
    const ModelParams p{.N = 2, .lambda = g / 2.0, .q = 1.0};
    const BetheSpectrum spec = solve_rapidities(p);
    const double disc = std::sqrt(9.0 * g * g - 4.0 * g + 4.0);
    const double e_plus = (3.0 * g + disc) / 2.0;
    const double e_minus = (3.0 * g - disc) / 2.0;
    // State continued from the ladder bottom keeps its rapidity near +1.
    bool found_plus = false, found_minus = false;
    for (const auto& s : spec.states) {
        if (std::abs(s.rapidities[0] - e_plus) < 1e-12) found_plus = true;
        if (std::abs(s.rapidities[0] - e_minus) < 1e-12) found_minus = true;
    }
    CHECK(found_plus);
    CHECK(found_minus);
    CHECK(std::abs(e_plus - (1.0 + g)) < 3.0 * g * g);
    CHECK(std::abs(e_minus - (-1.0 + 2.0 * g)) < 3.0 * g * g);
}

TEST_CASE("weak coupling energies follow the ladder pattern") {
    // At g -> 0 the energy of the state with k pairs tends to 2kq.
    const double q = 3.0;
    const double g = 1e-8;
    const ModelParams p{.N = 12, .lambda = g * q / 2.0, .q = q};
    const BetheSpectrum spec = solve_rapidities(p);
    for (int k = 0; k < static_cast<int>(spec.states.size()); ++k)
        CHECK(std::abs(spec.states[k].energy - 2.0 * k * q) < 1e-4);
}

TEST_CASE("figure-scale spectrum matches the diagonalisation oracle") {
    const ModelParams p{.N = 100, .lambda = 1.0, .q = 4.0 / 3.0};
    const BetheSpectrum spec = solve_rapidities(p);  // internal cross-check at 1e-8
    REQUIRE(spec.states.size() == 51);
    const Spectrum ed = exact_spectrum(build_hamiltonian(p));
    const double scale = ed.energies.cwiseAbs().maxCoeff();
    for (int s = 0; s <= 50; ++s)
        CHECK(std::abs(spec.states[s].energy - ed.energies[s]) <= 1e-8 * scale);
    for (const auto& s : spec.states) CHECK(s.residual_norm <= 1e-10);
}

TEST_CASE("solver handles a coupling grid against the oracle") {
    for (double q : {6.0, 60.0, 1000.0}) {
        const ModelParams p{.N = 50, .lambda = 1.0, .q = q};
        const BetheSpectrum spec = solve_rapidities(p);
        CHECK(spec.states.size() == 26u);
        for (const auto& s : spec.states) CHECK(s.residual_norm <= 1e-10);
    }
}

TEST_CASE("negative couplings are accepted") {
    for (const ModelParams p : {ModelParams{.N = 8, .lambda = -0.8, .q = 2.0},
                                ModelParams{.N = 8, .lambda = 0.8, .q = -2.0}}) {
        const BetheSpectrum spec = solve_rapidities(p);  // oracle cross-check inside
        CHECK(spec.states.size() == 5u);
        for (const auto& s : spec.states) CHECK(s.residual_norm <= 1e-10);
    }
}

TEST_CASE("state charges reproduce the energy linearly") {
    const ModelParams p{.N = 20, .lambda = 1.0, .q = 4.0 / 3.0};
    const BetheSpectrum spec = solve_rapidities(p);
    for (const auto& s : spec.states) {
        const double rebuilt = 2.0 * p.lambda - p.q - 4.0 * p.lambda * s.r0 +
                               2.0 * (p.q - 2.0 * p.lambda) * s.r1;
        CHECK(rebuilt == doctest::Approx(s.energy).epsilon(1e-13));
    }
}

TEST_CASE("distinct states have distinct rapidity sets") {
    const ModelParams p{.N = 30, .lambda = 1.0, .q = 2.0};
    const BetheSpectrum spec = solve_rapidities(p);
    for (size_t i = 0; i + 1 < spec.states.size(); ++i)
        for (size_t j = i + 1; j < spec.states.size(); ++j) {
            const double dist = (spec.states[i].rapidities - spec.states[j].rapidities)
                                    .cwiseAbs()
                                    .maxCoeff();
            CHECK(dist > 1e-6);
        }
}

TEST_CASE("polynomial fallback reproduces the continuation result") {
    const ModelParams p{.N = 16, .lambda = 1.0, .q = 4.0 / 3.0};
    const RichardsonProblem problem = RichardsonProblem::from_params(p);
    for (int k : {0, 3, 8}) {
        const Eigen::VectorXd exact = solve_state(problem, k);
        // Perturb and hand the polynomial route a deliberately rough start.
        Eigen::VectorXd rough = exact;
        for (int i = 0; i < rough.size(); ++i)
            rough[i] += 1e-3 * ((i % 2 == 0) ? 1.0 : -1.0) * (1.0 + std::abs(rough[i]));
        const Eigen::VectorXd refined =
            refine_state_polynomial(RapidityVector::from_values(rough), problem).values();
        CHECK((refined - exact).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("solver rejects degenerate couplings") {
    CHECK_THROWS_AS(solve_rapidities({.N = 4, .lambda = 0.0, .q = 2.0}), ConfigError);
    CHECK_THROWS_AS(solve_rapidities({.N = 4, .lambda = 1.0, .q = 0.0}), ConfigError);
}
