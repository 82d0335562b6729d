#include "scc/bethe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace scc {

namespace {

constexpr double kPoleGuard = 1e-14;

void check_poles(const RapidityVector& e) {
    const int n = e.size();
    for (int a = 0; a < n; ++a) {
        if (std::abs(e.one_minus(a)) < kPoleGuard || std::abs(e.one_plus(a)) < kPoleGuard) {
            std::ostringstream msg;
            msg << "rapidity " << a << " at pole: e = " << e.value(a);
            throw PoleError(msg.str());
        }
        for (int b = a + 1; b < n; ++b)
            if (std::abs(e.diff(a, b)) < kPoleGuard) {
                std::ostringstream msg;
                msg << "rapidities " << a << " and " << b << " collided at " << e.value(a);
                throw PoleError(msg.str());
            }
    }
}

// Natural magnitude of the residual terms; the achievable residual is this
// scale times machine epsilon.
double residual_scale(const RapidityVector& e, const RichardsonProblem& p) {
    const int n = e.size();
    double scale = 1.0;
    for (int a = 0; a < n; ++a) {
        double t = 1.0 + 4.0 * std::abs(p.g) * (p.d0 / std::abs(e.one_minus(a)) +
                                                p.d1 / std::abs(e.one_plus(a)));
        for (int b = 0; b < n; ++b)
            if (b != a) t += 4.0 * std::abs(p.g) / std::abs(e.diff(a, b));
        scale = std::max(scale, t);
    }
    return scale;
}

struct NewtonOutcome {
    bool converged = false;
    double residual_norm = 0.0;
};

// Damped Newton iteration on the offsets. Root paths cannot cross the poles
// at +/-1, so steps that would are shortened: offsets stay positive, and an
// offset anchored at -1 stays below 2.
NewtonOutcome newton_correct(RapidityVector& e, const RichardsonProblem& p,
                             double tol, int max_iter) {
    const int n = e.size();
    RapidityVector best = e;
    double best_norm = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < max_iter; ++iter) {
        Eigen::VectorXd f = richardson_residual(e, p);
        const double fnorm = f.cwiseAbs().maxCoeff();
        if (fnorm < best_norm) {
            best_norm = fnorm;
            best = e;
        }
        if (fnorm <= tol) return {true, fnorm};

        Eigen::MatrixXd j = richardson_jacobian(e, p);
        Eigen::VectorXd step = j.partialPivLu().solve(-f);
        if (!step.allFinite()) break;

        // In offset coordinates the own pole sits at 0 and the other pole
        // at -2*anchor; shorten any step that would reach or cross either.
        double theta = 1.0;
        for (int a = 0; a < n; ++a) {
            for (const double pole : {0.0, -2.0 * e.anchor[a]}) {
                const double dist = e.offset[a] - pole;
                if (dist * (dist + theta * step[a]) <= 0.0)
                    theta = std::min(theta, 0.8 * std::abs(dist) / std::abs(step[a]));
            }
        }

        bool improved = false;
        for (int bt = 0; bt < 8; ++bt) {
            RapidityVector trial = e;
            trial.offset += theta * step;
            double tnorm;
            try {
                tnorm = richardson_residual(trial, p).cwiseAbs().maxCoeff();
            } catch (const PoleError&) {
                theta *= 0.5;
                continue;
            }
            if (tnorm < fnorm || tnorm <= tol) {
                e = trial;
                improved = true;
                break;
            }
            theta *= 0.5;
        }
        if (!improved) break;
    }

    double fnorm = richardson_residual(e, p).cwiseAbs().maxCoeff();
    if (fnorm > best_norm) {
        e = best;
        fnorm = best_norm;
    }
    return {fnorm <= tol, fnorm};
}

RapidityVector seed_rapidities(const RichardsonProblem& p, int k, double g) {
    RapidityVector e;
    e.anchor.resize(p.n);
    e.offset.resize(p.n);
    const Eigen::VectorXd xm = laguerre_zeros(k, 2.0 * p.d1 - 1.0);
    const Eigen::VectorXd xp = laguerre_zeros(p.n - k, 2.0 * p.d0 - 1.0);
    for (int i = 0; i < k; ++i) {
        e.anchor[i] = -1;
        e.offset[i] = 2.0 * g * xm[i];
    }
    for (int i = 0; i < p.n - k; ++i) {
        e.anchor[k + i] = 1;
        e.offset[k + i] = 2.0 * g * xp[i];
    }
    return e;
}

// --- polynomial fallback -------------------------------------------------
//
// With Q(x) = prod_a (x - e_a) monic, the Richardson equations are
// equivalent to the polynomial identity
//   2g (1-x^2) Q'' - [ (1-x^2) + 4g d0 (1+x) - 4g d1 (1-x) ] Q' = (n x + b) Q
// for some scalar b. Coefficients stay smooth when two roots approach each
// other, which is the failure mode of Newton in rapidity space. Solved in a
// scaled variable y = x/sigma to keep the monomial coefficients balanced.

Eigen::VectorXd poly_derivative(const Eigen::VectorXd& c) {
    const int deg = static_cast<int>(c.size()) - 1;
    Eigen::VectorXd d(std::max(deg, 1));
    d.setZero();
    for (int i = 1; i <= deg; ++i) d[i - 1] = i * c[i];
    return d;
}

// Residual of the identity above in the scaled variable; c is the
// coefficient vector of Q~ (ascending, c[n] = 1 when monic). Returns the
// coefficients of degrees 0..n; degree n+1 cancels identically.
Eigen::VectorXd poly_identity_residual(const Eigen::VectorXd& c, double b, int n,
                                       const RichardsonProblem& p, double sigma) {
    const double a2 = 2.0 * p.g / (sigma * sigma);
    const double binv = 1.0 / sigma;
    const double bracket0 = 1.0 + 4.0 * p.g * (p.d0 - p.d1);
    const double bracket1 = 4.0 * p.g * (p.d0 + p.d1) * sigma;

    const Eigen::VectorXd d1c = poly_derivative(c);
    const Eigen::VectorXd d2c = poly_derivative(d1c);

    Eigen::VectorXd r = Eigen::VectorXd::Zero(n + 3);
    for (int i = 0; i < d2c.size(); ++i) {  // a2 (1 - sigma^2 y^2) Q''
        r[i] += a2 * d2c[i];
        r[i + 2] -= a2 * sigma * sigma * d2c[i];
    }
    for (int i = 0; i < d1c.size(); ++i) {  // -(1/sigma)[br0 + br1 y - sigma^2 y^2] Q'
        r[i] -= binv * bracket0 * d1c[i];
        r[i + 1] -= binv * bracket1 * d1c[i];
        r[i + 2] += binv * sigma * sigma * d1c[i];
    }
    for (int i = 0; i < c.size(); ++i) {  // -(n sigma y + b) Q
        r[i + 1] -= n * sigma * c[i];
        r[i] -= b * c[i];
    }
    return r.head(n + 1);
}

Eigen::VectorXd companion_roots(const Eigen::VectorXd& monic) {
    const int n = static_cast<int>(monic.size()) - 1;
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -monic[i];
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    Eigen::VectorXd roots(n);
    for (int i = 0; i < n; ++i) roots[i] = es.eigenvalues()[i].real();
    std::sort(roots.data(), roots.data() + n);
    return roots;
}

}  // namespace

Eigen::VectorXd RapidityVector::values() const {
    Eigen::VectorXd v(size());
    for (int i = 0; i < size(); ++i) v[i] = value(i);
    return v;
}

void RapidityVector::normalize_anchors() {
    for (int i = 0; i < size(); ++i) {
        if (anchor[i] < 0 && offset[i] > 1.0) {
            anchor[i] = 1;
            offset[i] -= 2.0;  // exact for offsets in (1, 2]
        } else if (anchor[i] > 0 && offset[i] < -1.0) {
            anchor[i] = -1;
            offset[i] += 2.0;  // exact for offsets in [-2, -1)
        }
    }
}

RapidityVector RapidityVector::from_values(const Eigen::VectorXd& e) {
    RapidityVector r;
    const int n = static_cast<int>(e.size());
    r.anchor.resize(n);
    r.offset.resize(n);
    for (int i = 0; i < n; ++i) {
        r.anchor[i] = e[i] > 0.0 ? 1 : -1;
        r.offset[i] = e[i] - r.anchor[i];
    }
    return r;
}

void RapidityVector::sort_ascending() {
    const int n = size();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [this](int a, int b) { return diff(a, b) < 0.0; });
    Eigen::VectorXi na(n);
    Eigen::VectorXd no(n);
    for (int i = 0; i < n; ++i) {
        na[i] = anchor[order[i]];
        no[i] = offset[order[i]];
    }
    anchor = na;
    offset = no;
}

Eigen::VectorXd richardson_residual(const RapidityVector& e,
                                    const RichardsonProblem& p) {
    check_poles(e);
    const int n = e.size();
    Eigen::VectorXd f(n);
    for (int a = 0; a < n; ++a) {
        double sum = 0.0;
        for (int b = 0; b < n; ++b)
            if (b != a) sum += 1.0 / e.diff(a, b);
        f[a] = 1.0 + 4.0 * p.g * (p.d0 / e.one_minus(a) - p.d1 / e.one_plus(a)) -
               4.0 * p.g * sum;
    }
    return f;
}

Eigen::VectorXd richardson_residual(const Eigen::VectorXd& e,
                                    const RichardsonProblem& p) {
    return richardson_residual(RapidityVector::from_values(e), p);
}

Eigen::VectorXd richardson_residual(const Eigen::VectorXd& e, const ModelParams& params) {
    return richardson_residual(e, RichardsonProblem::from_params(params));
}

Eigen::MatrixXd richardson_jacobian(const RapidityVector& e,
                                    const RichardsonProblem& p) {
    const int n = e.size();
    Eigen::MatrixXd j(n, n);
    for (int a = 0; a < n; ++a) {
        const double om = e.one_minus(a);
        const double op = e.one_plus(a);
        double diag = p.d0 / (om * om) + p.d1 / (op * op);
        for (int b = 0; b < n; ++b) {
            if (b == a) continue;
            const double d = e.diff(a, b);
            const double inv2 = 1.0 / (d * d);
            diag += inv2;
            j(a, b) = -4.0 * p.g * inv2;
        }
        j(a, a) = 4.0 * p.g * diag;
    }
    return j;
}

EnergyCharges bethe_energy(const RapidityVector& e, const ModelParams& params) {
    check_poles(e);
    const double g = params.g();
    const double d0 = params.d0();
    const double d1 = params.d1();
    double sum_m = 0.0, sum_p = 0.0;
    for (int a = 0; a < e.size(); ++a) {
        sum_m += 1.0 / e.one_minus(a);
        sum_p += 1.0 / e.one_plus(a);
    }
    EnergyCharges out;
    out.r0 = d0 * (1.0 - 2.0 * g * d1 - 4.0 * g * sum_m);
    out.r1 = d1 * (1.0 + 2.0 * g * d0 + 4.0 * g * sum_p);
    out.energy = 2.0 * params.lambda - params.q - 4.0 * params.lambda * out.r0 +
                 2.0 * (params.q - 2.0 * params.lambda) * out.r1;
    return out;
}

EnergyCharges bethe_energy(const Eigen::VectorXd& e, const ModelParams& params) {
    return bethe_energy(RapidityVector::from_values(e), params);
}

Eigen::VectorXd laguerre_zeros(int m, double a) {
    if (m < 0) throw ConfigError("laguerre_zeros: m must be >= 0");
    if (a <= -1.0) throw ConfigError("laguerre_zeros: need a > -1");
    if (m == 0) return Eigen::VectorXd(0);
    SectorMatrix jacobi;
    jacobi.diag.resize(m);
    jacobi.offdiag.resize(std::max(m - 1, 0));
    for (int i = 0; i < m; ++i) jacobi.diag[i] = 2.0 * i + a + 1.0;
    for (int i = 0; i + 1 < m; ++i)
        jacobi.offdiag[i] = std::sqrt((i + 1.0) * (i + 1.0 + a));
    return exact_spectrum(jacobi).energies;
}

RapidityVector refine_state_polynomial(const RapidityVector& approx,
                                       const RichardsonProblem& target,
                                       const SolverOptions& opts) {
    const int n = target.n;
    if (approx.size() != n)
        throw ConfigError("refine_state_polynomial: wrong rapidity count");
    const Eigen::VectorXd e0 = approx.values();
    const double sigma = std::max(1.0, e0.cwiseAbs().maxCoeff());

    // Monic coefficients of prod (y - e_a/sigma), ascending degree.
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n + 1);
    c[0] = 1.0;
    for (int a = 0; a < n; ++a) {
        const double root = e0[a] / sigma;
        for (int i = std::min(a + 1, n); i >= 1; --i) c[i] = c[i - 1] - root * c[i];
        c[0] *= -root;
    }

    // Initial b from the degree-n equation, which reads (terms) - b = 0.
    double b = poly_identity_residual(c, 0.0, n, target, sigma)[n];

    // Newton on (c_0..c_{n-1}, b); the identity is linear in Q at fixed b.
    for (int iter = 0; iter < opts.max_newton_iter; ++iter) {
        const Eigen::VectorXd r = poly_identity_residual(c, b, n, target, sigma);
        const double cnorm = std::max(1.0, c.cwiseAbs().maxCoeff());
        if (r.cwiseAbs().maxCoeff() <= 1e-13 * cnorm * std::max(1.0, std::abs(b))) break;

        Eigen::MatrixXd jac(n + 1, n + 1);
        for (int jcol = 0; jcol < n; ++jcol) {
            Eigen::VectorXd cj = Eigen::VectorXd::Zero(n + 1);
            cj[jcol] = 1.0;
            jac.col(jcol) = poly_identity_residual(cj, b, n, target, sigma);
        }
        jac.col(n) = -c;

        const Eigen::VectorXd step = jac.partialPivLu().solve(-r);
        if (!step.allFinite())
            throw SolverError("polynomial fallback: singular coefficient Jacobian");
        c.head(n) += step.head(n);
        b += step[n];
    }

    RapidityVector roots = RapidityVector::from_values(companion_roots(c) * sigma);

    // Polish in rapidity space; the polynomial solve only needs to land in
    // the Newton basin.
    const NewtonOutcome out =
        newton_correct(roots, target, opts.newton_tol, opts.max_newton_iter);
    if (!out.converged && out.residual_norm > opts.accept_tol) {
        std::ostringstream msg;
        msg << "polynomial fallback: polish stalled at residual " << out.residual_norm;
        throw SolverError(msg.str());
    }
    roots.sort_ascending();
    return roots;
}

RapidityVector solve_state_anchored(const RichardsonProblem& target, int seed_index,
                                    const SolverOptions& opts) {
    if (target.g == 0.0)
        throw ConfigError("solve_state: Richardson equations undefined at g = 0");
    if (seed_index < 0 || seed_index > target.n)
        throw ConfigError("solve_state: seed index out of range");

    if (target.g < 0.0) {
        // e -> -e maps (g, d0, d1) onto (-g, d1, d0); solve the mirrored
        // problem and flip back.
        RichardsonProblem mirror{target.n, -target.g, target.d1, target.d0};
        RapidityVector m = solve_state_anchored(mirror, target.n - seed_index, opts);
        RapidityVector e;
        e.anchor = -m.anchor;
        e.offset = -m.offset;
        e.sort_ascending();
        return e;
    }

    const double g_target = target.g;
    double g0 = std::min(opts.g_seed, g_target);
    RichardsonProblem cur{target.n, g0, target.d0, target.d1};

    RapidityVector e;
    bool seeded = false;
    for (int attempt = 0; attempt < 3 && !seeded; ++attempt) {
        cur.g = g0;
        e = seed_rapidities(target, seed_index, g0);
        seeded = newton_correct(e, cur, opts.newton_tol * residual_scale(e, cur),
                                opts.max_newton_iter)
                     .converged;
        if (!seeded) g0 *= 0.1;
    }
    if (!seeded) {
        std::ostringstream msg;
        msg << "solve_state: seeding failed for state " << seed_index << " at g = " << g0;
        throw SolverError(msg.str());
    }

    const double step0 = (g_target - g0) / opts.initial_steps;
    double step = step0;
    const double min_step = std::max(g_target * opts.min_step_fraction, 1e-300);

    RapidityVector e_prev = e;
    double g_prev = cur.g;
    while (cur.g < g_target) {
        const double g_next = std::min(cur.g + step, g_target);
        RichardsonProblem trial_problem{target.n, g_next, target.d0, target.d1};

        // Secant predictor along the continuation path.
        RapidityVector trial = e;
        if (g_next > cur.g && cur.g > g_prev) {
            const double scale = (g_next - cur.g) / (cur.g - g_prev);
            Eigen::VectorXd extrapolated(e.size());
            bool ok = true;
            for (int i = 0; i < e.size() && ok; ++i) {
                const double dv = (e.anchor[i] - e_prev.anchor[i]) +
                                  (e.offset[i] - e_prev.offset[i]);
                extrapolated[i] = e.offset[i] + scale * dv;
                for (const double pole : {0.0, -2.0 * e.anchor[i]})
                    if ((e.offset[i] - pole) * (extrapolated[i] - pole) <= 0.0) ok = false;
            }
            if (ok) trial.offset = extrapolated;
        }

        NewtonOutcome out;
        try {
            out = newton_correct(trial, trial_problem,
                                 opts.newton_tol * residual_scale(trial, trial_problem),
                                 opts.max_newton_iter);
        } catch (const PoleError&) {
            out.converged = false;
        }

        if (out.converged) {
            e_prev = e;
            g_prev = cur.g;
            trial.normalize_anchors();
            e = trial;
            cur.g = g_next;
            step = std::min({step * 1.4, 8.0 * std::abs(step0), g_target - cur.g + step0});
            continue;
        }

        step *= 0.5;
        if (step >= min_step) continue;

        // Rapidity-space Newton has stalled; switch representation.
        try {
            RichardsonProblem jump{target.n, g_next, target.d0, target.d1};
            e = refine_state_polynomial(e, jump, opts);
            e_prev = e;
            g_prev = cur.g;
            cur.g = g_next;
            step = std::abs(step0);
        } catch (const Error&) {
            std::ostringstream msg;
            msg << "solve_state: continuation stalled for state " << seed_index
                << " at g = " << cur.g << " (step " << step << ", residual "
                << out.residual_norm << ")";
            throw SolverError(msg.str());
        }
    }

    // Final polish at the target coupling, then iterate to the residual
    // floor (a zero tolerance keeps the best iterate and stops at
    // stagnation).
    RichardsonProblem final_problem{target.n, g_target, target.d0, target.d1};
    e.normalize_anchors();
    NewtonOutcome out =
        newton_correct(e, final_problem, opts.newton_tol, opts.max_newton_iter);
    out.residual_norm = newton_correct(e, final_problem, 0.0, 6).residual_norm;
    if (!out.converged && out.residual_norm > opts.accept_tol) {
        std::ostringstream msg;
        msg << "solve_state: state " << seed_index << " finished with residual "
            << out.residual_norm << " above acceptance " << opts.accept_tol;
        throw SolverError(msg.str());
    }

    e.sort_ascending();
    check_poles(e);
    return e;
}

Eigen::VectorXd solve_state(const RichardsonProblem& target, int seed_index,
                            const SolverOptions& opts) {
    return solve_state_anchored(target, seed_index, opts).values();
}

BetheSpectrum solve_rapidities(const ModelParams& params, const SolverOptions& opts) {
    params.validate();
    if (params.lambda == 0.0)
        throw ConfigError("solve_rapidities: g = 2*lambda/q vanishes (lambda = 0)");
    const RichardsonProblem problem = RichardsonProblem::from_params(params);

    BetheSpectrum spectrum;
    spectrum.params = params;
    spectrum.states.reserve(problem.n + 1);

    for (int k = 0; k <= problem.n; ++k) {
        BetheState state;
        state.seed_index = k;
        state.anchored = solve_state_anchored(problem, k, opts);
        state.rapidities = state.anchored.values();
        state.residual_norm =
            richardson_residual(state.anchored, problem).cwiseAbs().maxCoeff();
        const EnergyCharges ec = bethe_energy(state.anchored, params);
        state.energy = ec.energy;
        state.r0 = ec.r0;
        state.r1 = ec.r1;
        spectrum.states.push_back(std::move(state));
    }

    std::sort(spectrum.states.begin(), spectrum.states.end(),
              [](const BetheState& a, const BetheState& b) { return a.energy < b.energy; });

    if (opts.cross_check_with_ed && params.paired_sector() && params.N % 2 == 0) {
        const Spectrum ed = exact_spectrum(build_hamiltonian(params));
        const double scale = std::max(1.0, ed.energies.cwiseAbs().maxCoeff());
        for (int s = 0; s < static_cast<int>(spectrum.states.size()); ++s) {
            const double diff = std::abs(spectrum.states[s].energy - ed.energies[s]);
            if (diff > opts.ed_rel_tol * scale) {
                std::ostringstream msg;
                msg << "solve_rapidities: state " << s << " energy "
                    << spectrum.states[s].energy << " deviates from the oracle value "
                    << ed.energies[s] << " (rel " << diff / scale << ")";
                throw SolverError(msg.str());
            }
        }
    }
    return spectrum;
}

}  // namespace scc
