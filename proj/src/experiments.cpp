#include "scc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace scc {

namespace {

constexpr double kGuardBand = 1e-3;  // radians around multiples of pi

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

int worker_count() {
    const char* env = std::getenv("SCCINT_THREADS");
    if (!env) return 1;
    const int v = std::atoi(env);
    return v > 0 ? v : 1;
}

// Index-parallel loop; every index writes only its own slots, so results do
// not depend on scheduling.
template <typename F>
void parallel_for(int count, F&& fn) {
    const int workers = std::min(worker_count(), count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

ModelParams model_from(const KeyValueConfig& cfg) {
    for (const char* key : {"N", "lambda", "q"})
        if (!cfg.has(key))
            throw ConfigError(std::string("config: missing required key '") + key + "'");
    ModelParams p;
    p.N = cfg.integer_or("N", 0);
    p.lambda = cfg.number("lambda");
    p.q = cfg.number("q");
    p.nu0 = cfg.integer_or("nu0", 0);
    p.nu1 = cfg.integer_or("nu1", 0);
    p.validate();
    return p;
}

void append_model_metadata(std::vector<std::pair<std::string, std::string>>& meta,
                           const ModelParams& p) {
    meta.emplace_back("N", std::to_string(p.N));
    meta.emplace_back("lambda", format_number(p.lambda));
    meta.emplace_back("q", format_number(p.q));
    meta.emplace_back("nu0", std::to_string(p.nu0));
    meta.emplace_back("nu1", std::to_string(p.nu1));
}

SpectralBasis solve_basis(const ModelParams& p) {
    BetheSpectrum spec = solve_rapidities(p);
    return build_spectral_basis_checked(spec);
}

// Uniform dwell samples of <eta>(u) over `periods` fringe periods of the
// guessed frequency, handed to the spectral estimator.
PhaseCalibration calibrate_sequence(const SequenceContext& ctx, double guess,
                                    int samples = 1024, double periods = 8.0) {
    const double umax = periods * 2.0 * std::numbers::pi / guess;
    Eigen::VectorXd u(samples), eta(samples);
    std::vector<double> vals(samples);
    parallel_for(samples, [&](int j) {
        const double uj = umax * j / samples;
        vals[j] = observable_moments(ctx.output_at(uj), ctx.reference()).mean_eta;
    });
    for (int j = 0; j < samples; ++j) {
        u[j] = umax * j / samples;
        eta[j] = vals[j];
    }
    return estimate_fringe_frequency(u, eta);
}

double quasifree_frequency_guess(const SpectralBasis& primed) {
    return primed.energies[1] - primed.energies[0];
}

bool in_guard_band(double phi) {
    return std::abs(std::remainder(phi, std::numbers::pi)) < kGuardBand;
}

std::string join_flags(const std::vector<std::string>& flags) {
    std::string out;
    for (const auto& f : flags) {
        if (!out.empty()) out += ';';
        out += f;
    }
    return out;
}

// Cheap post-run health check reported in every experiment summary.
std::string quick_validation(const BetheSpectrum& spec, const SpectralBasis& basis) {
    const RichardsonProblem problem = RichardsonProblem::from_params(spec.params);
    double worst_res = 0.0;
    for (const auto& s : spec.states)
        worst_res = std::max(
            worst_res, richardson_residual(s.anchored, problem).cwiseAbs().maxCoeff());
    if (worst_res > 1e-10) return "FAILED(residual " + format_number(worst_res) + ")";
    const int m = basis.states();
    const double ortho = (basis.c * basis.c.transpose() -
                          Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
    if (ortho > 1e-8) return "FAILED(orthogonality " + format_number(ortho) + ")";
    return "ok";
}

struct SequenceSetup {
    bool quasifree = false;
    double omega = 1000.0;
    double omega0 = 0.0;
    double q_prime = 1000.0;
    double t = 0.006;
};

SequenceSetup sequence_from(const KeyValueConfig& cfg) {
    SequenceSetup s;
    const std::string kind = cfg.str("sequence", "free");
    if (kind == "quasifree")
        s.quasifree = true;
    else if (kind != "free")
        throw ConfigError("config: sequence must be 'free' or 'quasifree', got '" + kind +
                          "'");
    s.omega = cfg.number_or("omega", 1000.0);
    s.omega0 = cfg.number_or("omega0", 0.0);
    s.q_prime = cfg.number_or("q_prime", 1000.0);
    s.t = cfg.number_or("t", 0.006);
    return s;
}

void append_sequence_metadata(std::vector<std::pair<std::string, std::string>>& meta,
                              const SequenceSetup& s) {
    meta.emplace_back("sequence", s.quasifree ? "quasifree" : "free");
    if (s.quasifree) {
        meta.emplace_back("q_prime", format_number(s.q_prime));
    } else {
        meta.emplace_back("omega", format_number(s.omega));
        meta.emplace_back("omega0", format_number(s.omega0));
    }
    meta.emplace_back("t", format_number(s.t));
}

// ---------------------------------------------------------------------------
// experiment runners

ExperimentResult run_spectrum(const KeyValueConfig& cfg) {
    const ModelParams model = model_from(cfg);
    BetheSpectrum spec = solve_rapidities(model);
    const SpectralBasis basis = build_spectral_basis_checked(spec);
    const Spectrum ed = exact_spectrum(build_hamiltonian(model));
    const RichardsonProblem problem = RichardsonProblem::from_params(model);

    ExperimentResult res;
    append_model_metadata(res.table.metadata, model);
    res.table.columns = {"state", "energy", "r0", "r1", "residual_norm",
                         "ed_energy", "ed_abs_diff", "rapidities"};

    double worst_res = 0.0, worst_ed = 0.0;
    for (int s = 0; s < static_cast<int>(spec.states.size()); ++s) {
        const BetheState& st = spec.states[s];
        const double res_norm =
            richardson_residual(st.anchored, problem).cwiseAbs().maxCoeff();
        const double ed_diff = std::abs(st.energy - ed.energies[s]);
        worst_res = std::max(worst_res, res_norm);
        worst_ed = std::max(worst_ed, ed_diff);
        std::string raps;
        for (int i = 0; i < st.rapidities.size(); ++i) {
            if (i) raps += ';';
            raps += format_number(st.rapidities[i]);
        }
        res.table.rows.push_back({Cell{double(s)}, Cell{st.energy}, Cell{st.r0},
                                  Cell{st.r1}, Cell{res_norm}, Cell{ed.energies[s]},
                                  Cell{ed_diff}, Cell{raps}});
    }
    res.summary.emplace_back("states", std::to_string(spec.states.size()));
    res.summary.emplace_back("worst_residual", format_number(worst_res));
    res.summary.emplace_back("worst_ed_abs_diff", format_number(worst_ed));
    res.summary.emplace_back("validation", quick_validation(spec, basis));
    return res;
}

ExperimentResult run_seed_sweep(const KeyValueConfig& cfg) {
    const ModelParams model = model_from(cfg);
    std::vector<double> q_values = cfg.has("q_values") ? cfg.number_list("q_values")
                                                       : std::vector<double>{model.q};
    const double t_min = cfg.number_or("t_min", 0.0);
    const double t_max = cfg.number_or("t_max", 0.05);
    const int steps = cfg.integer_or("steps", 501);
    if (steps < 2 || t_max <= t_min)
        throw ConfigError("seed-sweep: need steps >= 2 and t_max > t_min");

    ExperimentResult res;
    append_model_metadata(res.table.metadata, model);
    {
        std::string qs;
        for (size_t i = 0; i < q_values.size(); ++i)
            qs += (i ? "," : "") + format_number(q_values[i]);
        res.table.metadata.emplace_back("q_values", qs);
    }
    res.table.metadata.emplace_back("t_min", format_number(t_min));
    res.table.metadata.emplace_back("t_max", format_number(t_max));
    res.table.metadata.emplace_back("steps", std::to_string(steps));
    res.table.columns = {"q", "t", "eta1", "flags"};

    std::string status = "ok";
    for (const double q : q_values) {
        ModelParams m = model;
        m.q = q;
        BetheSpectrum spec = solve_rapidities(m);
        const SpectralBasis basis = build_spectral_basis_checked(spec);
        const std::string check = quick_validation(spec, basis);
        if (check != "ok") status = check;

        std::vector<double> eta(steps);
        parallel_for(steps, [&](int j) {
            const double t = t_min + (t_max - t_min) * j / (steps - 1);
            eta[j] = seeded_pair_number(basis, t);
        });
        for (int j = 0; j < steps; ++j) {
            const double t = t_min + (t_max - t_min) * j / (steps - 1);
            res.table.rows.push_back(
                {Cell{q}, Cell{t}, Cell{eta[j]}, Cell{std::string{}}});
        }
    }
    res.summary.emplace_back("rows", std::to_string(res.table.rows.size()));
    res.summary.emplace_back("validation", status);
    return res;
}

ExperimentResult run_dwell_sweep(const KeyValueConfig& cfg) {
    const ModelParams model = model_from(cfg);
    const SequenceSetup seq = sequence_from(cfg);
    const double u_min = cfg.number_or("u_min", 0.0);
    const double u_max = cfg.number_or("u_max", 0.01);
    const int steps = cfg.integer_or("steps", 501);
    if (steps < 2 || u_max <= u_min)
        throw ConfigError("dwell-sweep: need steps >= 2 and u_max > u_min");

    BetheSpectrum spec = solve_rapidities(model);
    const SpectralBasis basis = build_spectral_basis_checked(spec);
    SpectralBasis primed;
    SequenceContext ctx = SequenceContext::free_stage(basis, seq.omega, seq.omega0, seq.t);
    double guess = 2.0 * seq.omega;
    if (seq.quasifree) {
        ModelParams mp = model;
        mp.q = seq.q_prime;
        primed = solve_basis(mp);
        ctx = SequenceContext::quasifree_stage(basis, primed, seq.t);
        guess = quasifree_frequency_guess(primed);
    }

    ExperimentResult res;
    append_model_metadata(res.table.metadata, model);
    append_sequence_metadata(res.table.metadata, seq);
    res.table.metadata.emplace_back("u_min", format_number(u_min));
    res.table.metadata.emplace_back("u_max", format_number(u_max));
    res.table.metadata.emplace_back("steps", std::to_string(steps));
    res.table.columns = {"u", "mean_eta", "var_eta", "flags"};

    std::vector<Moments> moments(steps);
    parallel_for(steps, [&](int j) {
        const double u = u_min + (u_max - u_min) * j / (steps - 1);
        moments[j] = observable_moments(ctx.output_at(u), basis);
    });
    for (int j = 0; j < steps; ++j) {
        const double u = u_min + (u_max - u_min) * j / (steps - 1);
        res.table.rows.push_back({Cell{u}, Cell{moments[j].mean_eta},
                                  Cell{moments[j].var_eta}, Cell{std::string{}}});
    }

    res.summary.emplace_back("eta1", format_number(seeded_pair_number(basis, seq.t)));
    try {
        const PhaseCalibration cal = calibrate_sequence(ctx, guess);
        res.summary.emplace_back("omega_fringe", format_number(cal.omega));
        res.summary.emplace_back(
            "fringe_period", format_number(2.0 * std::numbers::pi / cal.omega));
    } catch (const NoDominantPeakError&) {
        res.summary.emplace_back("omega_fringe", "none (no dominant peak)");
    }
    res.summary.emplace_back("validation", quick_validation(spec, basis));
    return res;
}

ExperimentResult run_phase_sweep(const KeyValueConfig& cfg) {
    const ModelParams model = model_from(cfg);
    const SequenceSetup seq = sequence_from(cfg);
    const double phi_min = cfg.number_or("phi_min", 0.0);
    const double phi_max = cfg.number_or("phi_max", 2.0 * std::numbers::pi);
    const int steps = cfg.integer_or("steps", 629);
    const double delta = cfg.number_or("delta", 1e-5);
    if (steps < 2 || phi_max <= phi_min)
        throw ConfigError("phase-sweep: need steps >= 2 and phi_max > phi_min");

    BetheSpectrum spec = solve_rapidities(model);
    const SpectralBasis basis = build_spectral_basis_checked(spec);
    SpectralBasis primed;
    SequenceContext ctx = SequenceContext::free_stage(basis, seq.omega, seq.omega0, seq.t);
    double guess = 2.0 * seq.omega;
    if (seq.quasifree) {
        ModelParams mp = model;
        mp.q = seq.q_prime;
        primed = solve_basis(mp);
        ctx = SequenceContext::quasifree_stage(basis, primed, seq.t);
        guess = quasifree_frequency_guess(primed);
    }
    const PhaseCalibration cal = calibrate_sequence(ctx, guess);
    const double eta1 = seeded_pair_number(basis, seq.t);
    const double sql = 1.0 / eta1;
    const double heis = 1.0 / (eta1 * (eta1 + 2.0));

    ExperimentResult res;
    append_model_metadata(res.table.metadata, model);
    append_sequence_metadata(res.table.metadata, seq);
    res.table.metadata.emplace_back("phi_min", format_number(phi_min));
    res.table.metadata.emplace_back("phi_max", format_number(phi_max));
    res.table.metadata.emplace_back("steps", std::to_string(steps));
    res.table.metadata.emplace_back("delta", format_number(delta));
    res.table.metadata.emplace_back("omega_fringe", format_number(cal.omega));
    res.table.metadata.emplace_back("eta1", format_number(eta1));
    res.table.columns = {"phi",          "eta1",   "mean_eta", "var_eta",
                         "delta_phi_sq", "proxy_delta_phi_sq", "fisher",
                         "sql_ref",      "heisenberg_ref",     "flags"};

    std::vector<std::vector<Cell>> rows(steps);
    parallel_for(steps, [&](int j) {
        const double phi = phi_min + (phi_max - phi_min) * j / (steps - 1);
        std::vector<std::string> flags;
        const Moments mom = observable_moments(ctx.output_at(phi / cal.omega), basis);

        Cell ep_cell{}, fisher_cell{}, proxy_cell{};
        if (in_guard_band(phi)) {
            flags.push_back("guard_band");
        } else {
            const SensitivityValue ep =
                phase_sensitivity_error_propagation(ctx, cal, phi);
            if (ep.diverged)
                flags.push_back("slope_divergence");
            else
                ep_cell = ep.value;
            const FisherValue fi = fisher_information(ctx, cal, phi);
            fisher_cell = fi.value;
            if (fi.dropped_mass > 1e-8)
                flags.push_back("fisher_dropped_mass=" + format_number(fi.dropped_mass));
        }
        const ProxyValue proxy = hellinger_sensitivity_proxy(ctx, cal, phi, delta);
        if (proxy.degenerate)
            flags.push_back("proxy_degenerate");
        else
            proxy_cell = proxy.value;

        rows[j] = {Cell{phi},    Cell{eta1},      Cell{mom.mean_eta},
                   Cell{mom.var_eta}, ep_cell,    proxy_cell,
                   fisher_cell,  Cell{sql},       Cell{heis},
                   Cell{join_flags(flags)}};
    });
    res.table.rows = std::move(rows);

    double min_ep = std::numeric_limits<double>::infinity();
    double min_proxy = std::numeric_limits<double>::infinity();
    for (const auto& row : res.table.rows) {
        if (const double* v = std::get_if<double>(&row[4])) min_ep = std::min(min_ep, *v);
        if (const double* v = std::get_if<double>(&row[5]))
            min_proxy = std::min(min_proxy, *v);
    }
    res.summary.emplace_back("omega_fringe", format_number(cal.omega));
    res.summary.emplace_back("eta1", format_number(eta1));
    res.summary.emplace_back("min_delta_phi_sq", format_number(min_ep));
    res.summary.emplace_back("min_proxy_delta_phi_sq", format_number(min_proxy));
    res.summary.emplace_back("validation", quick_validation(spec, basis));
    return res;
}

// Seeding times at which eta_1 reaches the requested targets, found on the
// rising branch by bisection.
std::vector<double> invert_eta1_targets(const SpectralBasis& basis,
                                        const std::vector<double>& targets) {
    const int grid = 3001;
    const double t_hi = 0.06;
    Eigen::VectorXd eta(grid);
    std::vector<double> vals(grid);
    parallel_for(grid, [&](int j) {
        vals[j] = seeded_pair_number(basis, t_hi * j / (grid - 1));
    });
    for (int j = 0; j < grid; ++j) eta[j] = vals[j];
    int peak = 0;
    for (int j = 1; j < grid; ++j)
        if (eta[j] > eta[peak]) peak = j;

    std::vector<double> times;
    for (const double target : targets) {
        if (target <= 0.0 || target > eta[peak]) continue;
        int hit = -1;
        for (int j = 1; j <= peak; ++j)
            if (eta[j] >= target) {
                hit = j;
                break;
            }
        if (hit < 0) continue;
        double lo = t_hi * (hit - 1) / (grid - 1), hi = t_hi * hit / (grid - 1);
        for (int iter = 0; iter < 60; ++iter) {
            const double mid = 0.5 * (lo + hi);
            (seeded_pair_number(basis, mid) >= target ? hi : lo) = mid;
        }
        times.push_back(0.5 * (lo + hi));
    }
    return times;
}

ExperimentResult run_eta1_sweep(const KeyValueConfig& cfg) {
    const ModelParams model = model_from(cfg);
    const double omega = cfg.number_or("omega", 1000.0);
    const double delta = cfg.number_or("delta", 1e-5);
    const bool include_free = cfg.flag_or("include_free", true);
    std::vector<double> q_primes = cfg.has("q_prime_values")
                                       ? cfg.number_list("q_prime_values")
                                       : std::vector<double>{125.0, 250.0, 500.0, 1000.0};

    BetheSpectrum spec = solve_rapidities(model);
    const SpectralBasis basis = build_spectral_basis_checked(spec);

    std::vector<double> t_values;
    if (cfg.has("t_values")) {
        t_values = cfg.number_list("t_values");
    } else {
        std::vector<double> targets =
            cfg.has("eta1_targets")
                ? cfg.number_list("eta1_targets")
                : std::vector<double>{1, 2, 3, 5, 8, 12, 17, 23, 30, 35, 40};
        t_values = invert_eta1_targets(basis, targets);
    }
    if (t_values.empty()) throw ConfigError("eta1-sweep: no seeding times to evaluate");
    std::sort(t_values.begin(), t_values.end());

    ExperimentResult res;
    append_model_metadata(res.table.metadata, model);
    res.table.metadata.emplace_back("omega", format_number(omega));
    res.table.metadata.emplace_back("delta", format_number(delta));
    {
        std::string ts, qs;
        for (size_t i = 0; i < t_values.size(); ++i)
            ts += (i ? "," : "") + format_number(t_values[i]);
        for (size_t i = 0; i < q_primes.size(); ++i)
            qs += (i ? "," : "") + format_number(q_primes[i]);
        res.table.metadata.emplace_back("t_values", ts);
        res.table.metadata.emplace_back("q_prime_values", qs);
        res.table.metadata.emplace_back("include_free", include_free ? "true" : "false");
    }
    res.table.columns = {"sequence", "q_prime",  "t",
                         "eta1",     "proxy_delta_phi_sq", "sql_ref",
                         "heisenberg_ref", "flags"};

    std::vector<double> eta1(t_values.size());
    for (size_t i = 0; i < t_values.size(); ++i)
        eta1[i] = seeded_pair_number(basis, t_values[i]);

    auto emit_row = [&](const std::string& label, Cell qp, double t, double e1,
                        const ProxyValue& proxy, std::vector<std::string> flags) {
        Cell proxy_cell{};
        if (proxy.degenerate)
            flags.push_back("proxy_degenerate");
        else
            proxy_cell = proxy.value;
        res.table.rows.push_back({Cell{label}, qp, Cell{t}, Cell{e1}, proxy_cell,
                                  Cell{1.0 / e1}, Cell{1.0 / (e1 * (e1 + 2.0))},
                                  Cell{join_flags(flags)}});
    };

    if (include_free) {
        // The free-stage outcome distribution depends on u only through
        // phi = 2*omega*u, so the calibration is exact.
        const PhaseCalibration cal{2.0 * omega};
        for (size_t i = 0; i < t_values.size(); ++i) {
            const SequenceContext ctx =
                SequenceContext::free_stage(basis, omega, 0.0, t_values[i]);
            emit_row("free", Cell{}, t_values[i], eta1[i],
                     hellinger_sensitivity_proxy(ctx, cal, 0.0, delta), {});
        }
    }

    for (const double qp : q_primes) {
        ModelParams mp = model;
        mp.q = qp;
        const SpectralBasis primed = solve_basis(mp);
        const double guess = quasifree_frequency_guess(primed);
        double last_omega = 0.0;
        for (size_t i = 0; i < t_values.size(); ++i) {
            const SequenceContext ctx =
                SequenceContext::quasifree_stage(basis, primed, t_values[i]);
            std::vector<std::string> flags;
            PhaseCalibration cal{0.0};
            try {
                cal = calibrate_sequence(ctx, guess);
                last_omega = cal.omega;
            } catch (const NoDominantPeakError&) {
                if (last_omega <= 0.0) throw;  // must calibrate at the smallest seeding
                cal.omega = last_omega;
                flags.push_back("omega_reused");
            }
            emit_row("quasifree", Cell{qp}, t_values[i], eta1[i],
                     hellinger_sensitivity_proxy(ctx, cal, 0.0, delta), flags);
        }
    }

    res.summary.emplace_back("rows", std::to_string(res.table.rows.size()));
    res.summary.emplace_back("validation", quick_validation(spec, basis));
    return res;
}

}  // namespace

// ---------------------------------------------------------------------------
// KeyValueConfig

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    KeyValueConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) +
                              " of '" + path + "' is not key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config: empty key on line " + std::to_string(lineno));
        cfg.entries_[key] = value;
    }
    return cfg;
}

double KeyValueConfig::parse_number(const std::string& text, const std::string& key) {
    const std::string s = trim(text);
    try {
        std::size_t used = 0;
        if (const auto slash = s.find('/'); slash != std::string::npos) {
            const double num = std::stod(s.substr(0, slash), &used);
            if (trim(s.substr(0, slash)).size() != used)
                throw std::invalid_argument(s);
            const double den = std::stod(s.substr(slash + 1), &used);
            if (trim(s.substr(slash + 1)).size() != used || den == 0.0)
                throw std::invalid_argument(s);
            return num / den;
        }
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: '" + key + "' is not a number: '" + s + "'");
    }
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
    entries_[trim(key)] = trim(value);
}

void KeyValueConfig::apply_override(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
        throw ConfigError("--set expects key=value, got '" + kv + "'");
    set(kv.substr(0, eq), kv.substr(eq + 1));
}

bool KeyValueConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string KeyValueConfig::str(const std::string& key, const std::string& fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double KeyValueConfig::number(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("config: missing key '" + key + "'");
    return parse_number(it->second, key);
}

double KeyValueConfig::number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
}

int KeyValueConfig::integer_or(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const double v = number(key);
    const int i = static_cast<int>(std::llround(v));
    if (std::abs(v - i) > 1e-9)
        throw ConfigError("config: '" + key + "' must be an integer");
    return i;
}

bool KeyValueConfig::flag_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = str(key, "");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: '" + key + "' must be a boolean");
}

std::vector<double> KeyValueConfig::number_list(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("config: missing key '" + key + "'");
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!trim(item).empty()) out.push_back(parse_number(item, key));
    if (out.empty()) throw ConfigError("config: '" + key + "' is an empty list");
    return out;
}

// ---------------------------------------------------------------------------
// writers

void write_csv(const Table& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    for (const auto& [k, v] : table.metadata) out << "# " << k << "=" << v << "\n";
    for (size_t c = 0; c < table.columns.size(); ++c)
        out << (c ? "," : "") << table.columns[c];
    out << "\n";
    for (const auto& row : table.rows) {
        for (size_t c = 0; c < row.size(); ++c) {
            if (c) out << ",";
            if (const double* v = std::get_if<double>(&row[c]))
                out << format_number(*v);
            else if (const std::string* s = std::get_if<std::string>(&row[c]))
                out << *s;
        }
        out << "\n";
    }
}

void write_json(const Table& table, const std::string& path) {
    nlohmann::ordered_json doc;
    nlohmann::ordered_json config;
    for (const auto& [k, v] : table.metadata) config[k] = v;
    doc["config"] = std::move(config);
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json jrow;
        for (size_t c = 0; c < row.size(); ++c) {
            if (const double* v = std::get_if<double>(&row[c]))
                jrow[table.columns[c]] = *v;
            else if (const std::string* s = std::get_if<std::string>(&row[c]))
                jrow[table.columns[c]] = *s;
            else
                jrow[table.columns[c]] = nullptr;
        }
        rows.push_back(std::move(jrow));
    }
    doc["rows"] = std::move(rows);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << doc.dump(1) << "\n";
}

// ---------------------------------------------------------------------------

ExperimentResult run_experiment(const std::string& name, const KeyValueConfig& cfg) {
    ExperimentResult res;
    if (name == "spectrum")
        res = run_spectrum(cfg);
    else if (name == "seed-sweep")
        res = run_seed_sweep(cfg);
    else if (name == "dwell-sweep")
        res = run_dwell_sweep(cfg);
    else if (name == "phase-sweep")
        res = run_phase_sweep(cfg);
    else if (name == "eta1-sweep")
        res = run_eta1_sweep(cfg);
    else
        throw ConfigError("unknown experiment '" + name + "'");

    std::vector<std::pair<std::string, std::string>> meta;
    meta.emplace_back("tool", "sccint");
    meta.emplace_back("experiment", name);
    for (auto& kv : res.table.metadata) meta.push_back(std::move(kv));
    res.table.metadata = std::move(meta);

    const std::string dir = cfg.str("output_dir", ".");
    const std::string format = cfg.str("format", "csv");
    if (format != "csv" && format != "json")
        throw ConfigError("config: format must be csv or json");
    std::filesystem::create_directories(dir);
    std::string stem = name;
    std::replace(stem.begin(), stem.end(), '-', '_');
    res.output_path = dir + "/" + stem + "." + format;
    if (format == "csv")
        write_csv(res.table, res.output_path);
    else
        write_json(res.table, res.output_path);
    return res;
}

bool ValidationReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

namespace {

void add_check(ValidationReport& report, const std::string& name, double worst,
               double tolerance, const std::string& detail = "") {
    report.checks.push_back({name, worst <= tolerance, worst, tolerance, detail});
}

}  // namespace

ValidationReport validate_model(const KeyValueConfig& cfg, int corrupt_state) {
    const ModelParams model = model_from(cfg);
    const SequenceSetup seq = sequence_from(cfg);
    const RichardsonProblem problem = RichardsonProblem::from_params(model);

    BetheSpectrum spec = solve_rapidities(model);
    if (corrupt_state >= 0 && corrupt_state < static_cast<int>(spec.states.size())) {
        BetheState& st = spec.states[corrupt_state];
        st.anchored.offset[0] += 1e-3;
        st.rapidities = st.anchored.values();
    }

    ValidationReport report;

    double worst_res = 0.0;
    for (const auto& st : spec.states)
        worst_res = std::max(
            worst_res, richardson_residual(st.anchored, problem).cwiseAbs().maxCoeff());
    add_check(report, "richardson_residual_max", worst_res, 1e-10);

    double min_dist = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < spec.states.size(); ++i)
        for (size_t j = i + 1; j < spec.states.size(); ++j)
            min_dist = std::min(
                min_dist, (spec.states[i].rapidities - spec.states[j].rapidities)
                              .cwiseAbs()
                              .maxCoeff());
    report.checks.push_back({"rapidity_set_distinctness", min_dist > 1e-6, min_dist,
                             1e-6, "minimum max-entry distance between states"});

    const Spectrum ed = exact_spectrum(build_hamiltonian(model));
    const double scale = std::max(1.0, ed.energies.cwiseAbs().maxCoeff());
    double worst_e = 0.0;
    for (size_t s = 0; s < spec.states.size(); ++s)
        worst_e = std::max(worst_e,
                           std::abs(spec.states[s].energy - ed.energies[s]) / scale);
    add_check(report, "ed_energy_match_rel", worst_e, 1e-8);

    const SpectralBasis basis = build_spectral_basis(spec);
    const int m = basis.states();
    add_check(report, "basis_orthogonality",
              (basis.c * basis.c.transpose() - Eigen::MatrixXd::Identity(m, m))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-8);
    add_check(report, "ed_row_match", max_ed_row_deviation(basis, ed), 1e-6);

    const ConservedCharges charges = build_conserved_charges(model);
    const double charge_scale = std::max(
        1.0, charges.r0.cwiseAbs().maxCoeff() * charges.r1.cwiseAbs().maxCoeff());
    add_check(report, "charge_commutator",
              (charges.r0 * charges.r1 - charges.r1 * charges.r0).cwiseAbs().maxCoeff() /
                  charge_scale,
              1e-12);
    const Eigen::MatrixXd h = build_hamiltonian(model).dense();
    const Eigen::MatrixXd rebuilt =
        (2.0 * model.lambda - model.q) * Eigen::MatrixXd::Identity(m, m) -
        4.0 * model.lambda * charges.r0 + 2.0 * (model.q - 2.0 * model.lambda) * charges.r1;
    add_check(report, "charge_h_reconstruction",
              (h - rebuilt).cwiseAbs().maxCoeff() /
                  std::max(1.0, h.cwiseAbs().maxCoeff()),
              1e-12);

    double worst_lin = 0.0, worst_quad = 0.0;
    for (int s = 0; s < m; ++s) {
        const BetheState& st = spec.states[s];
        const double lin = 2.0 * model.lambda - model.q - 4.0 * model.lambda * st.r0 +
                           2.0 * (model.q - 2.0 * model.lambda) * st.r1;
        worst_lin = std::max(worst_lin,
                             std::abs(lin - st.energy) / std::max(1.0, std::abs(st.energy)));
        const Eigen::VectorXd v = ed.vectors.col(s);
        worst_quad = std::max(worst_quad, std::abs(v.dot(charges.r0 * v) - st.r0));
        worst_quad = std::max(worst_quad, std::abs(v.dot(charges.r1 * v) - st.r1));
    }
    add_check(report, "charge_energy_linear", worst_lin, 1e-12);
    add_check(report, "charge_matrix_eigenvalue_match", worst_quad, 1e-8);

    {
        // Permutation-sum cross-check of the ladder coefficients at small n,
        // on synthetic rapidity sets and on the solved states when they fit.
        double worst_alpha = 0.0;
        auto compare = [&](const Eigen::VectorXd& raps) {
            const AlphaCoefficients fast = alpha_coefficients(raps);
            Eigen::VectorXd slow(fast.log_magnitude.size());
            {
                std::vector<int> perm(raps.size());
                for (size_t i = 0; i < perm.size(); ++i) perm[i] = int(i);
                // explicit permutation enumeration
                const int n = int(raps.size());
                for (int k = 0; k <= n; ++k) {
                    std::vector<int> p(perm);
                    double sum = 0.0;
                    do {
                        double term = 1.0;
                        for (int a = 0; a < k; ++a) term *= -1.0 / (1.0 + raps[p[a]]);
                        for (int b = k; b < n; ++b) term *= 1.0 / (1.0 - raps[p[b]]);
                        sum += term;
                    } while (std::next_permutation(p.begin(), p.end()));
                    slow[k] = sum;
                }
            }
            const double sc = slow.cwiseAbs().maxCoeff();
            for (int k = 0; k < slow.size(); ++k) {
                const double fast_v =
                    fast.sign[k] == 0 ? 0.0
                                      : fast.sign[k] * std::exp(fast.log_magnitude[k]);
                worst_alpha = std::max(worst_alpha, std::abs(fast_v - slow[k]) / sc);
            }
        };
        for (int n = 2; n <= 6; ++n) {
            Eigen::VectorXd raps(n);
            for (int i = 0; i < n; ++i)
                raps[i] = (i % 2 == 0) ? -0.8 + 0.31 * i : 1.3 + 0.47 * i;
            compare(raps);
        }
        if (model.pairs() <= 6)
            for (const auto& st : spec.states) compare(st.rapidities);
        add_check(report, "alpha_recursion_vs_bruteforce", worst_alpha, 1e-10);
    }

    // Sequence-level identities. A damaged spectrum can break these checks
    // outright (non-normalised distributions and the like); evaluation
    // errors are reported as failures rather than aborting the suite.
    try {
    SpectralBasis primed;
    SequenceContext ctx = SequenceContext::free_stage(basis, seq.omega, seq.omega0, seq.t);
    double guess = 2.0 * seq.omega;
    if (seq.quasifree) {
        ModelParams mp = model;
        mp.q = seq.q_prime;
        primed = solve_basis(mp);
        ctx = SequenceContext::quasifree_stage(basis, primed, seq.t);
        guess = quasifree_frequency_guess(primed);
    }

    {
        double worst_norm = 0.0;
        const double u_scale = 2.0 * std::numbers::pi / guess;
        for (double frac : {0.0, 0.13, 0.49, 0.77}) {
            const OutputState out = ctx.output_at(frac * u_scale);
            worst_norm = std::max(worst_norm, std::abs(out.x.squaredNorm() - 1.0));
        }
        add_check(report, "output_normalisation", worst_norm, 1e-10);

        const OutputState at_zero = ctx.output_at(0.0);
        std::complex<double> fid{0.0, 0.0};
        for (int s = 0; s < m; ++s) fid += basis.c(s, 0) * at_zero.x[s];
        add_check(report, "u0_fidelity", std::abs(std::abs(fid) - 1.0), 1e-10);
    }

    if (!seq.quasifree) {
        const double period = std::numbers::pi / seq.omega;
        double worst_per = 0.0;
        for (double u : {0.1 * period, 0.37 * period, 0.81 * period}) {
            const double a = observable_moments(ctx.output_at(u), basis).mean_eta;
            const double b =
                observable_moments(ctx.output_at(u + period), basis).mean_eta;
            worst_per = std::max(worst_per, std::abs(a - b));
        }
        add_check(report, "free_dwell_periodicity", worst_per, 1e-8);
    }

    const PhaseCalibration cal = calibrate_sequence(ctx, guess);
    const std::vector<double> phis{0.35, 0.9, 1.55, 2.6, 3.6, 4.6, 5.8};

    {
        double worst_fd = 0.0;
        const double h = 1e-8 * guess / cal.omega;  // dwell step ~1e-8 of a period scale
        for (const double phi : phis) {
            const double u = phi / cal.omega;
            const OutputState out = ctx.output_at(u);
            const OutputState plus = ctx.output_at(u + h);
            const OutputState minus = ctx.output_at(u - h);
            const Eigen::VectorXcd fd = (plus.x - minus.x) / (2.0 * h);
            worst_fd = std::max(worst_fd, (fd - out.dx_du).cwiseAbs().maxCoeff() /
                                              out.dx_du.cwiseAbs().maxCoeff());
        }
        add_check(report, "analytic_vs_fd_derivative", worst_fd, 1e-6);
    }

    {
        double worst_cr = 0.0;  // violation of (dphi)^2 * F >= 1
        double worst_hf = 0.0;
        for (const double phi : phis) {
            const SensitivityValue ep =
                phase_sensitivity_error_propagation(ctx, cal, phi);
            const FisherValue fi = fisher_information(ctx, cal, phi);
            if (!ep.diverged && fi.value > 0.0)
                worst_cr = std::max(worst_cr, 1.0 - ep.value * fi.value);

            const double delta = 1e-5;
            const Eigen::VectorXd p =
                fock_probabilities(ctx.output_at(phi / cal.omega), basis);
            const Eigen::VectorXd q =
                fock_probabilities(ctx.output_at((phi + delta) / cal.omega), basis);
            const double dh2 = hellinger_distance(p, q);
            worst_hf = std::max(
                worst_hf, std::abs(8.0 * dh2 / (delta * delta) - fi.value) / fi.value);
        }
        add_check(report, "cramer_rao_violation", worst_cr, 1e-9);
        add_check(report, "hellinger_fisher_rel_dev", worst_hf, 1e-2);
    }
    } catch (const Error& e) {
        report.checks.push_back({"sequence_property_evaluation", false,
                                 std::numeric_limits<double>::quiet_NaN(), 0.0,
                                 e.what()});
    }

    return report;
}

}  // namespace scc
