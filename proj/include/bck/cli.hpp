#pragma once

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bck/csv.hpp"
#include "bck/invariants.hpp"
#include "bck/ode/systems.hpp"
#include "bck/propagator.hpp"
#include "bck/quantum.hpp"
#include "bck/scenario_io.hpp"

namespace bck::cli {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int tolerance = 1;
inline constexpr int invalid_input = 2;
inline constexpr int solver = 3;
inline constexpr int grid_too_narrow = 4;
}  // namespace exit_code

struct CommandOutcome {
    int exit_code = exit_code::ok;
    std::vector<std::string> summary;
    std::vector<std::filesystem::path> files;
};

struct CommonOptions {
    std::filesystem::path scenario;
    std::filesystem::path out = ".";
    std::optional<double> rtol;
    std::optional<double> atol;
    std::size_t samples = 512;
    double tolerance = 1e-6;
    bool quiet = false;
};

inline int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::StepSizeUnderflow:
        case ErrorKind::SolverBreakdown:
        case ErrorKind::DegenerateSolutions:
        case ErrorKind::GammaVanishes:
        case ErrorKind::OmegaNotPositive: return exit_code::solver;
        case ErrorKind::GridTooNarrow: return exit_code::grid_too_narrow;
        default: return exit_code::invalid_input;
    }
}

/// Runs `body`, turning library errors into exit codes.
template <class Body>
CommandOutcome guarded(Body&& body) {
    try {
        return body();
    } catch (const Error& e) {
        return {exit_code_for(e.kind()), {std::string("error: ") + e.what()}, {}};
    } catch (const std::filesystem::filesystem_error& e) {
        return {exit_code::invalid_input, {std::string("error: ") + e.what()}, {}};
    }
}

inline Scenario load(const CommonOptions& opt) {
    Scenario s = load_scenario(opt.scenario);
    if (opt.rtol) s.integrator.rtol = *opt.rtol;
    if (opt.atol) s.integrator.atol = *opt.atol;
    s.validate();
    if (opt.samples < 2) throw Error(ErrorKind::ValidationError, "--samples must be >= 2");
    return s;
}

inline std::filesystem::path output_file(const CommonOptions& opt, const std::string& name) {
    std::filesystem::create_directories(opt.out);
    return opt.out / name;
}

inline std::ofstream open_output(const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorKind::ValidationError, "cannot write '" + p.string() + "'");
    return f;
}

inline std::string kv(const std::string& key, double v) { return key + "=" + format_number(v); }

/// Everything `verify` measures for one scenario; `sweep` rows are built from the same struct.
struct RunSummary {
    VerificationReport report;
    CReductionReport c_reduction;
    double omega = 0.0;
    double uncertainty_t1 = 0.0;  // n = 0 product at t1
    bool force_anchor_nonzero = false;  // β(t0)F(t0) ≠ 0

    bool passes(double tol) const {
        return report.max_drift_I < tol && report.max_drift_IQ < tol && report.omega_drift < tol &&
               report.max_drift_C < tol && report.max_ermakov_residual < tol;
    }
};

inline RunSummary summarize(const Scenario& s, double q0, double p0, std::size_t samples) {
    RunSummary out;
    const BetaSolution beta = integrate_beta(s);
    const auto gi = gamma_initial_from_beta(s);
    const auto si = sigma_initial_from_beta(s);
    const auto gamma = integrate_gamma(s, gi[0], gi[1], gi[2]);
    const auto sigma = integrate_sigma(s, gamma, si[0], si[1]);
    const auto traj = integrate_classical(s, q0, p0);
    out.report = build_verification_report(s, beta, gamma, sigma, traj, samples);
    const auto c0 = c_from_reduction(s, s.t0, gi[0], gi[1], gi[2], si[0], si[1]);
    out.c_reduction = verify_c_reduction(s, integrate_c_system(s, c0), gamma, sigma, samples);
    const auto omega = compute_omega(s, beta, samples);
    out.omega = omega.mean;
    out.uncertainty_t1 = uncertainty_product(0, make_frame(s, beta, s.t1)).product;
    out.force_anchor_nonzero = s.resolved_beta0().beta * s.F(s.t0) != Complex{};
    return out;
}

inline CommandOutcome cmd_verify(const CommonOptions& opt, double q0 = 1.0, double p0 = 0.0) {
    return guarded([&] {
        const Scenario s = load(opt);
        const RunSummary r = summarize(s, q0, p0, opt.samples);
        CommandOutcome out;
        const auto path = output_file(opt, "invariants_report.csv");
        {
            auto f = open_output(path);
            write_verification_csv(f, r.report);
        }
        out.files.push_back(path);
        out.summary = {
            kv("max_drift_I", r.report.max_drift_I),
            kv("max_drift_IQ", r.report.max_drift_IQ),
            kv("omega_drift", r.report.omega_drift),
            kv("omega", r.omega),
            kv("max_drift_C", r.report.max_drift_C),
            kv("max_ermakov_residual", r.report.max_ermakov_residual),
            kv("max_sigma_deviation", r.report.max_sigma_deviation),
            kv("max_c_reduction_deviation", r.c_reduction.worst),
            kv("uncertainty_product_t1", r.uncertainty_t1),
        };
        if (r.force_anchor_nonzero) out.summary.push_back("note: beta(t0)*F(t0) != 0; F-functional anchored at 0 anyway");
        const bool ok = r.passes(opt.tolerance);
        out.summary.push_back(ok ? "status=pass" : "status=fail tolerance=" + format_number(opt.tolerance));
        out.exit_code = ok ? exit_code::ok : exit_code::tolerance;
        return out;
    });
}

inline CommandOutcome cmd_spectrum(const CommonOptions& opt, int nmax) {
    return guarded([&] {
        if (nmax < 0) throw Error(ErrorKind::ValidationError, "--nmax must be >= 0");
        const Scenario s = load(opt);
        const auto omega = compute_omega(s, integrate_beta(s), opt.samples);
        if (!(omega.mean > 0.0) || !omega.positive) {
            throw Error(ErrorKind::OmegaNotPositive, "Ω = " + format_number(omega.mean));
        }
        CommandOutcome out;
        const auto path = output_file(opt, "spectrum.csv");
        {
            auto f = open_output(path);
            write_spectrum_csv(f, spectrum(omega.mean, nmax));
        }
        out.files.push_back(path);
        out.summary = {kv("omega", omega.mean), kv("omega_drift", omega.max_relative_drift),
                       kv("max_imag_residue", omega.max_imag_residue)};
        const bool ok = omega.max_relative_drift < opt.tolerance;
        out.summary.push_back(ok ? "status=pass" : "status=fail tolerance=" + format_number(opt.tolerance));
        out.exit_code = ok ? exit_code::ok : exit_code::tolerance;
        return out;
    });
}

inline CommandOutcome cmd_wavefunction(const CommonOptions& opt, int n, double t, Phase phase = Phase::Schrodinger) {
    return guarded([&] {
        const Scenario s = load(opt);
        const BetaSolution beta = integrate_beta(s);
        const InvariantFrame f = make_frame(s, beta, t);
        const WaveFunction w = eval_psin(n, s, f, phase);
        const auto e = expectation_qp(f);
        const auto u = uncertainty_product(n, f);
        CommandOutcome out;
        const auto path = output_file(opt, "wavefunction.csv");
        {
            auto file = open_output(path);
            write_wavefunction_csv(file, w);
            file << "# " << kv("mean_q", e.q) << ", " << kv("mean_p", e.p) << ", " << kv("var_q", u.dq2) << ", "
                 << kv("var_p", u.dp2) << ", " << kv("product", u.product) << '\n';
        }
        out.files.push_back(path);
        out.summary = {kv("norm", w.norm), kv("mean_q", e.q), kv("mean_p", e.p), kv("var_q", u.dq2),
                       kv("var_p", u.dp2), kv("product", u.product)};
        const bool ok = std::abs(w.norm - 1.0) < opt.tolerance;
        out.summary.push_back(ok ? "status=pass" : "status=fail tolerance=" + format_number(opt.tolerance));
        out.exit_code = ok ? exit_code::ok : exit_code::tolerance;
        return out;
    });
}

inline CommandOutcome cmd_propagate(const CommonOptions& opt, int n, double periods, double dt,
                                    double min_overlap = 1.0 - 1e-3) {
    return guarded([&] {
        if (!(periods > 0.0)) throw Error(ErrorKind::ValidationError, "--periods must be > 0");
        Scenario s = load(opt);
        const double T = characteristic_period(s, s.t0);
        s.t1 = s.t0 + periods * T;
        s.validate();
        const BetaSolution beta = integrate_beta(s);
        PropagationOptions popt;
        popt.record_every = std::max<std::size_t>(1, static_cast<std::size_t>(periods * T / dt / 1000.0));
        const PropagationRun run = propagate_and_compare(s, beta, n, s.t0, s.t1, dt, popt);
        CommandOutcome out;
        const auto path = output_file(opt, "propagation.csv");
        {
            auto f = open_output(path);
            write_propagation_csv(f, run);
        }
        out.files.push_back(path);
        out.summary = {kv("period", T), kv("dt", run.dt), kv("min_overlap", run.min_overlap),
                       kv("max_fidelity_defect", 1.0 - run.min_overlap),
                       kv("total_norm_drift", run.total_norm_drift)};
        if (!run.dt_within_guideline) out.summary.push_back("note: dt exceeds 1e-2 of the oscillation period");
        const bool ok = run.min_overlap > min_overlap;
        out.summary.push_back(ok ? "status=pass" : "status=fail min_overlap_required=" + format_number(min_overlap));
        out.exit_code = ok ? exit_code::ok : exit_code::tolerance;
        return out;
    });
}

/// Copy of `s` with one parameter replaced.
inline Scenario with_parameter(Scenario s, const std::string& name, double v) {
    auto fail = [&](const std::string& why) {
        throw Error(ErrorKind::ValidationError, "cannot sweep '" + name + "': " + why);
    };
    if (name == "g") {
        if (!s.damping.is<Constant>()) fail("damping is not constant");
        s.damping = Constant{v};
    } else if (name == "omega") {
        if (!s.omega.is<Constant>()) fail("omega is not constant");
        s.omega = Constant{v};
    } else if (name == "F0" || name == "alpha") {
        const auto* sn = std::get_if<Sinusoid>(&s.force.variant());
        if (!sn) fail("force is not sinusoidal");
        Sinusoid next = *sn;
        (name == "F0" ? next.amplitude : next.frequency) = v;
        s.force = next;
    } else {
        fail("unknown parameter (expected g, omega, F0 or alpha)");
    }
    s.validate();
    return s;
}

struct SweepRow {
    double value = 0.0;
    std::optional<RunSummary> summary;
    std::string failure;
};

inline CommandOutcome cmd_sweep(const CommonOptions& opt, const std::string& parameter, double lo, double hi,
                                int steps, double q0 = 1.0, double p0 = 0.0) {
    return guarded([&] {
        if (steps < 1) throw Error(ErrorKind::ValidationError, "--steps must be >= 1");
        const Scenario base = load(opt);
        const int count = lo == hi ? 1 : steps;
        std::vector<double> values(static_cast<std::size_t>(count));
        for (int k = 0; k < count; ++k) {
            values[static_cast<std::size_t>(k)] = count == 1 ? lo : lo + (hi - lo) * k / (count - 1.0);
        }
        with_parameter(base, parameter, lo);  // reject inapplicable parameters up front

        std::vector<std::future<SweepRow>> jobs;
        for (double v : values) {
            jobs.push_back(std::async(std::launch::async, [&base, &parameter, v, q0, p0, &opt] {
                SweepRow row;
                row.value = v;
                try {
                    row.summary = summarize(with_parameter(base, parameter, v), q0, p0, opt.samples);
                } catch (const Error& e) {
                    row.failure = std::string(to_string(e.kind()));
                }
                return row;
            }));
        }
        CommandOutcome out;
        const auto path = output_file(opt, "sweep.csv");
        bool ok = true;
        {
            auto f = open_output(path);
            f << parameter << ",status,Omega,IQ_drift,uncertainty_t1\n";
            for (auto& job : jobs) {
                const SweepRow row = job.get();
                f << format_number(row.value) << ',';
                if (!row.summary) {
                    ok = false;
                    f << "failed:" << row.failure << ",,,\n";
                    continue;
                }
                const bool pass = row.summary->passes(opt.tolerance);
                ok = ok && pass;
                f << (pass ? "ok" : "tolerance") << ',' << format_number(row.summary->omega) << ','
                  << format_number(row.summary->report.max_drift_IQ) << ','
                  << format_number(row.summary->uncertainty_t1) << '\n';
            }
        }
        out.files.push_back(path);
        out.summary = {"rows=" + std::to_string(values.size()), ok ? "status=pass" : "status=fail"};
        out.exit_code = ok ? exit_code::ok : exit_code::tolerance;
        return out;
    });
}

/// Full command-line entry point.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Invariants, eigenfunctions and propagation for the damped, driven harmonic oscillator"};
    app.require_subcommand(1);

    CommonOptions common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--scenario", common.scenario, "scenario file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", common.out, "output directory")->capture_default_str();
        sub->add_option("--rtol", common.rtol, "override integrator rtol");
        sub->add_option("--atol", common.atol, "override integrator atol");
        sub->add_option("--samples", common.samples, "uniform samples for drift reports")->capture_default_str();
        sub->add_option("--tolerance", common.tolerance, "pass/fail threshold")->capture_default_str();
        sub->add_flag("--quiet", common.quiet, "suppress the summary");
    };

    double q0 = 1.0, p0 = 0.0;
    auto* verify = app.add_subcommand("verify", "check I, I†, Ω, I_Q, C and the Ermakov residual along a trajectory");
    add_common(verify);
    verify->add_option("--q0", q0, "initial q")->capture_default_str();
    verify->add_option("--p0", p0, "initial p")->capture_default_str();

    int nmax = 4;
    auto* spec = app.add_subcommand("spectrum", "eigenvalues Ω(n + ½) of I_Q");
    add_common(spec);
    spec->add_option("--nmax", nmax, "largest n")->capture_default_str();

    int n = 0;
    double t = 0.0;
    std::string phase_name = "schrodinger";
    auto* wave = app.add_subcommand("wavefunction", "ψ_n on the scenario grid at time t");
    add_common(wave);
    wave->add_option("-n,--n", n, "quantum number")->capture_default_str();
    wave->add_option("-t,--time", t, "time")->capture_default_str();
    wave->add_option("--phase", phase_name, "global phase convention")
        ->check(CLI::IsMember({"schrodinger", "eigenfunction"}))
        ->capture_default_str();

    double periods = 1.0, dt = 1e-3, min_overlap = 1.0 - 1e-3;
    auto* prop = app.add_subcommand("propagate", "Crank-Nicolson propagation of ψ_n against the analytic ψ_n");
    add_common(prop);
    prop->add_option("-n,--n", n, "quantum number")->capture_default_str();
    prop->add_option("--periods", periods, "number of periods 2π/√(ω²−g²)")->capture_default_str();
    prop->add_option("--dt", dt, "time step")->capture_default_str();
    prop->add_option("--min-overlap", min_overlap, "pass threshold on the overlap")->capture_default_str();

    std::string parameter;
    double lo = 0.0, hi = 0.0;
    int steps = 1;
    auto* sweep = app.add_subcommand("sweep", "parameter study over g, omega, F0 or alpha");
    add_common(sweep);
    sweep->add_option("--parameter", parameter, "g | omega | F0 | alpha")->required();
    sweep->add_option("--from", lo, "first value")->required();
    sweep->add_option("--to", hi, "last value")->required();
    sweep->add_option("--steps", steps, "number of values")->capture_default_str();
    sweep->add_option("--q0", q0, "initial q")->capture_default_str();
    sweep->add_option("--p0", p0, "initial p")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return exit_code::invalid_input;
    }

    CommandOutcome outcome;
    if (*verify) outcome = cmd_verify(common, q0, p0);
    else if (*spec) outcome = cmd_spectrum(common, nmax);
    else if (*wave) outcome = cmd_wavefunction(common, n, t, phase_name == "eigenfunction" ? Phase::Eigenfunction : Phase::Schrodinger);
    else if (*prop) outcome = cmd_propagate(common, n, periods, dt, min_overlap);
    else outcome = cmd_sweep(common, parameter, lo, hi, steps, q0, p0);

    auto& sink = outcome.exit_code == exit_code::ok ? out : err;
    if (!common.quiet || outcome.exit_code != exit_code::ok) {
        for (const auto& line : outcome.summary) sink << line << '\n';
        for (const auto& f : outcome.files) sink << "wrote " << f.string() << '\n';
    }
    return outcome.exit_code;
}

}  // namespace bck::cli
