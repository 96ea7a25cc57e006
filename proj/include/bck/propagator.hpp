#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <vector>

#include "bck/csv.hpp"
#include "bck/invariants.hpp"
#include "bck/ode/systems.hpp"
#include "bck/quantum.hpp"
#include "bck/scenario.hpp"

namespace bck {

/// Symmetric real tridiagonal operator with a constant off-diagonal.
struct Tridiagonal {
    std::vector<double> diag;
    double off = 0.0;

    std::size_t size() const { return diag.size(); }

    std::vector<Complex> apply(const std::vector<Complex>& x) const {
        const std::size_t n = diag.size();
        std::vector<Complex> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            Complex v = diag[i] * x[i];
            if (i > 0) v += off * x[i - 1];
            if (i + 1 < n) v += off * x[i + 1];
            y[i] = v;
        }
        return y;
    }
};

/// H(t) on the scenario grid: −(ħ²e^{-G}/2m) second difference (Dirichlet) plus
/// V = ½mω²e^G q² − e^G F q on the diagonal.
inline Tridiagonal build_hamiltonian(const Scenario& s, double t) {
    const double h = s.grid.spacing();
    const double eG = s.eG(t), w2 = s.omega2(t), F = s.F(t);
    const double kinetic = s.hbar * s.hbar / (eG * s.m * h * h);
    Tridiagonal H;
    H.off = -0.5 * kinetic;
    H.diag.resize(static_cast<std::size_t>(s.grid.npoints));
    for (int i = 0; i < s.grid.npoints; ++i) {
        const double q = s.grid.point(i);
        H.diag[static_cast<std::size_t>(i)] = kinetic + 0.5 * s.m * w2 * eG * q * q - eG * F * q;
    }
    return H;
}

/// Solves (1 + i dt H(t + dt/2)/2ħ) ψ' = (1 − i dt H(t + dt/2)/2ħ) ψ by the Thomas algorithm.
inline WaveFunction crank_nicolson_step(const WaveFunction& psi, const Scenario& s, double t, double dt) {
    if (!(dt > 0.0)) throw Error(ErrorKind::ValidationError, "dt must be > 0");
    if (psi.size() != static_cast<std::size_t>(s.grid.npoints)) {
        throw Error(ErrorKind::ValidationError, "wavefunction is not on the scenario grid");
    }
    const Tridiagonal H = build_hamiltonian(s, t + 0.5 * dt);
    const Complex z(0.0, 0.5 * dt / s.hbar);
    const std::size_t n = H.size();

    std::vector<Complex> rhs = H.apply(psi.psi);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = psi.psi[i] - z * rhs[i];

    const Complex off = z * H.off;
    std::vector<Complex> c(n);
    Complex denom = 1.0 + z * H.diag[0];
    if (std::abs(denom) < 1e-300) throw Error(ErrorKind::SolverBreakdown, "zero pivot in Crank-Nicolson solve");
    c[0] = off / denom;
    rhs[0] /= denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = 1.0 + z * H.diag[i] - off * c[i - 1];
        if (std::abs(denom) < 1e-300) throw Error(ErrorKind::SolverBreakdown, "zero pivot in Crank-Nicolson solve");
        c[i] = off / denom;
        rhs[i] = (rhs[i] - off * rhs[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];

    WaveFunction out = psi;
    out.psi = std::move(rhs);
    out.t = t + dt;
    out.refresh_norm();
    return out;
}

/// What the propagated state is compared against.
enum class Reference {
    Analytic,
    /// ψ*, a deliberately wrong reference.
    Conjugated,
};

struct PropagationRun {
    WaveFunction initial;
    WaveFunction final;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<double> norms;
    std::vector<double> overlaps;
    double min_overlap = 1.0;
    double max_step_norm_drift = 0.0;  // max |‖ψ_{k+1}‖ − ‖ψ_k‖| over all steps
    double total_norm_drift = 0.0;
    bool dt_within_guideline = true;  // dt ≤ 1e−2 · 2π/ω̄ at t0
    double characteristic_period = 0.0;
};

/// 2π/√(ω² − g²) at t.
inline double characteristic_period(const Scenario& s, double t) {
    const double disc = s.omega2(t) - s.g(t) * s.g(t);
    if (!(disc > 0.0)) {
        throw Error(ErrorKind::ValidationError, "no oscillation period: ω² ≤ g² at t=" + format_number(t));
    }
    return 2.0 * std::numbers::pi / std::sqrt(disc);
}

struct PropagationOptions {
    Reference reference = Reference::Analytic;
    /// Overlap is recorded every `record_every` steps (and always at the end).
    std::size_t record_every = 1;
};

inline double fidelity(const WaveFunction& a, const WaveFunction& b) {
    return std::abs(inner_product(a, b)) / (a.norm * b.norm);
}

/// Propagates the analytic ψ_n(t_begin) with Crank-Nicolson to t_end and records the
/// overlap with the analytic ψ_n at each recorded slice. dt is shrunk to divide the window.
inline PropagationRun propagate_and_compare(const Scenario& s, const BetaSolution& beta, int n, double t_begin,
                                           double t_end, double dt, PropagationOptions opt = {}) {
    if (!(t_end > t_begin)) throw Error(ErrorKind::ValidationError, "propagation window must have t1 > t0");
    if (!(dt > 0.0)) throw Error(ErrorKind::ValidationError, "dt must be > 0");
    const auto steps = static_cast<std::size_t>(std::ceil((t_end - t_begin) / dt - 1e-9));
    const double h = (t_end - t_begin) / static_cast<double>(steps);

    auto reference = [&](double t) {
        WaveFunction w = eval_psin(n, s.grid, make_frame(s, beta, t));
        if (opt.reference == Reference::Conjugated) {
            for (auto& x : w.psi) x = std::conj(x);
        }
        return w;
    };

    PropagationRun run;
    run.dt = h;
    run.characteristic_period = characteristic_period(s, s.t0);
    run.dt_within_guideline = h <= 1e-2 * run.characteristic_period;
    run.initial = eval_psin(n, s.grid, make_frame(s, beta, t_begin));
    WaveFunction psi = run.initial;

    auto record = [&](const WaveFunction& w) {
        const double ov = fidelity(reference(w.t), w);
        run.times.push_back(w.t);
        run.norms.push_back(w.norm);
        run.overlaps.push_back(ov);
        run.min_overlap = std::min(run.min_overlap, ov);
    };
    record(psi);
    const std::size_t every = std::max<std::size_t>(1, opt.record_every);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = t_begin + static_cast<double>(k) * h;
        WaveFunction next = crank_nicolson_step(psi, s, t, h);
        if (k + 1 == steps) next.t = t_end;
        run.max_step_norm_drift = std::max(run.max_step_norm_drift, std::abs(next.norm - psi.norm));
        psi = std::move(next);
        if ((k + 1) % every == 0 || k + 1 == steps) record(psi);
    }
    run.total_norm_drift = std::abs(psi.norm - run.initial.norm);
    run.final = std::move(psi);
    return run;
}

/// Evolves `psi` with fixed-step Crank-Nicolson from psi.t to t_end.
inline WaveFunction propagate(WaveFunction psi, const Scenario& s, double t_end, std::size_t steps) {
    const double t_begin = psi.t;
    const double h = (t_end - t_begin) / static_cast<double>(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        psi = crank_nicolson_step(psi, s, t_begin + static_cast<double>(k) * h, h);
    }
    psi.t = t_end;
    return psi;
}

inline void write_propagation_csv(std::ostream& out, const PropagationRun& run) {
    out << "t,norm,overlap,fidelity_defect\n";
    for (std::size_t k = 0; k < run.times.size(); ++k) {
        const std::array<double, 4> row{run.times[k], run.norms[k], run.overlaps[k], 1.0 - run.overlaps[k]};
        write_csv_row(out, row);
    }
}

}  // namespace bck
