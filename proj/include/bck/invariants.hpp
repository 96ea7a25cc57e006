#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <ostream>
#include <vector>

#include "bck/csv.hpp"
#include "bck/ode/systems.hpp"
#include "bck/scenario.hpp"

namespace bck {

/// Every time-dependent coefficient of the linear and quadratic invariants at one instant.
struct InvariantFrame {
    double t = 0.0;
    Complex beta;
    Complex beta_dot;
    Complex force;  // 𝓕(β, t)
    double gamma = 0.0;
    double gamma_dot = 0.0;
    double gamma_ddot = 0.0;
    double sigma = 0.0;
    double sigma_dot = 0.0;
    double force_sigma = 0.0;  // 𝓕(σ, t)
    double G = 0.0;
    double eG = 1.0;
    double m = 1.0;
    double hbar = 1.0;
    // scenario coefficients at t
    double g = 0.0;
    double omega2 = 0.0;
    double F = 0.0;
    // continuous arg β and Θ = ∫ e^{-G}𝓕²/β², used for wavefunction phases
    double phase = 0.0;
    Complex phase_integral;
    bool beta_derived = true;
};

namespace detail {
inline InvariantFrame frame_skeleton(const Scenario& s, double t) {
    InvariantFrame f;
    f.t = t;
    f.G = s.G(t);
    f.eG = std::exp(f.G);
    f.m = s.m;
    f.hbar = s.hbar;
    f.g = s.g(t);
    f.omega2 = s.omega2(t);
    f.F = s.F(t);
    return f;
}
}  // namespace detail

/// Fills the γ/σ group from β itself: γ = 2β*β, σ = −β*𝓕 − 𝓕*β, 𝓕(σ,t) = −𝓕*𝓕.
inline void derive_gamma_sigma_from_beta(InvariantFrame& f) {
    const Complex bdd = -2.0 * f.g * f.beta_dot - f.omega2 * f.beta;
    f.gamma = 2.0 * std::norm(f.beta);
    f.gamma_dot = 4.0 * (std::conj(f.beta) * f.beta_dot).real();
    f.gamma_ddot = 4.0 * ((std::conj(f.beta) * bdd).real() + std::norm(f.beta_dot));
    f.sigma = -2.0 * (std::conj(f.beta) * f.force).real();
    f.sigma_dot = -2.0 * (std::conj(f.beta_dot) * f.force).real() - f.gamma * f.eG * f.F;
    f.force_sigma = -std::norm(f.force);
    f.beta_derived = true;
}

inline InvariantFrame make_frame(const Scenario& s, const BetaSolution& beta, double t) {
    InvariantFrame f = detail::frame_skeleton(s, t);
    f.beta = beta.beta(t);
    f.beta_dot = beta.beta_dot(t);
    f.force = beta.force_functional(t);
    f.phase = beta.phase(t);
    f.phase_integral = beta.phase_integral(t);
    derive_gamma_sigma_from_beta(f);
    return f;
}

/// β group from `beta`, γ group from integrate_gamma, σ group from integrate_sigma.
inline InvariantFrame make_frame(const Scenario& s, const BetaSolution& beta, const DenseSolution<3>& gamma,
                                 const DenseSolution<3>& sigma, double t) {
    InvariantFrame f = make_frame(s, beta, t);
    const auto gm = gamma.value(t);
    const auto sg = sigma.value(t);
    f.gamma = gm[0];
    f.gamma_dot = gm[1];
    f.gamma_ddot = gm[2];
    f.sigma = sg[0];
    f.sigma_dot = sg[1];
    f.force_sigma = sg[2];
    f.beta_derived = false;
    return f;
}

/// I = βp − m e^G β̇ q − 𝓕
inline Complex eval_linear_invariant(const InvariantFrame& f, double q, double p) {
    return f.beta * p - f.m * f.eG * f.beta_dot * q - f.force;
}

/// I† = β*p − m e^G β̇* q − 𝓕*
inline Complex eval_conjugate_invariant(const InvariantFrame& f, double q, double p) {
    return std::conj(f.beta) * p - f.m * f.eG * std::conj(f.beta_dot) * q - std::conj(f.force);
}

/// W = β̇*β − β*β̇
inline Complex wronskian(const InvariantFrame& f) {
    return std::conj(f.beta_dot) * f.beta - std::conj(f.beta) * f.beta_dot;
}

/// Ω = i m ħ e^G W (complex; real for genuine solutions).
inline Complex omega_complex(const InvariantFrame& f) { return Complex(0.0, 1.0) * f.m * f.hbar * f.eG * wronskian(f); }

inline double omega_value(const InvariantFrame& f) { return omega_complex(f).real(); }

/// Coefficients (c1..c5) of the quadratic invariant built from the frame's γ/σ group.
inline CCoefficients quadratic_coefficients(const InvariantFrame& f) {
    const double m = f.m, eG = f.eG;
    return {m * m * eG * eG * (0.5 * f.gamma_ddot + f.g * f.gamma_dot + f.omega2 * f.gamma), -0.5 * m * eG * f.gamma_dot,
            f.gamma, -m * eG * (f.sigma_dot + f.gamma * eG * f.F), f.sigma};
}

/// I_Q(q, p, t) with {q, p} realised classically as 2qp.
inline double eval_quadratic_invariant(const InvariantFrame& f, double q, double p) {
    const auto c = quadratic_coefficients(f);
    return 0.5 * c[0] * q * q + c[1] * q * p + 0.5 * c[2] * p * p + c[3] * q + c[4] * p - f.force_sigma;
}

inline void require_gamma_positive(const InvariantFrame& f) {
    if (!(f.gamma > 1e-12)) {
        throw Error(ErrorKind::GammaVanishes, "γ = " + format_number(f.gamma) + " at t=" + format_number(f.t));
    }
}

/// Conserved first integral of the γ equation:
///   C = e^{2G} γ [γ̈ + 2gγ̇ + 2ω²γ − γ̇²/(2γ)]
inline double first_integral_C(const InvariantFrame& f) {
    require_gamma_positive(f);
    const double bracket =
        f.gamma_ddot + 2.0 * f.g * f.gamma_dot + 2.0 * f.omega2 * f.gamma - f.gamma_dot * f.gamma_dot / (2.0 * f.gamma);
    return f.eG * f.eG * f.gamma * bracket;
}

/// r̈ + 2gṙ + ω²r − e^{-2G}C/(2r³) with r = √γ.
inline double ermakov_residual(const InvariantFrame& f, double C) {
    require_gamma_positive(f);
    const double r = std::sqrt(f.gamma);
    const double r_dot = f.gamma_dot / (2.0 * r);
    const double r_ddot = f.gamma_ddot / (2.0 * r) - f.gamma_dot * f.gamma_dot / (4.0 * r * r * r);
    return r_ddot + 2.0 * f.g * r_dot + f.omega2 * r - C / (f.eG * f.eG * 2.0 * r * r * r);
}

inline std::vector<double> uniform_samples(double t0, double t1, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = n == 1 ? t0 : t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(n - 1);
    }
    if (n > 1) out.back() = t1;
    return out;
}

inline double drift_scale(double reference) { return std::abs(reference) > 1e-12 ? std::abs(reference) : 1.0; }

struct OmegaReport {
    std::vector<double> times;
    std::vector<double> omega;    // Re Ω(t_k)
    std::vector<Complex> wronskian;
    double max_imag_residue = 0.0;  // max |Im Ω| / |Ω|
    double mean = 0.0;
    double max_relative_drift = 0.0;  // max |Ω_k − mean| / |mean|
    bool positive = true;
};

inline OmegaReport compute_omega(const Scenario& s, const BetaSolution& beta, std::size_t samples = 512) {
    OmegaReport rep;
    rep.times = uniform_samples(s.t0, s.t1, samples);
    for (double t : rep.times) {
        InvariantFrame f = detail::frame_skeleton(s, t);
        f.beta = beta.beta(t);
        f.beta_dot = beta.beta_dot(t);
        const Complex W = wronskian(f);
        if (std::abs(W) < 1e-12 * std::abs(f.beta) * std::abs(f.beta_dot)) {
            throw Error(ErrorKind::DegenerateSolutions,
                        "β and β* are not independent (W ≈ 0) at t=" + format_number(t));
        }
        const Complex om = omega_complex(f);
        rep.wronskian.push_back(W);
        rep.omega.push_back(om.real());
        rep.max_imag_residue = std::max(rep.max_imag_residue, std::abs(om.imag()) / std::abs(om));
        rep.positive = rep.positive && om.real() > 0.0;
        rep.mean += om.real();
    }
    rep.mean /= static_cast<double>(rep.omega.size());
    for (double v : rep.omega) {
        rep.max_relative_drift = std::max(rep.max_relative_drift, std::abs(v - rep.mean) / std::abs(rep.mean));
    }
    return rep;
}

struct CReductionReport {
    // max over samples of |c_i − reduction_i| / max(1, |reduction_i|)
    std::array<double, 5> max_deviation{};
    double worst = 0.0;
    bool flagged = false;
};

/// Compares an integrated c-system against the (γ, σ) reduction formulas.
inline CReductionReport verify_c_reduction(const Scenario& s, const DenseSolution<5>& c, const DenseSolution<3>& gamma,
                                           const DenseSolution<3>& sigma, std::size_t samples = 512,
                                           double tolerance = 1e-8) {
    CReductionReport rep;
    for (double t : uniform_samples(s.t0, s.t1, samples)) {
        const auto ci = c.value(t);
        const auto gm = gamma.value(t);
        const auto sg = sigma.value(t);
        const auto ref = c_from_reduction(s, t, gm[0], gm[1], gm[2], sg[0], sg[1]);
        for (std::size_t i = 0; i < 5; ++i) {
            const double dev = std::abs(ci[i] - ref[i]) / std::max(1.0, std::abs(ref[i]));
            rep.max_deviation[i] = std::max(rep.max_deviation[i], dev);
        }
    }
    rep.worst = *std::max_element(rep.max_deviation.begin(), rep.max_deviation.end());
    rep.flagged = !(rep.worst < tolerance);
    return rep;
}

struct VerificationRow {
    double t = 0.0;
    Complex I;
    double IQ = 0.0;
    double omega = 0.0;
    double C = 0.0;
    double ermakov = 0.0;
};

struct VerificationReport {
    std::vector<VerificationRow> rows;
    double max_drift_I = 0.0;
    double max_drift_IQ = 0.0;
    double omega_drift = 0.0;
    double max_drift_C = 0.0;
    double max_ermakov_residual = 0.0;
    // integrated σ against σ = −β*𝓕 − 𝓕*β, scaled by max(1, |σ|)
    double max_sigma_deviation = 0.0;
};

/// Samples I and I_Q along `traj` from β frames, C and the Ermakov residual from the
/// independently integrated γ, and cross-checks the integrated σ.
inline VerificationReport build_verification_report(const Scenario& s, const BetaSolution& beta,
                                                    const DenseSolution<3>& gamma, const DenseSolution<3>& sigma,
                                                    const Trajectory& traj, std::size_t samples = 512) {
    VerificationReport rep;
    const auto omega = compute_omega(s, beta, samples);
    rep.omega_drift = omega.max_relative_drift;
    const auto times = uniform_samples(s.t0, s.t1, samples);
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double t = times[k];
        const auto fb = make_frame(s, beta, t);
        const auto fg = make_frame(s, beta, gamma, sigma, t);
        const auto qp = traj.value(t);
        VerificationRow row;
        row.t = t;
        row.I = eval_linear_invariant(fb, qp[0], qp[1]);
        row.IQ = eval_quadratic_invariant(fb, qp[0], qp[1]);
        row.omega = omega.omega[k];
        row.C = first_integral_C(fg);
        rep.max_sigma_deviation =
            std::max(rep.max_sigma_deviation, std::abs(fg.sigma - fb.sigma) / std::max(1.0, std::abs(fb.sigma)));
        rep.rows.push_back(row);
    }
    const VerificationRow& first = rep.rows.front();
    for (std::size_t k = 0; k < rep.rows.size(); ++k) {
        auto& row = rep.rows[k];
        row.ermakov = ermakov_residual(make_frame(s, beta, gamma, sigma, row.t), first.C);
        rep.max_drift_I = std::max(rep.max_drift_I, std::abs(row.I - first.I) / drift_scale(std::abs(first.I)));
        rep.max_drift_IQ = std::max(rep.max_drift_IQ, std::abs(row.IQ - first.IQ) / drift_scale(first.IQ));
        rep.max_drift_C = std::max(rep.max_drift_C, std::abs(row.C - first.C) / drift_scale(first.C));
        rep.max_ermakov_residual = std::max(rep.max_ermakov_residual, std::abs(row.ermakov));
    }
    return rep;
}

inline void write_verification_csv(std::ostream& out, const VerificationReport& rep) {
    out << "t,re_I,im_I,IQ,Omega,C,ermakov_residual\n";
    for (const auto& r : rep.rows) {
        const std::array<double, 7> v{r.t, r.I.real(), r.I.imag(), r.IQ, r.omega, r.C, r.ermakov};
        write_csv_row(out, v);
    }
    out << "# max_drift_I=" << format_number(rep.max_drift_I) << ", max_drift_IQ=" << format_number(rep.max_drift_IQ)
        << ", omega_drift=" << format_number(rep.omega_drift) << '\n';
}

}  // namespace bck
