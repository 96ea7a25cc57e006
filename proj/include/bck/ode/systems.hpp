#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "bck/csv.hpp"
#include "bck/ode/dopri5.hpp"
#include "bck/scenario.hpp"

namespace bck {

using ode::DenseSolution;

/// Dense solution of β̈ + 2gβ̇ + ω²β = 0, augmented with the force functional
/// 𝓕 = ∫ e^G β F and the phase integral Θ = ∫ e^{-G} 𝓕²/β² (both anchored at 0 at t0).
/// State layout: β, β̇, 𝓕, Θ as interleaved (re, im).
class BetaSolution {
public:
    static constexpr std::array<const char*, 8> component_names = {"beta_re", "beta_im", "dbeta_re", "dbeta_im",
                                                                    "F_re",    "F_im",    "theta_re", "theta_im"};

    explicit BetaSolution(DenseSolution<8> sol) : sol_(std::move(sol)) { unwrap(); }

    const DenseSolution<8>& dense() const { return sol_; }
    double front() const { return sol_.front(); }
    double back() const { return sol_.back(); }

    Complex beta(double t) const { return pair(sol_.value(t), 0); }
    Complex beta_dot(double t) const { return pair(sol_.value(t), 2); }
    Complex force_functional(double t) const { return pair(sol_.value(t), 4); }
    Complex phase_integral(double t) const { return pair(sol_.value(t), 6); }
    /// Derivative of the β̇ interpolant (not the ODE right-hand side).
    Complex beta_ddot_interpolated(double t) const { return pair(sol_.derivative(t), 2); }

    /// Continuous arg β(t).
    double phase(double t) const {
        const std::size_t k = sol_.step_index(t);
        const double predicted = phases_[k] + phase_rate(sol_.states()[k]) * (t - sol_.times()[k]);
        return snap(std::arg(beta(t)), predicted);
    }

    const std::vector<double>& step_phases() const { return phases_; }

private:
    static Complex pair(const ode::State<8>& y, std::size_t i) { return {y[i], y[i + 1]}; }

    static double phase_rate(const ode::State<8>& y) {
        const Complex b = pair(y, 0), bd = pair(y, 2);
        return (std::conj(b) * bd).imag() / std::norm(b);
    }

    static double snap(double a, double predicted) {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        return a + two_pi * std::round((predicted - a) / two_pi);
    }

    void unwrap() {
        const auto& ys = sol_.states();
        const auto& ts = sol_.times();
        phases_.resize(ys.size());
        phases_[0] = std::arg(pair(ys[0], 0));
        for (std::size_t k = 1; k < ys.size(); ++k) {
            const double predicted = phases_[k - 1] + phase_rate(ys[k - 1]) * (ts[k] - ts[k - 1]);
            phases_[k] = snap(std::arg(pair(ys[k], 0)), predicted);
        }
    }

    DenseSolution<8> sol_;
    std::vector<double> phases_;
};

using Trajectory = DenseSolution<2>;

inline BetaSolution integrate_beta(const Scenario& s) {
    const BetaInitial ic = s.resolved_beta0();
    ode::State<8> y0{ic.beta.real(), ic.beta.imag(), ic.beta_dot.real(), ic.beta_dot.imag(), 0, 0, 0, 0};
    auto rhs = [&s](double t, const ode::State<8>& y) {
        const Complex b{y[0], y[1]}, bd{y[2], y[3]}, f{y[4], y[5]};
        const double g = s.g(t), w2 = s.omega2(t), eG = s.eG(t);
        const Complex bdd = -2.0 * g * bd - w2 * b;
        const Complex df = eG * s.F(t) * b;
        const Complex ratio = f / b;
        const Complex dtheta = ratio * ratio / eG;
        return ode::State<8>{bd.real(), bd.imag(), bdd.real(), bdd.imag(),
                             df.real(), df.imag(), dtheta.real(), dtheta.imag()};
    };
    return BetaSolution(ode::integrate<8>(rhs, s.t0, s.t1, y0, ode::step_control(s)));
}

/// 𝓕(t) = ∫_{t0}^{t} e^G β F for an arbitrary β(t), by quadrature through the same kernel.
template <class BetaFn>
DenseSolution<2> accumulate_F(const Scenario& s, BetaFn&& beta, std::span<const double> stops = {}) {
    auto rhs = [&](double t, const ode::State<2>&) {
        const Complex d = s.eG(t) * s.F(t) * Complex(beta(t));
        return ode::State<2>{d.real(), d.imag()};
    };
    return ode::integrate<2>(rhs, s.t0, s.t1, ode::State<2>{0.0, 0.0}, ode::step_control(s), stops);
}

inline DenseSolution<2> accumulate_F(const Scenario& s, const BetaSolution& beta) {
    return accumulate_F(s, [&beta](double t) { return beta.beta(t); }, beta.dense().times());
}

/// Classical (q, p) from q̇ = e^{-G}p/m, ṗ = e^G F − e^G m ω² q.
inline Trajectory integrate_classical(const Scenario& s, double q0, double p0) {
    auto rhs = [&s](double t, const ode::State<2>& y) {
        const double eG = s.eG(t);
        return ode::State<2>{y[1] / (eG * s.m), eG * (s.F(t) - s.m * s.omega2(t) * y[0])};
    };
    return ode::integrate<2>(rhs, s.t0, s.t1, ode::State<2>{q0, p0}, ode::step_control(s));
}

/// (γ, γ̇, γ̈) for ½γ⃛ + 3gγ̈ + (ġ + 4g² + 2ω²)γ̇ + ((ω²)˙ + 4ω²g)γ = 0.
inline DenseSolution<3> integrate_gamma(const Scenario& s, double gamma0, double gamma_dot0, double gamma_ddot0) {
    auto rhs = [&s](double t, const ode::State<3>& y) {
        const double g = s.g(t), w2 = s.omega2(t);
        const double third =
            -2.0 * (3.0 * g * y[2] + (s.g_dot(t) + 4.0 * g * g + 2.0 * w2) * y[1] + (s.omega2_dot(t) + 4.0 * w2 * g) * y[0]);
        return ode::State<3>{y[1], y[2], third};
    };
    return ode::integrate<3>(rhs, s.t0, s.t1, ode::State<3>{gamma0, gamma_dot0, gamma_ddot0}, ode::step_control(s));
}

/// (σ, σ̇, 𝓕(σ,t)) for σ̈ + 2gσ̇ + ω²σ = −(3/2)e^G F γ̇ − e^G(Ḟ + 4gF)γ, with 𝓕(σ,t) = ∫ e^G σ F.
inline DenseSolution<3> integrate_sigma(const Scenario& s, const DenseSolution<3>& gamma, double sigma0,
                                        double sigma_dot0) {
    auto rhs = [&](double t, const ode::State<3>& y) {
        const auto gm = gamma.value(t);
        const double g = s.g(t), eG = s.eG(t), F = s.F(t);
        const double acc = -2.0 * g * y[1] - s.omega2(t) * y[0] - 1.5 * eG * F * gm[1] - eG * (s.F_dot(t) + 4.0 * g * F) * gm[0];
        return ode::State<3>{y[1], acc, eG * y[0] * F};
    };
    // stepping on γ's nodes keeps each step inside one interpolation interval
    return ode::integrate<3>(rhs, s.t0, s.t1, ode::State<3>{sigma0, sigma_dot0, 0.0}, ode::step_control(s),
                             gamma.times());
}

using CCoefficients = std::array<double, 5>;

/// The five coefficient ODEs that make ½c1 q² + ½c2{q,p} + ½c3 p² + c4 q + c5 p − 𝓕(c5,t) invariant.
inline DenseSolution<5> integrate_c_system(const Scenario& s, const CCoefficients& c0) {
    auto rhs = [&s](double t, const ode::State<5>& c) {
        const double eG = s.eG(t), m = s.m, mw2 = s.m * s.omega2(t), F = s.F(t);
        return ode::State<5>{
            2.0 * c[1] * eG * mw2,
            -c[0] / (eG * m) + c[2] * eG * mw2,
            -2.0 * c[1] / (eG * m),
            -c[1] * eG * F + c[4] * eG * mw2,
            -c[2] * eG * F - c[3] / (eG * m),
        };
    };
    return ode::integrate<5>(rhs, s.t0, s.t1, c0, ode::step_control(s));
}

/// γ = 2β*β and its first two derivatives at t0, from the β initial conditions.
inline std::array<double, 3> gamma_initial_from_beta(const Scenario& s) {
    const BetaInitial ic = s.resolved_beta0();
    const Complex b = ic.beta, bd = ic.beta_dot;
    const Complex bdd = -2.0 * s.g(s.t0) * bd - s.omega2(s.t0) * b;
    return {2.0 * std::norm(b), 4.0 * (std::conj(b) * bd).real(), 4.0 * ((std::conj(b) * bdd).real() + std::norm(bd))};
}

/// σ = −β*𝓕 − 𝓕*β and σ̇ at t0 (𝓕(t0) = 0).
inline std::array<double, 2> sigma_initial_from_beta(const Scenario& s) {
    const BetaInitial ic = s.resolved_beta0();
    return {0.0, -2.0 * std::norm(ic.beta) * s.F(s.t0)};
}

/// c_i from (γ, γ̇, γ̈, σ, σ̇) at time t.
inline CCoefficients c_from_reduction(const Scenario& s, double t, double gamma, double gamma_dot,
                                      double gamma_ddot, double sigma, double sigma_dot) {
    const double eG = s.eG(t), m = s.m;
    return {m * m * eG * eG * (0.5 * gamma_ddot + s.g(t) * gamma_dot + s.omega2(t) * gamma),
            -0.5 * m * eG * gamma_dot, gamma, -m * eG * (sigma_dot + gamma * eG * s.F(t)), sigma};
}

struct PolarResiduals {
    double max_amplitude_residual = 0.0;  // ρ̈ + 2gρ̇ + (ω² − φ̇²)ρ
    double max_phase_residual = 0.0;      // 2ρ̇φ̇ + ρ(φ̈ + 2gφ̇)
    std::size_t samples_used = 0;
};

/// Residuals of the polar form β = ρe^{iφ}; second derivatives come from
/// differentiating the dense interpolant of β̇, not from the β equation.
inline PolarResiduals polar_residuals(const Scenario& s, const BetaSolution& beta, std::size_t samples = 512) {
    PolarResiduals out;
    for (std::size_t k = 0; k < samples; ++k) {
        const double t = s.t0 + (s.t1 - s.t0) * static_cast<double>(k) / static_cast<double>(samples - 1);
        const Complex b = beta.beta(t), bd = beta.beta_dot(t), bdd = beta.beta_ddot_interpolated(t);
        const double rho = std::abs(b);
        if (rho <= 1e-8) continue;
        const Complex x = std::conj(b) * bd;
        const double rho_dot = x.real() / rho;
        const double phi_dot = x.imag() / (rho * rho);
        const Complex xd = std::norm(bd) + std::conj(b) * bdd;  // d/dt (β*β̇)
        const double rho_ddot = xd.real() / rho - x.real() * rho_dot / (rho * rho);
        const double phi_ddot = xd.imag() / (rho * rho) - 2.0 * x.imag() * rho_dot / (rho * rho * rho);
        const double g = s.g(t);
        const double r1 = rho_ddot + 2.0 * g * rho_dot + (s.omega2(t) - phi_dot * phi_dot) * rho;
        const double r2 = 2.0 * rho_dot * phi_dot + rho * (phi_ddot + 2.0 * g * phi_dot);
        out.max_amplitude_residual = std::max(out.max_amplitude_residual, std::abs(r1));
        out.max_phase_residual = std::max(out.max_phase_residual, std::abs(r2));
        ++out.samples_used;
    }
    return out;
}

/// max |q̈ + 2gq̇ + ω²q − F/m| with q̇ from the q interpolant and q̈ = e^{-G}(ṗ − 2gp)/m
/// from the p interpolant.
inline double classical_residual(const Scenario& s, const Trajectory& traj, std::size_t samples = 512) {
    double worst = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        const double t = s.t0 + (s.t1 - s.t0) * static_cast<double>(k) / static_cast<double>(samples - 1);
        const auto y = traj.value(t);
        const auto dy = traj.derivative(t);
        const double g = s.g(t);
        const double qddot = (dy[1] - 2.0 * g * y[1]) / (s.eG(t) * s.m);
        const double r = qddot + 2.0 * g * dy[0] + s.omega2(t) * y[0] - s.F(t) / s.m;
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

/// CSV with header `t,<names...>`, one row per accepted step.
template <std::size_t N, class Names>
void write_solution_csv(std::ostream& out, const DenseSolution<N>& sol, const Names& names) {
    out << 't';
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    std::array<double, N + 1> row;
    for (std::size_t i = 0; i < sol.size(); ++i) {
        row[0] = sol.times()[i];
        std::copy(sol.states()[i].begin(), sol.states()[i].end(), row.begin() + 1);
        write_csv_row(out, row);
    }
}

}  // namespace bck
