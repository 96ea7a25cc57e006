#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "bck/invariants.hpp"
#include "bck/scenario.hpp"

namespace bck {

namespace detail {
/// ∫_0^t e^{λτ} dτ, stable for λt → 0.
inline Complex exp_integral(Complex lambda, double t) {
    const Complex z = lambda * t;
    if (std::abs(z) < 1e-4) {
        return t * (1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0);
    }
    return (std::exp(z) - 1.0) / lambda;
}
}  // namespace detail

/// Closed-form solution of the constant-coefficient underdamped oscillator (g² < ω², t0 = 0)
/// driven by F = F0 sin(αt):
///   β = e^{(−g + iω̄)t},   𝓕 = F0 e^{kt}[k sin αt − α cos αt + α e^{−kt}]/(k² + α²),  k = g + iω̄.
class UnderdampedClosedForm {
public:
    UnderdampedClosedForm(double m, double hbar, double omega, double g, double F0, double alpha)
        : m_(m), hbar_(hbar), omega_(omega), g_(g), F0_(F0), alpha_(alpha) {
        if (!(g * g < omega * omega)) {
            throw Error(ErrorKind::NotUnderdamped, "closed forms need g² < ω² (got g=" + format_number(g) +
                                                       ", ω=" + format_number(omega) + ")");
        }
        omega_bar_ = std::sqrt(omega * omega - g * g);
        k_ = Complex(g, omega_bar_);
        denom_ = k_ * k_ + alpha * alpha;
        // N(t) = A e^{iαt} + B e^{−iαt} + α e^{−kt}
        const Complex half_k_over_i = k_ / Complex(0.0, 2.0);
        a_ = half_k_over_i - alpha / 2.0;
        b_ = -half_k_over_i - alpha / 2.0;
    }

    double m() const { return m_; }
    double hbar() const { return hbar_; }
    double omega() const { return omega_; }
    double g() const { return g_; }
    double omega_bar() const { return omega_bar_; }
    double F0() const { return F0_; }
    double alpha() const { return alpha_; }

    double G(double t) const { return 2.0 * g_ * t; }
    double F(double t) const { return F0_ * std::sin(alpha_ * t); }

    Complex beta(double t) const { return std::exp(Complex(-g_, omega_bar_) * t); }
    Complex beta_dot(double t) const { return Complex(-g_, omega_bar_) * beta(t); }
    double phase(double t) const { return omega_bar_ * t; }

    /// k sin αt − α cos αt + α e^{−kt}
    Complex numerator(double t) const {
        return k_ * std::sin(alpha_ * t) - alpha_ * std::cos(alpha_ * t) + alpha_ * std::exp(-k_ * t);
    }

    Complex force_functional(double t) const { return F0_ * std::exp(k_ * t) * numerator(t) / denom_; }

    /// (g² − ω̄² + α²)² + 4ω̄²g² = |k² + α²|²
    double real_denominator() const {
        const double d = g_ * g_ - omega_bar_ * omega_bar_ + alpha_ * alpha_;
        return d * d + 4.0 * omega_bar_ * omega_bar_ * g_ * g_;
    }

    /// ω̄ sin αt − α e^{−gt} sin ω̄t
    double bracket_a(double t) const {
        return omega_bar_ * std::sin(alpha_ * t) - alpha_ * std::exp(-g_ * t) * std::sin(omega_bar_ * t);
    }
    /// g sin αt − α cos αt + α e^{−gt} cos ω̄t
    double bracket_b(double t) const {
        return g_ * std::sin(alpha_ * t) - alpha_ * std::cos(alpha_ * t) + alpha_ * std::exp(-g_ * t) * std::cos(omega_bar_ * t);
    }

    double sigma(double t) const {
        const double d = g_ * g_ - omega_bar_ * omega_bar_ + alpha_ * alpha_;
        return -2.0 * F0_ / real_denominator() * (2.0 * omega_bar_ * g_ * bracket_a(t) + d * bracket_b(t));
    }

    /// σ̇ = −β̇*𝓕 − 𝓕*β̇ − γ e^G F
    double sigma_dot(double t) const {
        return -2.0 * (std::conj(beta_dot(t)) * force_functional(t)).real() -
               gamma(t) * std::exp(G(t)) * F(t);
    }

    /// 𝓕(σ, t) = −𝓕*𝓕 = −F0² e^{2gt} [a² + b²] / D
    double force_sigma(double t) const {
        const double a = bracket_a(t), b = bracket_b(t);
        return -F0_ * F0_ * std::exp(2.0 * g_ * t) * (a * a + b * b) / real_denominator();
    }

    /// The same expression with an overall factor 2, kept only for comparison.
    double force_sigma_doubled(double t) const { return 2.0 * force_sigma(t); }

    double gamma(double t) const { return 2.0 * std::exp(-2.0 * g_ * t); }
    double gamma_dot(double t) const { return -2.0 * g_ * gamma(t); }
    double gamma_ddot(double t) const { return 4.0 * g_ * g_ * gamma(t); }

    /// Θ(t) = ∫_0^t e^{−G} 𝓕²/β², exact: e^{−2gτ}(𝓕/β)² = F0² e^{2gτ} N²/(k² + α²)².
    Complex phase_integral(double t) const {
        const Complex i(0.0, 1.0);
        const double two_g = 2.0 * g_;
        const Complex c = alpha_;
        const Complex sum = a_ * a_ * detail::exp_integral(two_g + 2.0 * i * alpha_, t) +
                            b_ * b_ * detail::exp_integral(two_g - 2.0 * i * alpha_, t) +
                            c * c * detail::exp_integral(two_g - 2.0 * k_, t) +
                            2.0 * a_ * b_ * detail::exp_integral(two_g, t) +
                            2.0 * a_ * c * detail::exp_integral(two_g + i * alpha_ - k_, t) +
                            2.0 * b_ * c * detail::exp_integral(two_g - i * alpha_ - k_, t);
        return F0_ * F0_ * sum / (denom_ * denom_);
    }

    /// I = e^{iω̄t}[e^{−gt}p + m(g − iω̄)e^{gt}q − e^{−iω̄t}𝓕]
    Complex linear_invariant(double t, double q, double p) const {
        const Complex rot = std::exp(Complex(0.0, omega_bar_ * t));
        return rot * (std::exp(-g_ * t) * p + m_ * Complex(g_, -omega_bar_) * std::exp(g_ * t) * q -
                      std::conj(rot) * force_functional(t));
    }

    /// e^{−2gt}p² + m²ω²e^{2gt}q² + 2mg·qp − me^G(σ̇ + γe^G F)q + σp − 𝓕(σ,t)
    double quadratic_invariant(double t, double q, double p) const {
        const double eG = std::exp(G(t));
        return std::exp(-2.0 * g_ * t) * p * p + m_ * m_ * omega_ * omega_ * std::exp(2.0 * g_ * t) * q * q +
               2.0 * m_ * g_ * q * p - m_ * eG * (sigma_dot(t) + gamma(t) * eG * F(t)) * q + sigma(t) * p -
               force_sigma(t);
    }

    double omega_value() const { return 2.0 * m_ * omega_bar_ * hbar_; }
    double eigenvalue(int n) const { return omega_value() * (n + 0.5); }

    /// ħ²(ω²/ω̄²)(n + ½)², from the generic variances with the closed-form β.
    double uncertainty_generic(int n) const {
        const double h = hbar_ * (n + 0.5);
        return h * h * omega_ * omega_ / (omega_bar_ * omega_bar_);
    }
    /// ħ²((ω̄² − g²)/ω̄²)(n + ½)², the alternative form; falls below ħ²(n+½)² whenever g ≠ 0.
    double uncertainty_alternative(int n) const {
        const double h = hbar_ * (n + 0.5);
        return h * h * (omega_bar_ * omega_bar_ - g_ * g_) / (omega_bar_ * omega_bar_);
    }

    InvariantFrame frame(double t) const {
        InvariantFrame f;
        f.t = t;
        f.beta = beta(t);
        f.beta_dot = beta_dot(t);
        f.force = force_functional(t);
        f.gamma = gamma(t);
        f.gamma_dot = gamma_dot(t);
        f.gamma_ddot = gamma_ddot(t);
        f.sigma = sigma(t);
        f.sigma_dot = sigma_dot(t);
        f.force_sigma = force_sigma(t);
        f.G = G(t);
        f.eG = std::exp(f.G);
        f.m = m_;
        f.hbar = hbar_;
        f.g = g_;
        f.omega2 = omega_ * omega_;
        f.F = F(t);
        f.phase = phase(t);
        f.phase_integral = phase_integral(t);
        f.beta_derived = true;
        return f;
    }

private:
    double m_, hbar_, omega_, g_, F0_, alpha_;
    double omega_bar_ = 0.0;
    Complex k_, denom_, a_, b_;
};

/// Closed forms for a scenario with constant ω and g, t0 = 0, default β ICs and
/// F = F0 sin(αt) (or F ≡ 0).
inline UnderdampedClosedForm underdamped_closed_forms(const Scenario& s) {
    const auto* w = std::get_if<Constant>(&s.omega.variant());
    const auto* g = std::get_if<Constant>(&s.damping.variant());
    if (!w || !g) throw Error(ErrorKind::NotUnderdamped, "closed forms need constant ω and g");
    if (s.t0 != 0.0) throw Error(ErrorKind::ValidationError, "closed forms are anchored at t0 = 0");
    double F0 = 0.0, alpha = 0.0;
    if (const auto* sn = std::get_if<Sinusoid>(&s.force.variant())) {
        if (sn->phase != 0.0) throw Error(ErrorKind::UnsupportedForceShape, "sinusoidal force must have zero phase");
        F0 = sn->amplitude;
        alpha = sn->frequency;
    } else if (const auto* c = std::get_if<Constant>(&s.force.variant()); !(c && c->value == 0.0)) {
        throw Error(ErrorKind::UnsupportedForceShape, "closed forms need F = F0 sin(αt) or F ≡ 0");
    }
    UnderdampedClosedForm cf(s.m, s.hbar, w->value, g->value, F0, alpha);
    if (s.beta0) {
        const BetaInitial def{Complex(1.0, 0.0), Complex(-g->value, cf.omega_bar())};
        if (!(*s.beta0 == def)) {
            throw Error(ErrorKind::ValidationError, "closed forms assume the default β initial conditions");
        }
    }
    return cf;
}

}  // namespace bck
