#pragma once

// Reference computations used only by the tests. None of them share code with the library.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "bck/scenario.hpp"

namespace oracle {

using Complex = std::complex<double>;

/// Classical fixed-step RK4 from t0 to each requested time (ascending).
template <std::size_t N, class Rhs>
std::vector<std::array<double, N>> rk4(Rhs rhs, double t0, std::array<double, N> y, double dt,
                                       const std::vector<double>& at) {
    std::vector<std::array<double, N>> out;
    double t = t0;
    auto axpy = [](const std::array<double, N>& a, double s, const std::array<double, N>& b) {
        std::array<double, N> r;
        for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + s * b[i];
        return r;
    };
    for (double target : at) {
        while (t < target) {
            const double h = std::min(dt, target - t);
            const auto k1 = rhs(t, y);
            const auto k2 = rhs(t + h / 2, axpy(y, h / 2, k1));
            const auto k3 = rhs(t + h / 2, axpy(y, h / 2, k2));
            const auto k4 = rhs(t + h, axpy(y, h, k3));
            for (std::size_t i = 0; i < N; ++i) y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
            t = (target - t <= dt) ? target : t + h;
        }
        out.push_back(y);
    }
    return out;
}

/// Adaptive Simpson quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-13, int depth = 50) {
    std::function<double(double, double, double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double eps, int d) {
            const double mid = 0.5 * (lo + hi);
            const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
            const double flm = f(lm), frm = f(rm);
            const double left = (mid - lo) / 6 * (flo + 4 * flm + fmid);
            const double right = (hi - mid) / 6 * (fmid + 4 * frm + fhi);
            if (d <= 0 || std::abs(left + right - whole) <= 15 * eps) return left + right + (left + right - whole) / 15;
            return rec(lo, mid, flo, flm, fmid, left, eps / 2, d - 1) + rec(mid, hi, fmid, frm, fhi, right, eps / 2, d - 1);
        };
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return rec(a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), tol, depth);
}

inline Complex simpson_complex(const std::function<Complex(double)>& f, double a, double b, double tol = 1e-13) {
    return {simpson([&](double t) { return f(t).real(); }, a, b, tol),
            simpson([&](double t) { return f(t).imag(); }, a, b, tol)};
}

/// Trapezoid ∫ conj(a) b on raw samples.
inline Complex trapezoid(const std::vector<Complex>& a, const std::vector<Complex>& b, double h) {
    Complex acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double w = (i == 0 || i + 1 == a.size()) ? 0.5 : 1.0;
        acc += w * std::conj(a[i]) * b[i];
    }
    return acc * h;
}

/// Textbook oscillator eigenfunctions (m = ħ = ω = 1, t = 0).
inline double sho_psi0(double q) { return std::pow(std::numbers::pi, -0.25) * std::exp(-q * q / 2); }
inline double sho_psi1(double q) { return std::pow(std::numbers::pi, -0.25) * std::sqrt(2.0) * q * std::exp(-q * q / 2); }

/// Constant-coefficient underdamped data (t0 = 0, default initial conditions).
struct Underdamped {
    double g, omega;
    double wbar() const { return std::sqrt(omega * omega - g * g); }
    Complex beta(double t) const { return std::exp(Complex(-g, wbar()) * t); }
};

/// The driven-underdamped benchmark: m = ħ = 1, ω = 1, g = 0.1, F = 0.5 sin(0.9 t).
inline bck::Scenario driven_scenario(double t1 = 20.0) {
    bck::Scenario s;
    s.omega = bck::Constant{1.0};
    s.damping = bck::Constant{0.1};
    s.force = bck::Sinusoid{0.5, 0.9, 0.0};
    s.t0 = 0.0;
    s.t1 = t1;
    s.integrator.rtol = 1e-12;
    s.integrator.atol = 1e-14;
    s.grid = {-14.0, 14.0, 1024};
    s.validate();
    return s;
}

inline bck::Scenario sho_scenario(double t1 = 2 * std::numbers::pi) {
    bck::Scenario s;
    s.t0 = 0.0;
    s.t1 = t1;
    s.grid = {-12.0, 12.0, 1024};
    s.integrator.rtol = 1e-12;
    s.integrator.atol = 1e-14;
    s.validate();
    return s;
}

/// ω = 1 + 0.05 t, g = 0.05.
inline bck::Scenario ramp_scenario(double t1 = 20.0) {
    bck::Scenario s;
    s.omega = bck::Linear{1.0, 0.05};
    s.damping = bck::Constant{0.05};
    s.t0 = 0.0;
    s.t1 = t1;
    s.integrator.rtol = 1e-12;
    s.integrator.atol = 1e-14;
    s.grid = {-14.0, 14.0, 1024};
    s.validate();
    return s;
}

}  // namespace oracle
