#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <string>

#include "bck/error.hpp"
#include "bck/time_function.hpp"

namespace bck {

using Complex = std::complex<double>;

/// Uniform grid including both end points.
struct QGrid {
    double qmin = -10.0;
    double qmax = 10.0;
    int npoints = 1024;

    double spacing() const { return (qmax - qmin) / (npoints - 1); }
    double point(int i) const { return qmin + i * spacing(); }
    bool operator==(const QGrid&) const = default;
};

struct IntegratorOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double max_step = 0.0;  // <= 0 means "(t1 - t0) / 100", resolved by Scenario::validate
    bool operator==(const IntegratorOptions&) const = default;
};

/// (β(t0), β̇(t0))
struct BetaInitial {
    Complex beta{1.0, 0.0};
    Complex beta_dot{0.0, 1.0};
    bool operator==(const BetaInitial&) const = default;
};

/// Full problem definition for the damped, driven oscillator
///   H = e^{-G} p²/2m + ½ m ω² e^{G} q² − e^{G} F q,   G(t) = 2∫_{t0}^{t} g.
struct Scenario {
    double m = 1.0;
    double hbar = 1.0;
    TimeFunction omega = Constant{1.0};
    TimeFunction damping = Constant{0.0};
    TimeFunction force = Constant{0.0};
    double t0 = 0.0;
    double t1 = 10.0;
    std::optional<BetaInitial> beta0;
    QGrid grid;
    IntegratorOptions integrator;

    bool operator==(const Scenario&) const = default;

    double omega2(double t) const {
        const double w = omega(t);
        return w * w;
    }
    double omega2_dot(double t) const { return 2.0 * omega(t) * omega.derivative(t); }
    double g(double t) const { return damping(t); }
    double g_dot(double t) const { return damping.derivative(t); }
    double F(double t) const { return force(t); }
    double F_dot(double t) const { return force.derivative(t); }

    /// G(t) with the gauge G(t0) = 0. Tolerates round-off overshoot at the window ends.
    double G(double t) const {
        const double slack = 1e-12 * std::max(1.0, std::abs(t1 - t0));
        if (t < t0 - slack || t > t1 + slack) {
            throw Error(ErrorKind::OutOfDomain,
                        "G(t) requested at t=" + std::to_string(t) + " outside the scenario window");
        }
        return 2.0 * damping.integral(t0, t);
    }
    double eG(double t) const { return std::exp(G(t)); }

    /// Explicit β ICs, or the underdamped default β=1, β̇ = −g + i√(ω²−g²) at t0.
    BetaInitial resolved_beta0() const {
        if (beta0) return *beta0;
        const double g0 = g(t0);
        const double disc = omega2(t0) - g0 * g0;
        if (!(disc > 0.0)) {
            throw Error(ErrorKind::InvalidIC,
                        "default β initial conditions need ω²(t0) > g²(t0); supply [beta0] explicitly");
        }
        return BetaInitial{Complex{1.0, 0.0}, Complex{-g0, std::sqrt(disc)}};
    }

    double resolved_max_step() const { return integrator.max_step > 0.0 ? integrator.max_step : (t1 - t0) / 100.0; }

    void validate() {
        auto fail = [](const std::string& msg) { throw Error(ErrorKind::ValidationError, msg); };
        if (!(m > 0.0)) fail("m must be > 0");
        if (!(hbar > 0.0)) fail("hbar must be > 0");
        if (!(t1 > t0)) fail("t1 must be greater than t0");
        if (grid.npoints < 16) fail("grid.npoints must be >= 16");
        if (!(grid.qmin < grid.qmax)) fail("grid.qmin must be < grid.qmax");
        if (beta0 && beta0->beta == Complex{} && beta0->beta_dot == Complex{}) {
            fail("beta0: β(t0) and β̇(t0) cannot both be zero");
        }
        if (!(integrator.rtol > 0.0) || !(integrator.atol > 0.0)) fail("integrator tolerances must be > 0");
        if (integrator.max_step <= 0.0) integrator.max_step = (t1 - t0) / 100.0;
        for (const TimeFunction* f : {&omega, &damping, &force}) {
            if (const auto* tab = std::get_if<Tabulated>(&f->variant())) {
                if (tab->spline->front() > t0 || tab->spline->back() < t1) {
                    fail("tabulated function does not cover the window [t0, t1]");
                }
            }
        }
    }
};

inline double eval_G(const Scenario& s, double t) { return s.G(t); }

}  // namespace bck
