#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <span>
#include <vector>

#include "bck/csv.hpp"
#include "bck/invariants.hpp"
#include "bck/scenario.hpp"

namespace bck {

/// Complex amplitudes on a uniform grid at time t.
struct WaveFunction {
    QGrid grid;
    std::vector<Complex> psi;
    double t = 0.0;
    double norm = 0.0;  // trapezoid L² norm, set by refresh_norm()

    std::size_t size() const { return psi.size(); }
    double q(std::size_t i) const { return grid.point(static_cast<int>(i)); }
    void refresh_norm();
};

/// How the time-dependent global phase of ψ_n is fixed.
enum class Phase {
    /// Normalization carries β^{-1/2} e^{-iΘ/(2mħ)}, so ψ_n(q, t) solves the time-dependent equation.
    Schrodinger,
    /// Real positive normalization A; an instantaneous eigenfunction of I_Q only.
    Eigenfunction,
};

/// Number of cells at each end skipped by error metrics of finite-difference outputs.
inline constexpr std::size_t boundary_cells = 2;

/// ∫ conj(a) b dq by the trapezoid rule, optionally skipping `skip` cells at each end.
inline Complex inner_product(const WaveFunction& a, const WaveFunction& b, std::size_t skip = 0) {
    const std::size_t n = a.size();
    if (b.size() != n) throw Error(ErrorKind::ValidationError, "inner product of wavefunctions on different grids");
    Complex acc = 0.0;
    for (std::size_t i = skip; i + skip < n; ++i) {
        const double w = (i == skip || i + skip + 1 == n) ? 0.5 : 1.0;
        acc += w * std::conj(a.psi[i]) * b.psi[i];
    }
    return acc * a.grid.spacing();
}

inline double l2_norm(const WaveFunction& a, std::size_t skip = 0) {
    return std::sqrt(std::max(0.0, inner_product(a, a, skip).real()));
}

inline void WaveFunction::refresh_norm() { norm = l2_norm(*this); }

/// ‖a − b‖ / ‖b‖ over interior cells.
inline double relative_l2_error(const WaveFunction& a, const WaveFunction& b, std::size_t skip = boundary_cells) {
    WaveFunction d = a;
    for (std::size_t i = 0; i < d.size(); ++i) d.psi[i] -= b.psi[i];
    return l2_norm(d, skip) / l2_norm(b, skip);
}

/// Physicists' Hermite polynomial by the three-term recurrence.
inline double hermite(int n, double x) {
    if (n < 0) throw Error(ErrorKind::ValidationError, "Hermite degree must be >= 0");
    if (n > 200) throw Error(ErrorKind::DegreeTooLarge, "Hermite degree " + std::to_string(n) + " exceeds 200");
    double h0 = 1.0;
    if (n == 0) return h0;
    double h1 = 2.0 * x;
    for (int k = 1; k < n; ++k) {
        const double h2 = 2.0 * x * h1 - 2.0 * k * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

/// H_n(x)/√(2ⁿ n!) via the rescaled recurrence, free of factorial overflow.
inline double hermite_normalized(int n, double x) {
    if (n < 0) throw Error(ErrorKind::ValidationError, "Hermite degree must be >= 0");
    if (n > 200) throw Error(ErrorKind::DegreeTooLarge, "Hermite degree " + std::to_string(n) + " exceeds 200");
    double h0 = 1.0;
    if (n == 0) return h0;
    double h1 = std::sqrt(2.0) * x;
    for (int k = 1; k < n; ++k) {
        const double h2 = x * std::sqrt(2.0 / (k + 1)) * h1 - std::sqrt(static_cast<double>(k) / (k + 1)) * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

/// Ω for wavefunction construction; must be real and positive.
inline double require_positive_omega(const InvariantFrame& f) {
    const Complex om = omega_complex(f);
    if (!(om.real() > 0.0) || std::abs(om.imag()) > 1e-8 * std::abs(om)) {
        throw Error(ErrorKind::OmegaNotPositive,
                    "Ω = " + format_number(om.real()) + (om.imag() >= 0 ? "+" : "") + format_number(om.imag()) + "i");
    }
    return om.real();
}

struct QPExpectation {
    double q = 0.0;
    double p = 0.0;
};

/// ⟨q⟩ = −(2ħ/Ω) Im(β*𝓕),  ⟨p⟩ = −(2mħe^G/Ω) Im(β̇*𝓕); the same for every n.
inline QPExpectation expectation_qp(const InvariantFrame& f) {
    const double om = require_positive_omega(f);
    return {-2.0 * f.hbar / om * (std::conj(f.beta) * f.force).imag(),
            -2.0 * f.m * f.hbar * f.eG / om * (std::conj(f.beta_dot) * f.force).imag()};
}

struct Uncertainty {
    double dq2 = 0.0;
    double dp2 = 0.0;
    double product = 0.0;
};

/// (Δq)² = (ħ²/Ω)β*β(2n+1),  (Δp)² = (ħ²m²e^{2G}/Ω)β̇*β̇(2n+1).
inline Uncertainty uncertainty_product(int n, const InvariantFrame& f) {
    const double om = require_positive_omega(f);
    const double k = 2.0 * n + 1.0;
    Uncertainty u;
    u.dq2 = f.hbar * f.hbar / om * std::norm(f.beta) * k;
    u.dp2 = f.hbar * f.hbar * f.m * f.m * f.eG * f.eG / om * std::norm(f.beta_dot) * k;
    u.product = u.dq2 * u.dp2;
    return u;
}

/// Gaussian envelope width ħ√(2β*β/Ω).
inline double envelope_width(const InvariantFrame& f) {
    return f.hbar * std::sqrt(2.0 * std::norm(f.beta) / require_positive_omega(f));
}

/// Requires 8w√(n+1) of room on both sides of ⟨q⟩.
inline void check_grid(int n, const QGrid& grid, const InvariantFrame& f) {
    const double w = envelope_width(f);
    const double centre = expectation_qp(f).q;
    const double need = 8.0 * w * std::sqrt(n + 1.0);
    if (grid.qmax - centre < need || centre - grid.qmin < need) {
        const double suggested = std::ceil(2.0 * (std::abs(centre) + need)) / 2.0;
        throw Error(ErrorKind::GridTooNarrow, "grid [" + format_number(grid.qmin) + ", " + format_number(grid.qmax) +
                                                  "] is too narrow for n=" + std::to_string(n) +
                                                  "; suggested qmax=" + format_number(suggested) +
                                                  " (qmin=-qmax)");
    }
}

/// Real normalization constant
///   A = (Ω/(2πħ²β*β))^{1/4} exp(−Im(β*𝓕)²/(β*β Ω)).
inline double normalization_A(const InvariantFrame& f) {
    const double om = require_positive_omega(f);
    const double b2 = std::norm(f.beta);
    const double im = (std::conj(f.beta) * f.force).imag();
    return std::pow(om / (2.0 * std::numbers::pi * f.hbar * f.hbar * b2), 0.25) * std::exp(-im * im / (b2 * om));
}

/// log of the normalization factor for the chosen convention.
inline Complex log_normalization(const InvariantFrame& f, Phase phase) {
    const double om = require_positive_omega(f);
    const double b2 = std::norm(f.beta);
    if (phase == Phase::Eigenfunction) {
        const double im = (std::conj(f.beta) * f.force).imag();
        return 0.25 * std::log(om / (2.0 * std::numbers::pi * f.hbar * f.hbar * b2)) - im * im / (b2 * om);
    }
    // (Ω/2πħ²)^{1/4} β^{-1/2} e^{-iΘ/(2mħ)} with the continuous branch of arg β
    const Complex log_beta(0.5 * std::log(b2), f.phase);
    return 0.25 * std::log(om / (2.0 * std::numbers::pi * f.hbar * f.hbar)) - 0.5 * log_beta -
           Complex(0.0, 1.0) * f.phase_integral / (2.0 * f.m * f.hbar);
}

/// ψ_n(q) = (i e^{-iφ})ⁿ/√(2ⁿn!) ψ_0 H_n(x),
///   ψ_0 = N exp[i(me^Gβ̇q² + 2𝓕q)/(2ħβ)],  x = √(Ω/(2β*β)) (q/ħ + (2/Ω)Im(β*𝓕)).
inline WaveFunction eval_psin(int n, const QGrid& grid, const InvariantFrame& f, Phase phase = Phase::Schrodinger) {
    if (n < 0) throw Error(ErrorKind::ValidationError, "quantum number must be >= 0");
    if (n > 200) throw Error(ErrorKind::DegreeTooLarge, "quantum number " + std::to_string(n) + " exceeds 200");
    const double om = require_positive_omega(f);
    check_grid(n, grid, f);
    const Complex i(0.0, 1.0);
    const Complex log_n = log_normalization(f, phase);
    const Complex quad = i * f.m * f.eG * f.beta_dot / (2.0 * f.hbar * f.beta);
    const Complex lin = i * f.force / (f.hbar * f.beta);
    const double scale = std::sqrt(om / (2.0 * std::norm(f.beta)));
    const double shift = 2.0 / om * (std::conj(f.beta) * f.force).imag();
    const Complex prefactor = std::pow(i * std::exp(-i * f.phase), n);

    WaveFunction w;
    w.grid = grid;
    w.t = f.t;
    w.psi.resize(static_cast<std::size_t>(grid.npoints));
    for (int k = 0; k < grid.npoints; ++k) {
        const double q = grid.point(k);
        const Complex psi0 = std::exp(log_n + quad * q * q + lin * q);
        w.psi[static_cast<std::size_t>(k)] = prefactor * psi0 * hermite_normalized(n, scale * (q / f.hbar + shift));
    }
    w.refresh_norm();
    return w;
}

inline WaveFunction eval_psin(int n, const Scenario& s, const InvariantFrame& f, Phase phase = Phase::Schrodinger) {
    return eval_psin(n, s.grid, f, phase);
}

inline WaveFunction eval_psi0(const Scenario& s, const InvariantFrame& f, Phase phase = Phase::Schrodinger) {
    return eval_psin(0, s.grid, f, phase);
}

namespace detail {
inline Complex at(const std::vector<Complex>& v, std::ptrdiff_t i) {
    return (i < 0 || i >= static_cast<std::ptrdiff_t>(v.size())) ? Complex{} : v[static_cast<std::size_t>(i)];
}
}  // namespace detail

/// 4th-order central first derivative, zero outside the grid.
inline std::vector<Complex> derivative1(const WaveFunction& w) {
    const double h = w.grid.spacing();
    std::vector<Complex> d(w.size());
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(w.size()); ++i) {
        using detail::at;
        d[static_cast<std::size_t>(i)] =
            (-at(w.psi, i + 2) + 8.0 * at(w.psi, i + 1) - 8.0 * at(w.psi, i - 1) + at(w.psi, i - 2)) / (12.0 * h);
    }
    return d;
}

/// 4th-order central second derivative, zero outside the grid.
inline std::vector<Complex> derivative2(const WaveFunction& w) {
    const double h = w.grid.spacing();
    std::vector<Complex> d(w.size());
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(w.size()); ++i) {
        using detail::at;
        d[static_cast<std::size_t>(i)] = (-at(w.psi, i + 2) + 16.0 * at(w.psi, i + 1) - 30.0 * at(w.psi, i) +
                                          16.0 * at(w.psi, i - 1) - at(w.psi, i - 2)) /
                                         (12.0 * h * h);
    }
    return d;
}

enum class Ladder { Down, Up };

/// a = I/√Ω, a† = I†/√Ω with p → −iħ d/dq.
inline WaveFunction apply_ladder(Ladder dir, const WaveFunction& w, const InvariantFrame& f) {
    const double root = std::sqrt(require_positive_omega(f));
    const bool up = dir == Ladder::Up;
    const Complex b = up ? std::conj(f.beta) : f.beta;
    const Complex bd = up ? std::conj(f.beta_dot) : f.beta_dot;
    const Complex force = up ? std::conj(f.force) : f.force;
    const auto d = derivative1(w);
    WaveFunction out = w;
    const Complex mi_hbar(0.0, -f.hbar);
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double q = w.q(k);
        out.psi[k] = (b * mi_hbar * d[k] - f.m * f.eG * bd * q * w.psi[k] - force * w.psi[k]) / root;
    }
    out.refresh_norm();
    return out;
}

/// I_Q as a differential operator: ½c1q² + ½c2{q,p} + ½c3p² + c4q + c5p − 𝓕(σ,t),
/// with {q,p} = −iħ(2q d/dq + 1) and p² = −ħ² d²/dq².
inline WaveFunction apply_IQ(const WaveFunction& w, const InvariantFrame& f) {
    require_positive_omega(f);
    const auto c = quadratic_coefficients(f);
    const auto d1 = derivative1(w);
    const auto d2 = derivative2(w);
    const Complex mi_hbar(0.0, -f.hbar);
    WaveFunction out = w;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double q = w.q(k);
        const Complex psi = w.psi[k];
        const Complex anti = mi_hbar * (2.0 * q * d1[k] + psi);
        const Complex p1 = mi_hbar * d1[k];
        const Complex p2 = -f.hbar * f.hbar * d2[k];
        out.psi[k] = 0.5 * c[0] * q * q * psi + 0.5 * c[1] * anti + 0.5 * c[2] * p2 + c[3] * q * psi + c[4] * p1 -
                     f.force_sigma * psi;
    }
    out.refresh_norm();
    return out;
}

/// H ψ with H = −(ħ²e^{-G}/2m) d²/dq² + ½mω²e^G q² − e^G F q at the frame's time.
inline WaveFunction apply_hamiltonian(const WaveFunction& w, const Scenario& s, double t) {
    const double eG = s.eG(t), w2 = s.omega2(t), F = s.F(t);
    const auto d2 = derivative2(w);
    WaveFunction out = w;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double q = w.q(k);
        out.psi[k] = -s.hbar * s.hbar / (2.0 * s.m * eG) * d2[k] + (0.5 * s.m * w2 * eG * q * q - eG * F * q) * w.psi[k];
    }
    out.refresh_norm();
    return out;
}

/// max over interior slices of ‖iħ∂tψ − Hψ‖/‖ψ‖ with central differences in t.
inline double schrodinger_residual(std::span<const WaveFunction> series, const Scenario& s) {
    if (series.size() < 3) throw Error(ErrorKind::InsufficientSlices, "need at least 3 time slices");
    const double dt = series[1].t - series[0].t;
    if (!(dt > 0.0)) throw Error(ErrorKind::ValidationError, "time slices must increase");
    for (std::size_t k = 1; k < series.size(); ++k) {
        if (std::abs(series[k].t - series[k - 1].t - dt) > 1e-9 * std::max(1.0, std::abs(dt))) {
            throw Error(ErrorKind::ValidationError, "time slices must be uniformly spaced");
        }
    }
    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < series.size(); ++k) {
        const WaveFunction h = apply_hamiltonian(series[k], s, series[k].t);
        WaveFunction r = series[k];
        for (std::size_t i = 0; i < r.size(); ++i) {
            r.psi[i] = Complex(0.0, s.hbar) * (series[k + 1].psi[i] - series[k - 1].psi[i]) / (2.0 * dt) - h.psi[i];
        }
        worst = std::max(worst, l2_norm(r, boundary_cells) / l2_norm(series[k], boundary_cells));
    }
    return worst;
}

/// Moments by grid quadrature; p acts as −iħ d/dq (4th order).
struct GridMoments {
    double norm2 = 0.0;
    double mean_q = 0.0;
    double mean_p = 0.0;
    double var_q = 0.0;
    double var_p = 0.0;
};

inline GridMoments grid_moments(const WaveFunction& w, double hbar) {
    GridMoments g;
    WaveFunction qpsi = w, q2psi = w, ppsi = w, p2psi = w;
    const auto d1 = derivative1(w);
    const auto d2 = derivative2(w);
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double q = w.q(k);
        qpsi.psi[k] = q * w.psi[k];
        q2psi.psi[k] = q * q * w.psi[k];
        ppsi.psi[k] = Complex(0.0, -hbar) * d1[k];
        p2psi.psi[k] = -hbar * hbar * d2[k];
    }
    g.norm2 = inner_product(w, w).real();
    g.mean_q = inner_product(w, qpsi).real() / g.norm2;
    g.mean_p = inner_product(w, ppsi).real() / g.norm2;
    g.var_q = inner_product(w, q2psi).real() / g.norm2 - g.mean_q * g.mean_q;
    g.var_p = inner_product(w, p2psi).real() / g.norm2 - g.mean_p * g.mean_p;
    return g;
}

struct SpectrumEntry {
    int n = 0;
    double eigenvalue = 0.0;
};

/// Ω(n + ½) for n = 0..nmax.
inline std::vector<SpectrumEntry> spectrum(double omega, int nmax) {
    std::vector<SpectrumEntry> out;
    for (int n = 0; n <= nmax; ++n) out.push_back({n, omega * (n + 0.5)});
    return out;
}

inline void write_wavefunction_csv(std::ostream& out, const WaveFunction& w) {
    out << "q,re_psi,im_psi,abs2\n";
    for (std::size_t k = 0; k < w.size(); ++k) {
        const std::array<double, 4> row{w.q(k), w.psi[k].real(), w.psi[k].imag(), std::norm(w.psi[k])};
        write_csv_row(out, row);
    }
}

inline void write_spectrum_csv(std::ostream& out, const std::vector<SpectrumEntry>& entries) {
    out << "n,eigenvalue\n";
    for (const auto& e : entries) out << e.n << ',' << format_number(e.eigenvalue) << '\n';
}

}  // namespace bck
