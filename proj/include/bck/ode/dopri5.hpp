#pragma once

// Dormand-Prince 5(4) with PI step-size control and the 4th-order continuous
// extension of Hairer, Nørsett & Wanner (contd5). One kernel serves every
// system in the library; complex systems are passed as interleaved re/im pairs.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bck/error.hpp"
#include "bck/scenario.hpp"

namespace bck::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct SolverStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evaluations = 0;
};

/// Accepted steps of an integration plus per-interval interpolation data.
template <std::size_t N>
class DenseSolution {
public:
    static constexpr std::size_t dimension = N;

    const std::vector<double>& times() const { return t_; }
    const std::vector<State<N>>& states() const { return y_; }
    const SolverStats& stats() const { return stats_; }
    double front() const { return t_.front(); }
    double back() const { return t_.back(); }
    std::size_t size() const { return t_.size(); }

    State<N> value(double t) const {
        const auto [i, theta] = locate(t);
        if (theta == 0.0) return y_[i];
        if (theta == 1.0) return y_[i + 1];
        const auto& r = coeff_[i];
        const double theta1 = 1.0 - theta;
        State<N> out;
        for (std::size_t k = 0; k < N; ++k) {
            out[k] = y_[i][k] + theta * (r[0][k] + theta1 * (r[1][k] + theta * (r[2][k] + theta1 * r[3][k])));
        }
        return out;
    }

    /// Time derivative of the interpolating polynomial.
    State<N> derivative(double t) const {
        const auto [i, theta] = locate(t);
        const auto& r = coeff_[i];
        const double h = t_[i + 1] - t_[i];
        const double theta1 = 1.0 - theta;
        State<N> out;
        for (std::size_t k = 0; k < N; ++k) {
            const double d = r[0][k] + (1.0 - 2.0 * theta) * r[1][k] + theta * (2.0 - 3.0 * theta) * r[2][k] +
                             2.0 * theta * theta1 * (1.0 - 2.0 * theta) * r[3][k];
            out[k] = d / h;
        }
        return out;
    }

    /// Index of the accepted step at or left of t.
    std::size_t step_index(double t) const { return locate(t).first; }

    // construction (used by integrate)
    void push_first(double t, const State<N>& y) {
        t_.push_back(t);
        y_.push_back(y);
    }
    void push_step(double t, const State<N>& y, const std::array<State<N>, 4>& coeff) {
        t_.push_back(t);
        y_.push_back(y);
        coeff_.push_back(coeff);
    }
    SolverStats& mutable_stats() { return stats_; }

private:
    std::pair<std::size_t, double> locate(double t) const {
        const double slack = 1e-12 * std::max(1.0, std::abs(t_.back() - t_.front()));
        if (t < t_.front() - slack || t > t_.back() + slack || t_.size() < 2) {
            throw Error(ErrorKind::OutOfDomain, "dense output requested at t=" + std::to_string(t) +
                                                    " outside [" + std::to_string(t_.front()) + ", " +
                                                    std::to_string(t_.back()) + "]");
        }
        t = std::clamp(t, t_.front(), t_.back());
        auto it = std::upper_bound(t_.begin(), t_.end(), t);
        std::size_t i = it == t_.begin() ? 0 : static_cast<std::size_t>(std::distance(t_.begin(), it)) - 1;
        if (i >= t_.size() - 1) i = t_.size() - 2;
        if (t == t_[i]) return {i, 0.0};
        if (t == t_[i + 1]) return {i, 1.0};
        return {i, (t - t_[i]) / (t_[i + 1] - t_[i])};
    }

    std::vector<double> t_;
    std::vector<State<N>> y_;
    std::vector<std::array<State<N>, 4>> coeff_;
    SolverStats stats_;
};

struct StepControl {
    double rtol = 1e-10;
    double atol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 5'000'000;
};

inline StepControl step_control(const Scenario& s) {
    return StepControl{s.integrator.rtol, s.integrator.atol, s.resolved_max_step()};
}

namespace tableau {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                        a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                        d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                        d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
}  // namespace tableau

/// Integrates y' = rhs(t, y) from t0 to t1. Every time in `stops` that lies inside
/// (t0, t1) becomes an accepted step point. Throws StepSizeUnderflow if the
/// controller stalls.
template <std::size_t N, class Rhs>
DenseSolution<N> integrate(Rhs&& rhs, double t0, double t1, const State<N>& y0, const StepControl& ctl,
                           std::span<const double> stops = {}) {
    using namespace tableau;
    if (!(t1 > t0)) throw Error(ErrorKind::ValidationError, "integration window must satisfy t1 > t0");

    std::vector<double> pending;
    for (double s : stops) {
        if (s > t0 && s < t1) pending.push_back(s);
    }
    pending.push_back(t1);
    std::sort(pending.begin(), pending.end());
    pending.erase(std::unique(pending.begin(), pending.end()), pending.end());
    std::size_t next_stop = 0;

    DenseSolution<N> sol;
    auto& stats = sol.mutable_stats();
    sol.push_first(t0, y0);

    auto f = [&](double t, const State<N>& y) {
        ++stats.rhs_evaluations;
        return rhs(std::min(t, t1), y);
    };
    auto scale = [&](double a, double b) { return ctl.atol + ctl.rtol * std::max(std::abs(a), std::abs(b)); };

    State<N> y = y0;
    State<N> k1 = f(t0, y);
    double t = t0;
    const double hmax = std::min(ctl.max_step, t1 - t0);

    // initial step (Hairer's hinit, order 5)
    double h = 0.0;
    {
        double dnf = 0.0, dny = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sk = scale(y[i], y[i]);
            dnf += (k1[i] / sk) * (k1[i] / sk);
            dny += (y[i] / sk) * (y[i] / sk);
        }
        h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
        h = std::min(h, hmax);
        State<N> y1;
        for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + h * k1[i];
        const State<N> f1 = f(t + h, y1);
        double der2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sk = scale(y[i], y[i]);
            der2 += ((f1[i] - k1[i]) / sk) * ((f1[i] - k1[i]) / sk);
        }
        der2 = std::sqrt(der2) / h;
        const double der12 = std::max(der2, std::sqrt(dnf));
        const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
        h = std::min({100.0 * h, h1, hmax});
    }

    constexpr double safe = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75;
    constexpr double facc1 = 1.0 / 0.2, facc2 = 1.0 / 10.0;
    double facold = 1e-4;
    bool last_rejected = false;

    State<N> k2, k3, k4, k5, k6, k7, ytmp, ynew;
    while (t < t1) {
        if (stats.accepted + stats.rejected > ctl.max_steps) {
            throw Error(ErrorKind::StepSizeUnderflow, "step budget exhausted at t=" + std::to_string(t));
        }
        const double target = pending[next_stop];
        bool hits_stop = false;
        if (t + 1.01 * h >= target) {
            h = target - t;
            hits_stop = true;
        }
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
            throw Error(ErrorKind::StepSizeUnderflow, "step size underflow at t=" + std::to_string(t));
        }

        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
        k2 = f(t + c2 * h, ytmp);
        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        k3 = f(t + c3 * h, ytmp);
        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = f(t + c4 * h, ytmp);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = f(t + c5 * h, ytmp);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        const double tnew = hits_stop ? target : t + h;
        k6 = f(tnew, ytmp);
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        k7 = f(tnew, ynew);

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sk = scale(y[i], ynew[i]);
            err += (e / sk) * (e / sk);
        }
        err = std::sqrt(err / static_cast<double>(N));
        if (!std::isfinite(err)) {
            ++stats.rejected;
            h *= 0.1;
            last_rejected = true;
            continue;
        }

        const double fac11 = std::pow(err, expo1);
        if (err <= 1.0) {
            std::array<State<N>, 4> coeff;
            for (std::size_t i = 0; i < N; ++i) {
                const double dy = ynew[i] - y[i];
                const double bspl = h * k1[i] - dy;
                coeff[0][i] = dy;
                coeff[1][i] = bspl;
                coeff[2][i] = dy - h * k7[i] - bspl;
                coeff[3][i] =
                    h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
            }
            double fac = fac11 / std::pow(facold, beta);
            fac = std::max(facc2, std::min(facc1, fac / safe));
            double hnew = h / fac;
            facold = std::max(err, 1e-4);
            if (last_rejected) hnew = std::min(hnew, h);
            last_rejected = false;

            ++stats.accepted;
            t = tnew;
            y = ynew;
            k1 = k7;
            sol.push_step(t, y, coeff);
            if (hits_stop) ++next_stop;
            h = std::min(hnew, hmax);
        } else {
            ++stats.rejected;
            h /= std::min(facc1, fac11 / safe);
            last_rejected = true;
        }
    }
    return sol;
}

}  // namespace bck::ode
