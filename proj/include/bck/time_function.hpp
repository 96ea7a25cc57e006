#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bck/error.hpp"

namespace bck {

/// Natural cubic spline through strictly increasing knots. Immutable.
class NaturalCubicSpline {
public:
    NaturalCubicSpline(std::vector<double> t, std::vector<double> y) : t_(std::move(t)), y_(std::move(y)) {
        if (t_.size() != y_.size()) {
            throw Error(ErrorKind::ValidationError, "tabulated function: time and value columns differ in length");
        }
        if (t_.size() < 2) {
            throw Error(ErrorKind::ValidationError, "tabulated function needs at least two samples");
        }
        for (std::size_t i = 1; i < t_.size(); ++i) {
            if (!(t_[i] > t_[i - 1])) {
                throw Error(ErrorKind::ValidationError, "tabulated sample times must be strictly increasing");
            }
        }
        solve_moments();
    }

    double front() const { return t_.front(); }
    double back() const { return t_.back(); }
    const std::vector<double>& times() const { return t_; }
    const std::vector<double>& values() const { return y_; }

    double value(double t) const {
        const auto i = interval(t);
        const double h = t_[i + 1] - t_[i];
        const double b = (t - t_[i]) / h;
        const double a = 1.0 - b;
        return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
    }

    double derivative(double t) const {
        const auto i = interval(t);
        const double h = t_[i + 1] - t_[i];
        const double b = (t - t_[i]) / h;
        const double a = 1.0 - b;
        return (y_[i + 1] - y_[i]) / h - (3.0 * a * a - 1.0) / 6.0 * h * m_[i] + (3.0 * b * b - 1.0) / 6.0 * h * m_[i + 1];
    }

    /// Exact integral of the interpolant over [lo, hi].
    double integral(double lo, double hi) const {
        if (hi < lo) return -integral(hi, lo);
        return primitive(hi) - primitive(lo);
    }

private:
    std::size_t interval(double t) const {
        if (!(t >= t_.front() && t <= t_.back())) {
            throw Error(ErrorKind::OutOfDomain, "tabulated function evaluated outside [" + std::to_string(t_.front()) +
                                                    ", " + std::to_string(t_.back()) + "] at t=" + std::to_string(t));
        }
        auto it = std::upper_bound(t_.begin(), t_.end(), t);
        auto i = static_cast<std::size_t>(std::distance(t_.begin(), it));
        return std::min(i == 0 ? 0 : i - 1, t_.size() - 2);
    }

    // Integral from the first knot to t.
    double primitive(double t) const {
        const auto i = interval(t);
        const double h = t_[i + 1] - t_[i];
        const double b = (t - t_[i]) / h;
        const double ab = 1.0 - b;
        const double part = h * (y_[i] * (b - 0.5 * b * b) + y_[i + 1] * 0.5 * b * b +
                                 h * h / 6.0 *
                                     (m_[i] * (-0.25 * ab * ab * ab * ab + 0.5 * ab * ab - 0.25) +
                                      m_[i + 1] * (0.25 * b * b * b * b - 0.5 * b * b)));
        return cumulative_[i] + part;
    }

    void solve_moments() {
        const std::size_t n = t_.size();
        m_.assign(n, 0.0);
        if (n > 2) {
            // Thomas algorithm on the interior equations, natural ends M_0 = M_{n-1} = 0.
            std::vector<double> c(n, 0.0), d(n, 0.0);
            for (std::size_t i = 1; i + 1 < n; ++i) {
                const double h0 = t_[i] - t_[i - 1];
                const double h1 = t_[i + 1] - t_[i];
                const double rhs = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
                const double diag = 2.0 * (h0 + h1) - (i > 1 ? h0 * c[i - 1] : 0.0);
                c[i] = h1 / diag;
                d[i] = (rhs - (i > 1 ? h0 * d[i - 1] : 0.0)) / diag;
            }
            for (std::size_t i = n - 2; i >= 1; --i) {
                m_[i] = d[i] - c[i] * m_[i + 1];
            }
        }
        cumulative_.assign(n, 0.0);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double h = t_[i + 1] - t_[i];
            cumulative_[i + 1] = cumulative_[i] + h * 0.5 * (y_[i] + y_[i + 1]) - h * h * h / 24.0 * (m_[i] + m_[i + 1]);
        }
    }

    std::vector<double> t_, y_, m_, cumulative_;
};

struct Constant {
    double value = 0.0;
    bool operator==(const Constant&) const = default;
};

/// a + b t
struct Linear {
    double a = 0.0;
    double b = 0.0;
    bool operator==(const Linear&) const = default;
};

/// amplitude * sin(frequency t + phase)
struct Sinusoid {
    double amplitude = 0.0;
    double frequency = 0.0;
    double phase = 0.0;
    bool operator==(const Sinusoid&) const = default;
};

/// amplitude * exp(rate t)
struct Exponential {
    double amplitude = 0.0;
    double rate = 0.0;
    bool operator==(const Exponential&) const = default;
};

struct Tabulated {
    std::shared_ptr<const NaturalCubicSpline> spline;
    std::string source;  // path the samples were read from, if any

    bool operator==(const Tabulated& other) const {
        if (source != other.source) return false;
        if (!spline || !other.spline) return spline == other.spline;
        return spline->times() == other.spline->times() && spline->values() == other.spline->values();
    }
};

/// Real function of time drawn from a closed family of shapes.
class TimeFunction {
public:
    using Variant = std::variant<Constant, Linear, Sinusoid, Exponential, Tabulated>;

    TimeFunction() : f_(Constant{0.0}) {}
    TimeFunction(Constant c) : f_(c) {}
    TimeFunction(Linear l) : f_(l) {}
    TimeFunction(Sinusoid s) : f_(s) {}
    TimeFunction(Exponential e) : f_(e) {}
    TimeFunction(Tabulated t) : f_(std::move(t)) {
        if (!std::get<Tabulated>(f_).spline) {
            throw Error(ErrorKind::ValidationError, "tabulated function without samples");
        }
    }

    static TimeFunction tabulated(std::vector<double> t, std::vector<double> y, std::string source = {}) {
        return TimeFunction(
            Tabulated{std::make_shared<const NaturalCubicSpline>(std::move(t), std::move(y)), std::move(source)});
    }

    const Variant& variant() const { return f_; }

    template <class T>
    bool is() const {
        return std::holds_alternative<T>(f_);
    }

    double operator()(double t) const { return value(t); }

    double value(double t) const {
        return std::visit(
            [t](const auto& f) -> double {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, Constant>) {
                    return f.value;
                } else if constexpr (std::is_same_v<T, Linear>) {
                    return f.a + f.b * t;
                } else if constexpr (std::is_same_v<T, Sinusoid>) {
                    return f.amplitude * std::sin(f.frequency * t + f.phase);
                } else if constexpr (std::is_same_v<T, Exponential>) {
                    return f.amplitude * std::exp(f.rate * t);
                } else {
                    return f.spline->value(t);
                }
            },
            f_);
    }

    double derivative(double t) const {
        return std::visit(
            [t](const auto& f) -> double {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, Constant>) {
                    return 0.0;
                } else if constexpr (std::is_same_v<T, Linear>) {
                    return f.b;
                } else if constexpr (std::is_same_v<T, Sinusoid>) {
                    return f.amplitude * f.frequency * std::cos(f.frequency * t + f.phase);
                } else if constexpr (std::is_same_v<T, Exponential>) {
                    return f.amplitude * f.rate * std::exp(f.rate * t);
                } else {
                    return f.spline->derivative(t);
                }
            },
            f_);
    }

    /// Exact integral over [lo, hi].
    double integral(double lo, double hi) const {
        return std::visit(
            [lo, hi](const auto& f) -> double {
                using T = std::decay_t<decltype(f)>;
                const double span = hi - lo;
                if constexpr (std::is_same_v<T, Constant>) {
                    return f.value * span;
                } else if constexpr (std::is_same_v<T, Linear>) {
                    return f.a * span + 0.5 * f.b * span * (hi + lo);
                } else if constexpr (std::is_same_v<T, Sinusoid>) {
                    if (f.frequency == 0.0) return f.amplitude * std::sin(f.phase) * span;
                    const double mid = 0.5 * f.frequency * (hi + lo) + f.phase;
                    return 2.0 * f.amplitude / f.frequency * std::sin(mid) * std::sin(0.5 * f.frequency * span);
                } else if constexpr (std::is_same_v<T, Exponential>) {
                    if (f.rate == 0.0) return f.amplitude * span;
                    return f.amplitude * std::exp(f.rate * lo) * std::expm1(f.rate * span) / f.rate;
                } else {
                    return f.spline->integral(lo, hi);
                }
            },
            f_);
    }

    bool operator==(const TimeFunction& other) const { return f_ == other.f_; }

private:
    Variant f_;
};

inline double eval_time_function(const TimeFunction& f, double t) { return f.value(t); }

}  // namespace bck
