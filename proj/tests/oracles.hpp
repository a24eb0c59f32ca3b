#pragma once

// Independent reference computations used only by the tests.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

struct Elastica {
    double tip_slope;
    double dx;
    double dy;
};

/// Secant shooting on theta'(0) for theta'' = -(F/EI) cos(theta), theta(0) = 0,
/// theta'(L) = 0, integrated with a fixed-step RK4 over (theta, theta', x, y).
inline Elastica shoot(double ei, double length, double force, int steps = 10000)
{
    const double w = force / ei;
    auto run = [&](double k0, std::array<double, 4>& end) {
        std::array<double, 4> y{0.0, k0, 0.0, 0.0}; // theta, kappa, x, y
        auto f = [&](const std::array<double, 4>& s) {
            return std::array<double, 4>{s[1], -w * std::cos(s[0]), std::cos(s[0]), std::sin(s[0])};
        };
        const double h = length / steps;
        for (int i = 0; i < steps; ++i) {
            auto a = f(y);
            std::array<double, 4> t{};
            for (int j = 0; j < 4; ++j) t[j] = y[j] + 0.5 * h * a[j];
            auto b = f(t);
            for (int j = 0; j < 4; ++j) t[j] = y[j] + 0.5 * h * b[j];
            auto c = f(t);
            for (int j = 0; j < 4; ++j) t[j] = y[j] + h * c[j];
            auto d = f(t);
            for (int j = 0; j < 4; ++j) y[j] += h / 6.0 * (a[j] + 2 * b[j] + 2 * c[j] + d[j]);
        }
        end = y;
        return y[1];
    };
    // Linear-theory start, then secant with a bisection guard.
    double lo = 0.0;
    double hi = std::sqrt(2.0 * w);
    double k0 = w * length;
    double k1 = 1.01 * k0;
    std::array<double, 4> end{};
    double r0 = run(k0, end);
    double r1 = run(k1, end);
    for (int it = 0; it < 100; ++it) {
        if (r0 < 0.0) lo = std::max(lo, k0); else hi = std::min(hi, k0);
        if (r1 < 0.0) lo = std::max(lo, k1); else hi = std::min(hi, k1);
        double k2 = k1 - r1 * (k1 - k0) / (r1 - r0);
        if (!(k2 > lo && k2 < hi)) k2 = 0.5 * (lo + hi);
        k0 = k1;
        r0 = r1;
        k1 = k2;
        r1 = run(k1, end);
        if (std::abs(r1) < 1e-14 * std::sqrt(w) || hi - lo < 1e-15 * hi) break;
    }
    run(k1, end);
    return {end[0], length - end[2], end[3]};
}

/// Trapezoid rule with n uniform steps.
inline double trapezoid(const std::function<double(double)>& f, double a, double b, int n)
{
    const double h = (b - a) / n;
    double s = 0.5 * (f(a) + f(b));
    for (int i = 1; i < n; ++i) s += f(a + i * h);
    return s * h;
}

/// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Small-deflection spring stage, written out from the cantilever law:
/// n springs, each pushed a lateral distance 2 r sin(q/2) at span x.
struct LinearStage {
    double ei;
    double r;
    int n;

    double torque(double x, double q) const
    {
        const double d = 2.0 * r * std::sin(q / 2.0);
        const double f = 3.0 * ei * d / (x * x * x);
        return n * f * r;
    }
    double stiffness(double x, double q) const { return 3.0 * n * ei * r * r * std::cos(q / 2.0) / (x * x * x); }
};

/// Positive work motor 2 does when its angle follows q(t) exactly, from the
/// row J q'' + b q' + load(q) = tau.
inline double prescribed_cost(double j, double b, const std::function<double(double)>& load,
                              const std::function<std::array<double, 3>(double)>& traj, double t_end, int n)
{
    auto power = [&](double t) {
        const auto s = traj(t); // q, qd, qdd
        const double tau = j * s[2] + b * s[1] + load(s[0]);
        return std::max(tau * s[1], 0.0);
    };
    return trapezoid(power, 0.0, t_end, n);
}

} // namespace oracle
