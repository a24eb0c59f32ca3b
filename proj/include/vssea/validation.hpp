#pragma once

// Brute-force reference solutions and self-checks for the spring models.
// Nothing here shares code paths with the quadrature solver beyond BeamSpec.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "vssea/beam_mechanics.hpp"
#include "vssea/vsam.hpp"

namespace vssea::validation {

struct ShootingResult {
    double tip_slope = 0.0;
    double deflection_x = 0.0;
    double deflection_y = 0.0;
    double root_curvature = 0.0;
};

namespace detail {

struct Elastica {
    double theta;
    double kappa;
    double x_short; // integral of 1 - cos(theta)
    double y;
};

inline Elastica rhs(const Elastica& s, double load)
{
    return {s.kappa, -load * std::cos(s.theta), 1.0 - std::cos(s.theta), std::sin(s.theta)};
}

inline Elastica axpy(const Elastica& a, double h, const Elastica& d)
{
    return {a.theta + h * d.theta, a.kappa + h * d.kappa, a.x_short + h * d.x_short, a.y + h * d.y};
}

/// Integrate theta'' = -load cos(theta) from the clamp with theta'(0) = kappa0.
inline Elastica integrate(double kappa0, double load, double length, int steps)
{
    Elastica s{0.0, kappa0, 0.0, 0.0};
    const double h = length / steps;
    for (int i = 0; i < steps; ++i) {
        const auto k1 = rhs(s, load);
        const auto k2 = rhs(axpy(s, 0.5 * h, k1), load);
        const auto k3 = rhs(axpy(s, 0.5 * h, k2), load);
        const auto k4 = rhs(axpy(s, h, k3), load);
        s.theta += h / 6.0 * (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta + k4.theta);
        s.kappa += h / 6.0 * (k1.kappa + 2.0 * k2.kappa + 2.0 * k3.kappa + k4.kappa);
        s.x_short += h / 6.0 * (k1.x_short + 2.0 * k2.x_short + 2.0 * k3.x_short + k4.x_short);
        s.y += h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
    }
    return s;
}

} // namespace detail

/// Shooting on the root curvature so that the free end carries no moment.
inline ShootingResult shoot_elastica(const beam::BeamSpec& beam, double length, double force,
                                     int steps = 10000)
{
    ShootingResult out;
    if (force <= 0.0) {
        return out;
    }
    const double load = force / beam.flexural_rigidity();
    double lo = 0.0;
    double hi = std::sqrt(2.0 * load);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (detail::integrate(mid, load, length, steps).kappa < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    out.root_curvature = 0.5 * (lo + hi);
    const auto end = detail::integrate(out.root_curvature, load, length, steps);
    out.tip_slope = end.theta;
    out.deflection_x = end.x_short;
    out.deflection_y = end.y;
    return out;
}

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double tolerance = 0.0;
};

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Beam-oracle, small-load, round-trip and gradient checks on `cfg`.
inline std::vector<CheckResult> run_checks(const vsam::VsamConfig& cfg)
{
    using vsam::StiffnessModel;
    std::vector<CheckResult> out;
    auto add = [&](std::string name, double value, double tol) {
        out.push_back({std::move(name), std::isfinite(value) && value <= tol, value, tol});
    };
    const beam::BeamSpec& b = cfg.beam;
    const double ei = b.flexural_rigidity();
    const double x = b.full_length;

    for (double alpha : {0.1, 0.5, 1.0, 2.0}) {
        const double f = alpha * ei / (x * x);
        const auto sol = beam::solve_deflection(b, x, f, cfg.solver);
        const auto ref = shoot_elastica(b, x, f);
        const double worst = std::max({rel_err(sol.tip_slope, ref.tip_slope),
                                       rel_err(sol.deflection_x, ref.deflection_x),
                                       rel_err(sol.deflection_y, ref.deflection_y)});
        char label[64];
        std::snprintf(label, sizeof label, "elastica vs shooting, alpha=%g", alpha);
        add(label, worst, 1e-5);
    }

    {
        const double f = 0.001 * ei / (x * x);
        const auto sol = beam::solve_deflection(b, x, f, cfg.solver);
        add("small-load lateral deflection, alpha=0.001",
            rel_err(sol.deflection_y, f * x * x * x / (3.0 * ei)), 1e-3);
        add("small-load tip slope, alpha=0.001", rel_err(sol.tip_slope, f * x * x / (2.0 * ei)),
            1e-3);
    }

    for (double ratio : {0.05, 0.2, 0.4}) {
        const double d = ratio * x;
        const double f = beam::solve_force_for_deflection(b, x, d, cfg.solver);
        const double back = beam::solve_deflection(b, x, f, cfg.solver).deflection_y;
        char label[64];
        std::snprintf(label, sizeof label, "force/deflection round trip, d/x=%g", ratio);
        add(label, rel_err(back, d), 1e-8);
    }

    {
        // analytic force sensitivities against central differences
        double worst = 0.0;
        for (double ratio : {0.05, 0.2}) {
            const double xr = 0.5 * (cfg.x_min + cfg.x_max);
            const double d = ratio * xr;
            const auto s = beam::force_sensitivity(b, xr, d, cfg.solver);
            const double hd = 1e-6 * d;
            const double fd_d = (beam::solve_force_for_deflection(b, xr, d + hd, cfg.solver) -
                                 beam::solve_force_for_deflection(b, xr, d - hd, cfg.solver)) /
                                (2.0 * hd);
            const double hx = 1e-6 * xr;
            const double fd_x = (beam::solve_force_for_deflection(b, xr + hx, d, cfg.solver) -
                                 beam::solve_force_for_deflection(b, xr - hx, d, cfg.solver)) /
                                (2.0 * hx);
            worst = std::max({worst, rel_err(s.d_force_d_deflection, fd_d),
                              rel_err(s.d_force_d_length, fd_x)});
        }
        add("elastica force gradient vs finite difference", worst, 1e-5);
    }

    {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> pick_x(cfg.x_min, cfg.x_max);
        std::uniform_real_distribution<double> pick_q(-0.95 * cfg.deflection_limit,
                                                      0.95 * cfg.deflection_limit);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const double q2 = vsam::motor_angle_for_roller(cfg, pick_x(rng));
            const double q = pick_q(rng);
            const double h = 1e-5;
            const double fd = (vsam::spring_torque(cfg, StiffnessModel::SmallDeflection, q2, q + h) -
                               vsam::spring_torque(cfg, StiffnessModel::SmallDeflection, q2, q - h)) /
                              (2.0 * h);
            worst = std::max(worst, rel_err(vsam::stiffness(cfg, StiffnessModel::SmallDeflection, q2, q), fd));
        }
        add("small-deflection stiffness vs torque derivative", worst, 1e-6);
    }

    {
        double worst = 0.0;
        for (int i = 0; i < 5; ++i) {
            const double xr = cfg.x_min + (cfg.x_max - cfg.x_min) * i / 4.0;
            const double q2 = vsam::motor_angle_for_roller(cfg, xr);
            worst = std::max(worst, rel_err(vsam::stiffness(cfg, StiffnessModel::LargeDeflection, q2, 0.0),
                                            vsam::stiffness(cfg, StiffnessModel::SmallDeflection, q2, 0.0)));
        }
        add("equilibrium stiffness, large vs small model", worst, 1e-4);
    }
    return out;
}

} // namespace vssea::validation
