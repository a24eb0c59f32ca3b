#pragma once

// Planar large-deflection (elastica) model of a cantilevered leaf spring loaded
// by a lateral roller force at arc length x_r from the clamp, plus the linear
// small-deflection limit.
//
// With s = sin(phi_r) and the change of variables sin(phi) = s (1 - t^2), the
// arc-length, lateral and axial quadratures become smooth integrals over
// t in [0, 1]:
//
//   S       = sqrt(EI / 2F) * G(s),  G = 2 sqrt(s) int dt / c(t)
//   delta_y = sqrt(EI / 2F) * Y(s),  Y = 2 sqrt(s) int s (1 - t^2) / c(t) dt
//   delta_x = sqrt(EI / 2F) * D(s),  D = 2 sqrt(s) int (1 - c) / c dt
//
// where c(t) = cos(phi) = sqrt(1 - s^2 (1 - t^2)^2) >= cos(phi_r) > 0.

#include <cmath>
#include <algorithm>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include "vssea/errors.hpp"
#include "vssea/quadrature.hpp"

namespace vssea::beam {

struct BeamSpec {
    double youngs_modulus = 200e9; // Pa
    double area_moment = 1e-11;    // m^4
    double full_length = 0.1;      // m

    double flexural_rigidity() const noexcept { return youngs_modulus * area_moment; }

    void validate() const
    {
        if (!(youngs_modulus > 0.0) || !(area_moment > 0.0) || !(full_length > 0.0)) {
            throw PreconditionViolation("BeamSpec: E, I and L must be strictly positive");
        }
    }
};

struct SolverSettings {
    double residual_tol = 1e-10;
    int max_iterations = 200;
    int quadrature_points = 64;

    void validate() const
    {
        if (!(residual_tol > 0.0)) {
            throw PreconditionViolation("SolverSettings: residual_tol must be > 0");
        }
        if (max_iterations < 1) {
            throw PreconditionViolation("SolverSettings: max_iterations must be >= 1");
        }
        if (quadrature_points < 16) {
            throw PreconditionViolation("SolverSettings: quadrature_points must be >= 16");
        }
    }
};

struct ElasticaSolution {
    double tip_slope = 0.0;        // rad
    double deflection_x = 0.0;     // m, axial shortening of the loaded span
    double deflection_y = 0.0;     // m, lateral deflection at the roller
    double applied_force = 0.0;    // N
    double effective_length = 0.0; // m
};

/// Force together with its partial derivatives at fixed geometry.
struct ForceSensitivity {
    double force = 0.0;
    double d_force_d_deflection = 0.0; // N/m at fixed effective length
    double d_force_d_length = 0.0;     // N/m at fixed deflection
};

/// Upper end of the slope bracket; the elastica integrals diverge at pi/2.
inline constexpr double slope_margin = 1e-6;
inline constexpr double max_slope = std::numbers::pi / 2.0 - slope_margin;

namespace detail {

struct Integrals {
    double G = 0.0;
    double Y = 0.0;
    double D = 0.0;
    double G_s = 0.0; // dG/ds
    double Y_s = 0.0; // dY/ds
};

inline Integrals integrals(double slope, int points, bool with_derivatives = false)
{
    Integrals out;
    const double s = std::sin(slope);
    if (s <= 0.0) {
        return out;
    }
    const auto& rule = quadrature::gauss_legendre(points);
    double sum_g = 0.0;
    double sum_y = 0.0;
    double sum_d = 0.0;
    double sum_gs = 0.0;
    double sum_ys = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double t = rule.nodes[i];
        const double w = rule.weights[i];
        const double u = 1.0 - t * t;
        const double su = s * u;
        const double c = std::sqrt((1.0 - su) * (1.0 + su));
        sum_g += w / c;
        sum_y += w * u / c;
        sum_d += w * su * su / (c * (1.0 + c));
        if (with_derivatives) {
            const double c3 = c * c * c;
            sum_gs += w * s * u * u / c3;
            sum_ys += w * s * u * u * u / c3;
        }
    }
    const double root_s = std::sqrt(s);
    out.G = 2.0 * root_s * sum_g;
    out.Y = 2.0 * root_s * s * sum_y;
    out.D = 2.0 * root_s * sum_d;
    if (with_derivatives) {
        out.G_s = out.G / (2.0 * s) + 2.0 * root_s * sum_gs;
        out.Y_s = 1.5 * out.Y / s + 2.0 * root_s * s * sum_ys;
    }
    return out;
}

/// Bracketed root of an increasing function: regula falsi with the Illinois
/// modification, falling back to bisection when the bracket stops shrinking.
/// `converged(x, fx)` decides termination on the caller's relative residual.
inline double bracketed_root(const std::function<double(double)>& f,
                             const std::function<bool(double, double)>& converged,
                             double lo,
                             double f_lo,
                             double hi,
                             double f_hi,
                             int max_iterations,
                             const char* what)
{
    double side_weight_lo = 1.0;
    double side_weight_hi = 1.0;
    int last_side = 0;
    double width_before = hi - lo;
    for (int it = 0; it < max_iterations; ++it) {
        double x = (lo * f_hi * side_weight_hi - hi * f_lo * side_weight_lo) /
                   (f_hi * side_weight_hi - f_lo * side_weight_lo);
        if (!(x > lo && x < hi) || (it % 3 == 2 && (hi - lo) > 0.5 * width_before)) {
            x = 0.5 * (lo + hi);
        }
        if (it % 3 == 2) {
            width_before = hi - lo;
        }
        const double fx = f(x);
        if (!std::isfinite(fx)) {
            throw QuadratureFailure(std::string(what) + ": non-finite residual");
        }
        if (converged(x, fx)) {
            return x;
        }
        if (fx < 0.0) {
            lo = x;
            f_lo = fx;
            side_weight_lo = 1.0;
            if (last_side == -1) {
                side_weight_hi *= 0.5;
            }
            last_side = -1;
        } else {
            hi = x;
            f_hi = fx;
            side_weight_hi = 1.0;
            if (last_side == 1) {
                side_weight_lo *= 0.5;
            }
            last_side = 1;
        }
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
            const double mid = 0.5 * (lo + hi);
            if (converged(mid, f(mid))) {
                return mid;
            }
            break;
        }
    }
    throw NoConvergence(std::string(what) + ": residual tolerance not met");
}

inline void check_length(const BeamSpec& beam, double effective_length)
{
    beam.validate();
    if (!(effective_length > 0.0) || effective_length > beam.full_length) {
        throw PreconditionViolation("effective length must lie in (0, full_length]");
    }
}

} // namespace detail

/// Tip slope phi_r of the elastica carrying lateral end load `force` over the
/// span `effective_length`.
inline double solve_tip_slope(const BeamSpec& beam,
                              double effective_length,
                              double force,
                              const SolverSettings& settings = {})
{
    detail::check_length(beam, effective_length);
    settings.validate();
    if (!(force >= 0.0)) {
        throw PreconditionViolation("solve_tip_slope: force must be >= 0");
    }
    if (force == 0.0) {
        return 0.0;
    }
    const int n = settings.quadrature_points;
    // S(phi) = x_r  <=>  G(phi) = sqrt(2 alpha), alpha = F x_r^2 / EI
    const double alpha = force * effective_length * effective_length / beam.flexural_rigidity();
    const double target = std::sqrt(2.0 * alpha);
    const double g_hi = detail::integrals(max_slope, n).G;
    if (!(g_hi >= target)) {
        throw SlopeOutOfRange("solve_tip_slope: load exceeds the elastica range (phi -> pi/2)");
    }
    // G^2 is ~linear near phi = 0, which keeps the secant steps well scaled.
    auto residual = [&](double phi) {
        const double g = detail::integrals(phi, n).G;
        return g * g - target * target;
    };
    auto converged = [&](double, double r) {
        const double g = std::sqrt(std::max(0.0, r + target * target));
        return std::abs(g / target - 1.0) <= settings.residual_tol;
    };
    return detail::bracketed_root(residual, converged, 0.0, -target * target, max_slope,
                                  g_hi * g_hi - target * target, settings.max_iterations,
                                  "solve_tip_slope");
}

inline ElasticaSolution solve_deflection(const BeamSpec& beam,
                                         double effective_length,
                                         double force,
                                         const SolverSettings& settings = {})
{
    ElasticaSolution sol;
    sol.applied_force = force;
    sol.effective_length = effective_length;
    sol.tip_slope = solve_tip_slope(beam, effective_length, force, settings);
    if (sol.tip_slope == 0.0) {
        return sol;
    }
    const auto q = detail::integrals(sol.tip_slope, settings.quadrature_points);
    // The common prefactor sqrt(EI/2F) equals x_r / G at the root.
    sol.deflection_y = effective_length * q.Y / q.G;
    sol.deflection_x = effective_length * q.D / q.G;
    if (!std::isfinite(sol.deflection_x) || !std::isfinite(sol.deflection_y)) {
        throw QuadratureFailure("solve_deflection: non-finite deflection");
    }
    return sol;
}

namespace detail {

/// Tip slope whose deflection ratio Y/G equals `ratio`.
inline double slope_for_deflection_ratio(double ratio, const SolverSettings& settings)
{
    const int n = settings.quadrature_points;
    const auto top = integrals(max_slope, n);
    const double h_hi = top.Y / top.G;
    if (!(h_hi >= ratio)) {
        throw DeflectionUnreachable(
            "solve_force_for_deflection: target exceeds the maximum elastica deflection");
    }
    auto residual = [&](double phi) {
        const auto q = integrals(phi, n);
        return q.Y / q.G - ratio;
    };
    auto converged = [&](double, double r) {
        return std::abs(r / ratio) <= settings.residual_tol;
    };
    return bracketed_root(residual, converged, 0.0, -ratio, max_slope, h_hi - ratio,
                          settings.max_iterations, "solve_force_for_deflection");
}

} // namespace detail

/// Inverse problem: the elastica whose lateral deflection at x_r equals
/// `target_dy`. Returns the full solution, including the required force.
inline ElasticaSolution solve_for_deflection(const BeamSpec& beam,
                                             double effective_length,
                                             double target_dy,
                                             const SolverSettings& settings = {})
{
    detail::check_length(beam, effective_length);
    settings.validate();
    if (!(target_dy >= 0.0) || !(target_dy < effective_length)) {
        throw PreconditionViolation("solve_force_for_deflection: need 0 <= target_dy < x_r");
    }
    ElasticaSolution sol;
    sol.effective_length = effective_length;
    if (target_dy == 0.0) {
        return sol;
    }
    sol.tip_slope = detail::slope_for_deflection_ratio(target_dy / effective_length, settings);
    const auto q = detail::integrals(sol.tip_slope, settings.quadrature_points);
    sol.applied_force =
        beam.flexural_rigidity() * q.G * q.G / (2.0 * effective_length * effective_length);
    sol.deflection_y = effective_length * q.Y / q.G;
    sol.deflection_x = effective_length * q.D / q.G;
    return sol;
}

/// Lateral roller force producing lateral deflection `target_dy` at x_r.
inline double solve_force_for_deflection(const BeamSpec& beam,
                                         double effective_length,
                                         double target_dy,
                                         const SolverSettings& settings = {})
{
    return solve_for_deflection(beam, effective_length, target_dy, settings).applied_force;
}

/// Linear cantilever end-load law F = 3 E I d / x_r^3.
inline double small_deflection_force(const BeamSpec& beam, double effective_length, double target_dy)
{
    if (!(effective_length > 0.0)) {
        throw PreconditionViolation("small_deflection_force: effective length must be > 0");
    }
    return 3.0 * beam.flexural_rigidity() * target_dy /
           (effective_length * effective_length * effective_length);
}

/// Elastica force and its sensitivities to deflection and span. Uses the
/// scaling F(x, d) = EI / x^2 f(d / x), so dF/dx = -(2F + d dF/dd) / x.
inline ForceSensitivity force_sensitivity(const BeamSpec& beam,
                                          double effective_length,
                                          double target_dy,
                                          const SolverSettings& settings = {})
{
    detail::check_length(beam, effective_length);
    settings.validate();
    if (!(target_dy >= 0.0) || !(target_dy < effective_length)) {
        throw PreconditionViolation("force_sensitivity: need 0 <= target_dy < x_r");
    }
    const double ei = beam.flexural_rigidity();
    const double x = effective_length;
    ForceSensitivity out;
    if (target_dy == 0.0) {
        out.d_force_d_deflection = 3.0 * ei / (x * x * x);
        return out;
    }
    const double phi = detail::slope_for_deflection_ratio(target_dy / x, settings);
    const auto q = detail::integrals(phi, settings.quadrature_points, true);
    out.force = ei * q.G * q.G / (2.0 * x * x);
    const double df_ds = ei * q.G * q.G_s / (x * x);
    const double dratio_ds = (q.Y_s * q.G - q.Y * q.G_s) / (q.G * q.G);
    out.d_force_d_deflection = df_ds / (x * dratio_ds);
    out.d_force_d_length = -(2.0 * out.force + target_dy * out.d_force_d_deflection) / x;
    return out;
}

} // namespace vssea::beam
