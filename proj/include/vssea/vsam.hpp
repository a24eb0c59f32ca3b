#pragma once

// Variable stiffness actuation mechanism: spring_count radially distributed
// leaf springs, each engaged by a roller at effective length x_r set by the
// ball screw driven from motor 2 (x_r = eta q_m2, eta = lead / 2 pi). The link
// deflection relative to the gear output bends every spring identically.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vssea/beam_mechanics.hpp"
#include "vssea/errors.hpp"
#include "vssea/quadrature.hpp"

namespace vssea::vsam {

enum class StiffnessModel { LargeDeflection, SmallDeflection };

inline const char* to_string(StiffnessModel m)
{
    return m == StiffnessModel::LargeDeflection ? "large" : "small";
}

/// Which span length enters the small-deflection slope phi = F_y l^2 / 2EI.
enum class SlopeSpan { EffectiveLength, FullLength };

inline constexpr double degrees = std::numbers::pi / 180.0;

struct VsamConfig {
    beam::BeamSpec beam{200e9, 1.0e-11, 0.1};
    int spring_count = 8;
    double moment_arm = 0.015; // m
    double screw_lead = 0.01;  // m
    double x_min = 0.02;       // m
    double x_max = 0.1;        // m
    double deflection_limit = 25.0 * degrees;
    beam::SolverSettings solver{};

    double eta() const noexcept { return screw_lead / (2.0 * std::numbers::pi); }

    void validate() const
    {
        beam.validate();
        solver.validate();
        if (spring_count < 1) {
            throw PreconditionViolation("VsamConfig: spring_count must be >= 1");
        }
        if (!(moment_arm > 0.0)) {
            throw PreconditionViolation("VsamConfig: moment_arm must be > 0");
        }
        if (!(screw_lead > 0.0)) {
            throw PreconditionViolation("VsamConfig: screw_lead must be > 0");
        }
        if (!(x_min > 0.0) || !(x_min < x_max) || !(x_max <= beam.full_length)) {
            throw PreconditionViolation("VsamConfig: need 0 < x_min < x_max <= full_length");
        }
        if (!(deflection_limit > 0.0) || !(deflection_limit < std::numbers::pi / 2.0)) {
            throw PreconditionViolation("VsamConfig: deflection_limit must lie in (0, pi/2)");
        }
    }
};

struct RollerPosition {
    double x = 0.0;
    bool clamped = false;
};

inline RollerPosition roller_position(const VsamConfig& cfg, double q_m2)
{
    const double raw = cfg.eta() * q_m2;
    RollerPosition out;
    out.x = std::clamp(raw, cfg.x_min, cfg.x_max);
    out.clamped = out.x != raw;
    return out;
}

/// Motor-2 angle that places the roller at x (inverse of the screw map).
inline double motor_angle_for_roller(const VsamConfig& cfg, double x) { return x / cfg.eta(); }

namespace detail {

inline void check_deflection(const VsamConfig& cfg, double q_rel)
{
    if (!(std::abs(q_rel) <= cfg.deflection_limit)) {
        throw DeflectionLimitExceeded("link deflection outside the +/- deflection limit");
    }
}

inline double sign(double v) { return (v > 0.0) - (v < 0.0); }

inline double lateral_deflection(const VsamConfig& cfg, double q_rel)
{
    return 2.0 * cfg.moment_arm * std::sin(q_rel / 2.0) * std::cos(q_rel);
}

inline double small_torque(const VsamConfig& cfg, double x, double q_rel)
{
    const double r = cfg.moment_arm;
    return 6.0 * cfg.spring_count * cfg.beam.flexural_rigidity() * r * r * std::sin(q_rel / 2.0) /
           (x * x * x);
}

inline double large_torque(const VsamConfig& cfg, double x, double q_rel)
{
    const double dy = std::abs(lateral_deflection(cfg, q_rel));
    const double f = beam::solve_force_for_deflection(cfg.beam, x, dy, cfg.solver);
    return sign(q_rel) * cfg.spring_count * f * cfg.moment_arm;
}

/// Spring torque at roller position x with no deflection-limit check.
inline double torque_at(const VsamConfig& cfg, StiffnessModel model, double x, double q_rel)
{
    return model == StiffnessModel::SmallDeflection ? small_torque(cfg, x, q_rel)
                                                    : large_torque(cfg, x, q_rel);
}

inline double small_energy(const VsamConfig& cfg, double x, double q_rel)
{
    const double r = cfg.moment_arm;
    return 12.0 * cfg.spring_count * cfg.beam.flexural_rigidity() * r * r *
           (1.0 - std::cos(q_rel / 2.0)) / (x * x * x);
}

inline constexpr int energy_panels = 64;
inline constexpr int load_nodes = 16;

inline double energy_at(const VsamConfig& cfg, StiffnessModel model, double x, double q_rel)
{
    if (model == StiffnessModel::SmallDeflection) {
        return small_energy(cfg, x, q_rel);
    }
    if (q_rel == 0.0) {
        return 0.0;
    }
    return quadrature::simpson([&](double q) { return torque_at(cfg, model, x, q); }, 0.0, q_rel,
                               energy_panels);
}

/// d tau_s / d x_r at fixed link deflection.
inline double torque_length_derivative(const VsamConfig& cfg, StiffnessModel model, double x,
                                       double q_rel)
{
    if (model == StiffnessModel::SmallDeflection) {
        return -3.0 * small_torque(cfg, x, q_rel) / x;
    }
    const double dy = std::abs(lateral_deflection(cfg, q_rel));
    const auto sens = beam::force_sensitivity(cfg.beam, x, dy, cfg.solver);
    return sign(q_rel) * cfg.spring_count * cfg.moment_arm * sens.d_force_d_length;
}

/// d U / d x_r at fixed link deflection.
inline double energy_length_derivative(const VsamConfig& cfg, StiffnessModel model, double x,
                                       double q_rel)
{
    if (model == StiffnessModel::SmallDeflection) {
        return -3.0 * small_energy(cfg, x, q_rel) / x;
    }
    const double span = std::abs(q_rel);
    if (span == 0.0) {
        return 0.0;
    }
    const auto& rule = quadrature::gauss_legendre(load_nodes);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        sum += rule.weights[i] * torque_length_derivative(cfg, model, x, span * rule.nodes[i]);
    }
    return sum * span;
}

} // namespace detail

/// Lateral spring deflection at the roller, 2 r sin(q/2) cos(q).
inline double spring_deflection(const VsamConfig& cfg, double q_rel)
{
    detail::check_deflection(cfg, q_rel);
    return detail::lateral_deflection(cfg, q_rel);
}

/// Total spring torque on the link for link deflection q_rel = q_l - q_g.
inline double spring_torque(const VsamConfig& cfg, StiffnessModel model, double q_m2, double q_rel)
{
    detail::check_deflection(cfg, q_rel);
    return detail::torque_at(cfg, model, roller_position(cfg, q_m2).x, q_rel);
}

inline constexpr double stiffness_fd_step = 1e-5;

/// Tangent torsional stiffness d tau_s / d q_rel.
inline double stiffness(const VsamConfig& cfg, StiffnessModel model, double q_m2, double q_rel)
{
    detail::check_deflection(cfg, q_rel);
    const double x = roller_position(cfg, q_m2).x;
    if (model == StiffnessModel::SmallDeflection) {
        const double r = cfg.moment_arm;
        return 3.0 * cfg.spring_count * cfg.beam.flexural_rigidity() * r * r *
               std::cos(q_rel / 2.0) / (x * x * x);
    }
    const double h = stiffness_fd_step;
    return (detail::torque_at(cfg, model, x, q_rel + h) -
            detail::torque_at(cfg, model, x, q_rel - h)) /
           (2.0 * h);
}

/// Reaction torque of the deflected springs on the stiffness motor, built from
/// the roller's axial force F_x = F_y tan(phi) times the moment arm. Carries
/// the sign of the deflection and vanishes at equilibrium.
inline double disturbance_torque(const VsamConfig& cfg, StiffnessModel model, double q_m2,
                                 double q_rel, SlopeSpan span = SlopeSpan::EffectiveLength)
{
    detail::check_deflection(cfg, q_rel);
    if (q_rel == 0.0) {
        return 0.0;
    }
    const double x = roller_position(cfg, q_m2).x;
    const double r = cfg.moment_arm;
    if (model == StiffnessModel::SmallDeflection) {
        const double ei = cfg.beam.flexural_rigidity();
        const double fy = beam::small_deflection_force(cfg.beam, x, 2.0 * r * std::sin(std::abs(q_rel) / 2.0));
        const double l = span == SlopeSpan::EffectiveLength ? x : cfg.beam.full_length;
        const double phi = fy * l * l / (2.0 * ei);
        return detail::small_torque(cfg, x, q_rel) * std::tan(phi);
    }
    const double dy = std::abs(detail::lateral_deflection(cfg, q_rel));
    const auto sol = beam::solve_for_deflection(cfg.beam, x, dy, cfg.solver);
    return detail::sign(q_rel) * cfg.spring_count * sol.applied_force * std::tan(sol.tip_slope) * r;
}

/// Elastic energy held by the springs, the integral of tau_s over [0, q_rel].
inline double stored_energy(const VsamConfig& cfg, StiffnessModel model, double q_m2, double q_rel)
{
    detail::check_deflection(cfg, q_rel);
    return detail::energy_at(cfg, model, roller_position(cfg, q_m2).x, q_rel);
}

/// dU/dq_m2: the torque motor 2 has to supply to hold the roller against the
/// springs (negative values mean the springs push the roller toward the free
/// end). Zero while the roller sits on a travel limit.
inline double roller_load_torque(const VsamConfig& cfg, StiffnessModel model, double q_m2,
                                 double q_rel)
{
    detail::check_deflection(cfg, q_rel);
    const auto pos = roller_position(cfg, q_m2);
    if (pos.clamped) {
        return 0.0;
    }
    return cfg.eta() * detail::energy_length_derivative(cfg, model, pos.x, q_rel);
}

struct CalibrationTargets {
    double k_soft = 21.0;   // Nm/rad at x_max
    double k_stiff = 985.0; // Nm/rad at x_min
};

inline constexpr double min_roller_position = 5e-3;

/// Fixes x_max at the spring length, solves the area moment so the
/// equilibrium stiffness at x_max is k_soft, then places x_min where it is
/// k_stiff (k ~ x^-3).
inline VsamConfig calibrate(const VsamConfig& base, const CalibrationTargets& targets = {})
{
    if (!(targets.k_soft > 0.0) || !(targets.k_stiff > targets.k_soft)) {
        throw PreconditionViolation("calibrate: need 0 < k_soft < k_stiff");
    }
    base.beam.validate();
    if (!(base.moment_arm > 0.0) || base.spring_count < 1) {
        throw PreconditionViolation("calibrate: invalid moment arm or spring count");
    }
    VsamConfig cfg = base;
    cfg.x_max = cfg.beam.full_length;
    const double x3 = cfg.x_max * cfg.x_max * cfg.x_max;
    const double ei_r2 = targets.k_soft * x3 / (3.0 * cfg.spring_count);
    cfg.beam.area_moment =
        ei_r2 / (cfg.beam.youngs_modulus * cfg.moment_arm * cfg.moment_arm);
    cfg.x_min = cfg.x_max * std::cbrt(targets.k_soft / targets.k_stiff);
    if (cfg.x_min < min_roller_position) {
        throw InfeasibleGeometry("calibrate: x_min falls below 5 mm");
    }
    cfg.validate();
    return cfg;
}

/// Roller position giving equilibrium stiffness k under the small-deflection law.
inline double roller_position_for_stiffness(const VsamConfig& cfg, double k)
{
    const double r = cfg.moment_arm;
    return std::cbrt(3.0 * cfg.spring_count * cfg.beam.flexural_rigidity() * r * r / k);
}

inline VsamConfig default_config() { return calibrate(VsamConfig{}); }

} // namespace vssea::vsam
