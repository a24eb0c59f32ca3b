#pragma once

// Three-inertia plant: motor 1 through the gearbox, the output link, and the
// stiffness motor driving the roller screw. The spring stage couples motor 1
// and the link through the link deflection q_l - q_m1 / N and loads motor 2
// through the roller.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "vssea/errors.hpp"
#include "vssea/vsam.hpp"

namespace vssea::dynamics {

using vsam::StiffnessModel;

struct ActuatorParams {
    double J_m1 = 5e-5;
    double J_g = 1e-5;
    double J_m2 = 8e-5;
    double J_l = 0.05;
    double b_m1 = 1e-4;
    double b_g = 1e-4;
    double b_m2 = 1e-4;
    double b_l = 1.0;
    double gear_ratio = 100.0;
    double tau_m1_max = 1.1; // Nm at the motor shaft
    double tau_m2_max = 0.4; // Nm
    // Hard stop stiffness beyond the deflection limit, Nm/rad at the link.
    double end_stop_stiffness = 2000.0;
    vsam::VsamConfig vsam = vsam::default_config();
    StiffnessModel model = StiffnessModel::SmallDeflection;

    double reflected_inertia() const noexcept { return J_m1 + J_g / (gear_ratio * gear_ratio); }
    double reflected_damping() const noexcept { return b_m1 + b_g / (gear_ratio * gear_ratio); }

    void validate() const
    {
        if (!(J_m1 > 0.0) || !(J_l > 0.0) || !(J_m2 > 0.0) || !(J_g >= 0.0)) {
            throw PreconditionViolation("ActuatorParams: J_m1, J_l, J_m2 must be > 0 and J_g >= 0");
        }
        if (!(b_m1 >= 0.0) || !(b_g >= 0.0) || !(b_m2 >= 0.0) || !(b_l >= 0.0)) {
            throw PreconditionViolation("ActuatorParams: dampings must be >= 0");
        }
        if (!(gear_ratio >= 1.0)) {
            throw PreconditionViolation("ActuatorParams: gear_ratio must be >= 1");
        }
        if (!(tau_m1_max > 0.0) || !(tau_m2_max > 0.0)) {
            throw PreconditionViolation("ActuatorParams: torque limits must be > 0");
        }
        if (!(end_stop_stiffness >= 0.0)) {
            throw PreconditionViolation("ActuatorParams: end_stop_stiffness must be >= 0");
        }
        vsam.validate();
    }
};

struct SimState {
    double time = 0.0;
    double q_m1 = 0.0;
    double q_l = 0.0;
    double q_m2 = 0.0;
    double qd_m1 = 0.0;
    double qd_l = 0.0;
    double qd_m2 = 0.0;

    double q_g(double gear_ratio) const noexcept { return q_m1 / gear_ratio; }
    double qd_g(double gear_ratio) const noexcept { return qd_m1 / gear_ratio; }

    bool finite() const noexcept
    {
        return std::isfinite(time) && std::isfinite(q_m1) && std::isfinite(q_l) &&
               std::isfinite(q_m2) && std::isfinite(qd_m1) && std::isfinite(qd_l) &&
               std::isfinite(qd_m2);
    }
};

struct StateRate {
    double qd_m1 = 0.0;
    double qd_l = 0.0;
    double qd_m2 = 0.0;
    double qdd_m1 = 0.0;
    double qdd_l = 0.0;
    double qdd_m2 = 0.0;
};

/// Piecewise-linear schedule through (time, value) knots, held constant
/// outside them. Two knots at the same time give a step.
class Schedule {
public:
    Schedule() = default;
    explicit Schedule(std::vector<std::pair<double, double>> knots) : knots_(std::move(knots))
    {
        for (std::size_t i = 0; i < knots_.size(); ++i) {
            if (!std::isfinite(knots_[i].first) || !std::isfinite(knots_[i].second)) {
                throw PreconditionViolation("Schedule: knots must be finite");
            }
            if (i > 0 && knots_[i].first < knots_[i - 1].first) {
                throw PreconditionViolation("Schedule: knot times must be non-decreasing");
            }
        }
    }

    /// 0 until `start`, linear ramp to `value` over `duration`, then held.
    static Schedule ramp(double start, double duration, double value)
    {
        return Schedule({{start, 0.0}, {start + duration, value}});
    }

    static Schedule constant(double value) { return Schedule({{0.0, value}}); }

    double at(double t) const
    {
        if (knots_.empty()) {
            return 0.0;
        }
        auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                                   [](double v, const auto& k) { return v < k.first; });
        if (it == knots_.begin()) {
            return knots_.front().second;
        }
        if (it == knots_.end()) {
            return knots_.back().second;
        }
        const auto& [t1, v1] = *it;
        const auto& [t0, v0] = *(it - 1);
        return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
    }

    bool empty() const noexcept { return knots_.empty(); }
    const std::vector<std::pair<double, double>>& knots() const noexcept { return knots_; }

private:
    std::vector<std::pair<double, double>> knots_;
};

/// Unmodelled torques, entering each row with a minus sign.
struct DisturbanceProfile {
    Schedule link;
    Schedule motor1;
    Schedule motor2;
};

/// A locked joint keeps its position; its row is removed from the dynamics.
struct JointLocks {
    bool motor1 = false;
    bool link = false;
    bool motor2 = false;
};

/// Spring-stage quantities at one configuration. Past the deflection limit the
/// potential continues with the limit slope plus a stiff quadratic stop.
struct Coupling {
    double deflection = 0.0;   // q_l - q_g
    double spring_torque = 0.0; // restoring torque on the link, odd in deflection
    double roller_load = 0.0;  // dU/dq_m2, torque the springs load motor 2 with
    double disturbance = 0.0;  // axial-force torque on motor 2 from the roller force balance
    double stiffness = 0.0;
    double stored_energy = 0.0;
    bool on_stop = false;
};

inline Coupling coupling(const ActuatorParams& p, double q_m2, double deflection,
                         bool with_extras = false)
{
    const auto& cfg = p.vsam;
    const auto pos = vsam::roller_position(cfg, q_m2);
    const double lim = cfg.deflection_limit;
    const double mag = std::abs(deflection);
    const double sgn = (deflection > 0.0) - (deflection < 0.0);
    const double inside = std::min(mag, lim) * sgn;
    Coupling c;
    c.deflection = deflection;
    c.spring_torque = vsam::detail::torque_at(cfg, p.model, pos.x, inside);
    double load_x = vsam::detail::energy_length_derivative(cfg, p.model, pos.x, inside);
    if (mag > lim) {
        const double over = mag - lim;
        c.on_stop = true;
        c.spring_torque += sgn * p.end_stop_stiffness * over;
        load_x += vsam::detail::torque_length_derivative(cfg, p.model, pos.x, lim) * over;
    }
    c.roller_load = pos.clamped ? 0.0 : cfg.eta() * load_x;
    if (with_extras) {
        c.disturbance = vsam::disturbance_torque(cfg, p.model, q_m2, inside);
        c.stiffness = vsam::stiffness(cfg, p.model, q_m2, inside) +
                      (c.on_stop ? p.end_stop_stiffness : 0.0);
        c.stored_energy = vsam::detail::energy_at(cfg, p.model, pos.x, inside);
        if (c.on_stop) {
            const double over = mag - lim;
            c.stored_energy += std::abs(vsam::detail::torque_at(cfg, p.model, pos.x, lim)) * over +
                               0.5 * p.end_stop_stiffness * over * over;
        }
    }
    return c;
}

inline double saturate(double v, double limit) { return std::clamp(v, -limit, limit); }

/// State derivative. Motor torques are clamped to the shaft limits here.
inline StateRate derivatives(const ActuatorParams& p, const SimState& s, double tau_m1,
                             double tau_m2, const DisturbanceProfile& dist = {},
                             const JointLocks& locks = {})
{
    const double n = p.gear_ratio;
    const auto c = coupling(p, s.q_m2, s.q_l - s.q_m1 / n);
    const double u1 = saturate(tau_m1, p.tau_m1_max);
    const double u2 = saturate(tau_m2, p.tau_m2_max);
    StateRate d;
    if (!locks.motor1) {
        d.qd_m1 = s.qd_m1;
        d.qdd_m1 = (u1 + c.spring_torque / n - p.reflected_damping() * s.qd_m1 - dist.motor1.at(s.time)) /
                   p.reflected_inertia();
    }
    if (!locks.link) {
        d.qd_l = s.qd_l;
        d.qdd_l = (-c.spring_torque - p.b_l * s.qd_l - dist.link.at(s.time)) / p.J_l;
    }
    if (!locks.motor2) {
        d.qd_m2 = s.qd_m2;
        d.qdd_m2 = (u2 - c.roller_load - p.b_m2 * s.qd_m2 - dist.motor2.at(s.time)) / p.J_m2;
    }
    if (!std::isfinite(d.qd_m1) || !std::isfinite(d.qd_l) || !std::isfinite(d.qd_m2) ||
        !std::isfinite(d.qdd_m1) || !std::isfinite(d.qdd_l) || !std::isfinite(d.qdd_m2)) {
        throw NonFiniteState("derivatives: non-finite state derivative");
    }
    return d;
}

namespace detail {

inline SimState advance(const SimState& s, const StateRate& d, double h)
{
    SimState out = s;
    out.time = s.time + h;
    out.q_m1 += h * d.qd_m1;
    out.q_l += h * d.qd_l;
    out.q_m2 += h * d.qd_m2;
    out.qd_m1 += h * d.qdd_m1;
    out.qd_l += h * d.qdd_l;
    out.qd_m2 += h * d.qdd_m2;
    return out;
}

} // namespace detail

/// One classical Runge-Kutta step with the motor torques held over the step.
inline SimState step(const ActuatorParams& p, const SimState& s, double tau_m1, double tau_m2,
                     const DisturbanceProfile& dist, double dt, const JointLocks& locks = {})
{
    if (!(dt > 0.0)) {
        throw PreconditionViolation("step: dt must be > 0");
    }
    const auto k1 = derivatives(p, s, tau_m1, tau_m2, dist, locks);
    const auto k2 = derivatives(p, detail::advance(s, k1, 0.5 * dt), tau_m1, tau_m2, dist, locks);
    const auto k3 = derivatives(p, detail::advance(s, k2, 0.5 * dt), tau_m1, tau_m2, dist, locks);
    const auto k4 = derivatives(p, detail::advance(s, k3, dt), tau_m1, tau_m2, dist, locks);
    StateRate sum;
    sum.qd_m1 = (k1.qd_m1 + 2.0 * k2.qd_m1 + 2.0 * k3.qd_m1 + k4.qd_m1) / 6.0;
    sum.qd_l = (k1.qd_l + 2.0 * k2.qd_l + 2.0 * k3.qd_l + k4.qd_l) / 6.0;
    sum.qd_m2 = (k1.qd_m2 + 2.0 * k2.qd_m2 + 2.0 * k3.qd_m2 + k4.qd_m2) / 6.0;
    sum.qdd_m1 = (k1.qdd_m1 + 2.0 * k2.qdd_m1 + 2.0 * k3.qdd_m1 + k4.qdd_m1) / 6.0;
    sum.qdd_l = (k1.qdd_l + 2.0 * k2.qdd_l + 2.0 * k3.qdd_l + k4.qdd_l) / 6.0;
    sum.qdd_m2 = (k1.qdd_m2 + 2.0 * k2.qdd_m2 + 2.0 * k3.qdd_m2 + k4.qdd_m2) / 6.0;
    SimState out = detail::advance(s, sum, dt);
    out.time = s.time + dt;
    if (!out.finite()) {
        throw NonFiniteState("step: state became non-finite");
    }
    return out;
}

inline double mechanical_power_m2(const SimState& s, double tau_m2) { return tau_m2 * s.qd_m2; }

inline double kinetic_energy(const ActuatorParams& p, const SimState& s)
{
    return 0.5 * (p.reflected_inertia() * s.qd_m1 * s.qd_m1 + p.J_l * s.qd_l * s.qd_l +
                  p.J_m2 * s.qd_m2 * s.qd_m2);
}

inline double potential_energy(const ActuatorParams& p, const SimState& s)
{
    return coupling(p, s.q_m2, s.q_l - s.q_m1 / p.gear_ratio, true).stored_energy;
}

inline double total_energy(const ActuatorParams& p, const SimState& s)
{
    return kinetic_energy(p, s) + potential_energy(p, s);
}

/// Rate of energy loss in the viscous terms, sum of b q_dot^2.
inline double dissipation_rate(const ActuatorParams& p, const SimState& s)
{
    return p.reflected_damping() * s.qd_m1 * s.qd_m1 + p.b_l * s.qd_l * s.qd_l +
           p.b_m2 * s.qd_m2 * s.qd_m2;
}

} // namespace vssea::dynamics
