#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "vssea/errors.hpp"

namespace vssea::control {

struct PidGains {
    double kp = 0.0;
    double ki = 0.0;
    double kd = 0.0;
    double output_limit = 1.0;
    double sample_time = 1e-3;

    void validate() const
    {
        if (!(sample_time > 0.0)) {
            throw PreconditionViolation("PidGains: sample_time must be > 0");
        }
        if (!(output_limit > 0.0)) {
            throw PreconditionViolation("PidGains: output_limit must be > 0");
        }
        if (!(kp >= 0.0) || !(ki >= 0.0) || !(kd >= 0.0)) {
            throw PreconditionViolation("PidGains: gains must be >= 0");
        }
    }
};

struct PidState {
    double integral_accumulator = 0.0;
    double previous_error = 0.0;
};

struct PidOutput {
    double command = 0.0;
    PidState state;
    bool saturated = false;
};

/// One controller sample. The integral advances by the trapezoid rule and is
/// frozen when the output saturates in the direction the error pushes.
inline PidOutput pid_update(const PidGains& g, const PidState& pid, double ref, double ref_rate,
                            double meas, double meas_rate)
{
    const double e = ref - meas;
    const double e_rate = ref_rate - meas_rate;
    PidOutput out;
    out.state.previous_error = e;
    const double integral =
        pid.integral_accumulator + 0.5 * (e + pid.previous_error) * g.sample_time;
    double u = g.kp * e + g.ki * integral + g.kd * e_rate;
    out.state.integral_accumulator = integral;
    if (std::abs(u) > g.output_limit && e * u > 0.0) {
        out.state.integral_accumulator = pid.integral_accumulator;
        u = g.kp * e + g.ki * pid.integral_accumulator + g.kd * e_rate;
    }
    out.saturated = std::abs(u) >= g.output_limit;
    out.command = std::clamp(u, -g.output_limit, g.output_limit);
    return out;
}

enum class ControlTarget { MotorPosition, LinkPosition, Deflection, StiffnessMotorPosition };

inline const char* to_string(ControlTarget t)
{
    switch (t) {
    case ControlTarget::MotorPosition: return "motor_position";
    case ControlTarget::LinkPosition: return "link_position";
    case ControlTarget::Deflection: return "deflection";
    case ControlTarget::StiffnessMotorPosition: return "stiffness_motor_position";
    }
    return "?";
}

struct Reference {
    double value = 0.0;
    double rate = 0.0;
};

/// Raised cosine K (1 - cos(2 pi f (t - 1))), at rest before t = 1 s.
inline Reference reference_trajectory(double amplitude, double frequency, double t)
{
    if (t < 1.0) {
        return {};
    }
    const double w = 2.0 * std::numbers::pi * frequency;
    const double phase = w * (t - 1.0);
    return {amplitude * (1.0 - std::cos(phase)), w * amplitude * std::sin(phase)};
}

/// A PID loop plus the factor that turns its output into motor-shaft torque.
/// Negative factors flip the actuation direction.
struct LoopPreset {
    std::string name;
    ControlTarget target = ControlTarget::MotorPosition;
    PidGains gains;
    double command_scale = 1.0; // Nm per controller unit
};

/// Motor-1 drive scaling: controller units are mNm at the motor shaft.
inline constexpr double motor1_command_scale = 1e-3;
inline constexpr double motor1_torque_limit = 1.1;
inline constexpr double motor2_torque_limit = 0.4;

inline LoopPreset fig9_motor_pid()
{
    return {"fig9_motor_pid", ControlTarget::MotorPosition,
            {15000.0, 75.0, 500.0, motor1_torque_limit / motor1_command_scale, 1e-3},
            motor1_command_scale};
}

inline LoopPreset fig10_link_pid()
{
    return {"fig10_link_pid", ControlTarget::LinkPosition,
            {5000.0, 35.0, 95.0, motor1_torque_limit / motor1_command_scale, 1e-3},
            motor1_command_scale};
}

inline LoopPreset fig12_force_pid()
{
    // Raising q_g lowers q_l - q_g, so the deflection loop drives motor 1 negatively.
    return {"fig12_force_pid", ControlTarget::Deflection,
            {2500.0, 15.0, 85.0, motor1_torque_limit / motor1_command_scale, 1e-3},
            -motor1_command_scale};
}

inline LoopPreset stiffness_servo()
{
    return {"stiffness_servo", ControlTarget::StiffnessMotorPosition,
            {3.0, 1.0, 0.04, motor2_torque_limit, 1e-3},
            1.0};
}

inline std::vector<std::string> preset_names()
{
    return {"fig9_motor_pid", "fig10_link_pid", "fig12_force_pid", "stiffness_servo"};
}

inline LoopPreset preset(const std::string& name)
{
    if (name == "fig9_motor_pid") return fig9_motor_pid();
    if (name == "fig10_link_pid") return fig10_link_pid();
    if (name == "fig12_force_pid") return fig12_force_pid();
    if (name == "stiffness_servo") return stiffness_servo();
    throw PreconditionViolation("unknown controller preset: " + name);
}

/// Re-derives the output limit after the torque limit or sample time changes.
inline LoopPreset with_limits(LoopPreset p, double torque_limit, double sample_time)
{
    p.gains.output_limit = torque_limit / std::abs(p.command_scale);
    p.gains.sample_time = sample_time;
    return p;
}

} // namespace vssea::control
