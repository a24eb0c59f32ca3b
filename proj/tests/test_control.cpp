#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "vssea/control.hpp"

using namespace vssea;
using namespace vssea::control;

TEST(Pid, ZeroErrorZeroOutput)
{
    const PidGains g{100.0, 10.0, 1.0, 5.0, 1e-3};
    const auto out = pid_update(g, {}, 1.0, 0.5, 1.0, 0.5);
    EXPECT_EQ(out.command, 0.0);
    EXPECT_EQ(out.state.integral_accumulator, 0.0);
}

TEST(Pid, ProportionalOnly)
{
    const PidGains g{5000.0, 0.0, 0.0, 1e6, 1e-3};
    EXPECT_DOUBLE_EQ(pid_update(g, {}, 0.01, 0.0, 0.0, 0.0).command, 50.0);
}

TEST(Pid, DerivativeUsesRates)
{
    const PidGains g{0.0, 0.0, 95.0, 1e6, 1e-3};
    EXPECT_DOUBLE_EQ(pid_update(g, {}, 0.0, 2.0, 0.0, 1.5).command, 47.5);
}

TEST(Pid, IntegralOfConstantError)
{
    const PidGains g{0.0, 35.0, 0.0, 1e6, 1e-3};
    PidState s;
    double u = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto out = pid_update(g, s, 0.001, 0.0, 0.0, 0.0);
        s = out.state;
        u = out.command;
    }
    // one half-sample of trapezoid start-up
    EXPECT_NEAR(u, 0.035, 35.0 * 0.001 * 1e-3);
}

TEST(Pid, OutputAlwaysWithinLimit)
{
    const PidGains g{15000.0, 75.0, 500.0, 1100.0, 1e-3};
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> d(-10.0, 10.0);
    PidState s;
    for (int i = 0; i < 2000; ++i) {
        const auto out = pid_update(g, s, d(rng), d(rng), d(rng), d(rng));
        EXPECT_LE(std::abs(out.command), g.output_limit);
        s = out.state;
    }
}

TEST(Pid, AntiWindupBoundsIntegral)
{
    const PidGains g{10.0, 35.0, 0.0, 1.0, 1e-3};
    PidState s;
    for (int i = 0; i < 100000; ++i) {
        const auto out = pid_update(g, s, 100.0, 0.0, 0.0, 0.0);
        EXPECT_TRUE(out.saturated);
        s = out.state;
    }
    EXPECT_LE(std::abs(s.integral_accumulator), g.output_limit / g.ki);
}

TEST(Pid, IntegralUnwindsWhenErrorReverses)
{
    const PidGains g{1.0, 10.0, 0.0, 1.0, 1e-3};
    PidState s;
    s.integral_accumulator = 0.09;
    s.previous_error = -0.5;
    const auto out = pid_update(g, s, 0.0, 0.0, 0.5, 0.0);
    EXPECT_LT(out.state.integral_accumulator, 0.09);
}

TEST(Pid, LinearBelowSaturation)
{
    const PidGains g{3.0, 2.0, 0.5, 1e9, 1e-3};
    const PidState s{0.2, 0.1};
    const PidState s2{0.4, 0.2};
    const auto a = pid_update(g, s, 0.3, 0.2, 0.0, 0.0).command;
    const auto b = pid_update(g, s2, 0.6, 0.4, 0.0, 0.0).command;
    EXPECT_NEAR(b, 2.0 * a, 1e-12);
}

TEST(Gains, Validation)
{
    EXPECT_THROW((PidGains{1, 1, 1, 0.0, 1e-3}.validate()), PreconditionViolation);
    EXPECT_THROW((PidGains{1, 1, 1, 1.0, 0.0}.validate()), PreconditionViolation);
    EXPECT_THROW((PidGains{-1, 1, 1, 1.0, 1e-3}.validate()), PreconditionViolation);
}

TEST(Presets, PublishedGains)
{
    const auto a = preset("fig9_motor_pid");
    EXPECT_EQ(a.gains.kp, 15000.0);
    EXPECT_EQ(a.gains.kd, 500.0);
    EXPECT_EQ(a.gains.ki, 75.0);
    EXPECT_EQ(a.target, ControlTarget::MotorPosition);
    const auto b = preset("fig10_link_pid");
    EXPECT_EQ(b.gains.kp, 5000.0);
    EXPECT_EQ(b.gains.kd, 95.0);
    EXPECT_EQ(b.gains.ki, 35.0);
    EXPECT_EQ(b.target, ControlTarget::LinkPosition);
    const auto c = preset("fig12_force_pid");
    EXPECT_EQ(c.gains.kp, 2500.0);
    EXPECT_EQ(c.gains.kd, 85.0);
    EXPECT_EQ(c.gains.ki, 15.0);
    EXPECT_EQ(c.target, ControlTarget::Deflection);
    EXPECT_EQ(preset("stiffness_servo").target, ControlTarget::StiffnessMotorPosition);
    EXPECT_THROW(preset("nope"), PreconditionViolation);
    EXPECT_EQ(preset_names().size(), 4u);
}

TEST(Presets, LimitsMatchMotorTorque)
{
    for (const auto& n : preset_names()) {
        const auto p = preset(n);
        p.gains.validate();
        const double torque = std::abs(p.command_scale) * p.gains.output_limit;
        EXPECT_NEAR(torque, n == "stiffness_servo" ? 0.4 : 1.1, 1e-12) << n;
    }
    const auto p = with_limits(fig9_motor_pid(), 2.2, 5e-4);
    EXPECT_DOUBLE_EQ(p.gains.output_limit, 2200.0);
    EXPECT_EQ(p.gains.sample_time, 5e-4);
}

TEST(Reference, AtRestBeforeStart)
{
    const auto r = reference_trajectory(0.5 * std::numbers::pi, 1.0, 0.5);
    EXPECT_EQ(r.value, 0.0);
    EXPECT_EQ(r.rate, 0.0);
    const auto s = reference_trajectory(0.5 * std::numbers::pi, 1.0, 1.0);
    EXPECT_EQ(s.value, 0.0);
    EXPECT_EQ(s.rate, 0.0);
}

TEST(Reference, PeakAtHalfPeriod)
{
    const double k = 2.0 * std::numbers::pi;
    const double f = 0.1;
    const auto r = reference_trajectory(k, f, 1.0 + 1.0 / (2 * f));
    EXPECT_NEAR(r.value, 2 * k, 1e-12);
    EXPECT_NEAR(r.rate, 0.0, 1e-12);
}

TEST(Reference, HandValue)
{
    const auto r = reference_trajectory(0.5 * std::numbers::pi, 0.1, 3.5);
    EXPECT_NEAR(r.value, 1.5708, 1e-4);
    EXPECT_NEAR(r.rate, 0.9870, 1e-4);
}

TEST(Reference, RateIsDerivative)
{
    for (double t : {1.3, 2.7, 4.1}) {
        const double h = 1e-6;
        const double fd = (reference_trajectory(1.2, 1.0, t + h).value - reference_trajectory(1.2, 1.0, t - h).value) / (2 * h);
        EXPECT_NEAR(reference_trajectory(1.2, 1.0, t).rate, fd, 1e-6);
    }
}
