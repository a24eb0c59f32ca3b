#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "vssea/control.hpp"
#include "vssea/dynamics.hpp"
#include "vssea/errors.hpp"
#include "vssea/vsam.hpp"

namespace vssea::experiments {

using control::ControlTarget;
using control::Reference;
using dynamics::ActuatorParams;
using dynamics::SimState;

using ReferenceFn = std::function<Reference(double)>;

struct LoopAssignment {
    control::LoopPreset loop;
    ReferenceFn reference;
};

/// Which loop the tracking metrics are computed on.
enum class ScoredLoop { Motor1, Motor2 };

struct Scenario {
    std::string name;
    std::string description;
    ActuatorParams params;
    std::optional<LoopAssignment> motor1;
    std::optional<LoopAssignment> motor2;
    dynamics::DisturbanceProfile disturbances;
    dynamics::JointLocks locks;
    SimState initial;
    double duration = 1.0;
    double physics_dt = 1e-4;
    double control_dt = 1e-3;
    ScoredLoop scored = ScoredLoop::Motor1;

    int substeps() const { return static_cast<int>(std::lround(control_dt / physics_dt)); }
    int control_steps() const { return static_cast<int>(std::lround(duration / control_dt)); }

    void validate() const
    {
        if (!(duration > 0.0)) {
            throw PreconditionViolation(name + ": duration must be > 0");
        }
        if (!(physics_dt > 0.0) || !(control_dt > 0.0)) {
            throw PreconditionViolation(name + ": time steps must be > 0");
        }
        const double ratio = control_dt / physics_dt;
        if (std::lround(ratio) < 1 || std::abs(ratio - std::lround(ratio)) > 1e-9 * ratio) {
            throw PreconditionViolation(name + ": control_dt must be an integer multiple of physics_dt");
        }
        params.validate();
        for (const auto* loop : {&motor1, &motor2}) {
            if (*loop) {
                (*loop)->loop.gains.validate();
                if (!(*loop)->reference) {
                    throw PreconditionViolation(name + ": loop without a reference");
                }
                if (std::abs((*loop)->loop.gains.sample_time - control_dt) > 1e-12) {
                    throw PreconditionViolation(name + ": controller sample time differs from control_dt");
                }
            }
        }
        if ((scored == ScoredLoop::Motor1 && !motor1) || (scored == ScoredLoop::Motor2 && !motor2)) {
            throw PreconditionViolation(name + ": scored loop is not assigned");
        }
    }
};

struct Sample {
    double t = 0.0;
    SimState state;
    double q_g = 0.0;
    double tau_m1_cmd = 0.0;
    double tau_m2_cmd = 0.0;
    double tau_s = 0.0;
    double tau_s_dis = 0.0;
    double k = 0.0;
    double stored_energy = 0.0;
    double m2_energy_cost = 0.0; // cumulative, J
    double reference = 0.0;      // scored loop
    double measured = 0.0;
    bool m2_saturated = false;
};

struct Metrics {
    double rms_error = 0.0;
    double max_overshoot = 0.0; // fraction of the final reference
    double settling_time = 0.0; // s, 2 % band around the final reference
    double steady_error = 0.0;  // mean |error| over the final window
    double steady_link_deviation = 0.0;
    double peak_disturbance = 0.0;
    double energy_cost = 0.0;
    double longest_m2_saturation = 0.0; // s
};

struct ScenarioResult {
    std::string name;
    double control_dt = 1e-3;
    std::vector<Sample> samples;
    Metrics metrics;
};

inline constexpr double settle_band = 0.02;
inline constexpr double steady_window = 0.5;

/// Metrics from the logged series alone.
inline Metrics compute_metrics(const std::vector<Sample>& s, double control_dt)
{
    Metrics m;
    if (s.empty()) {
        return m;
    }
    double sq = 0.0;
    for (const auto& x : s) {
        const double e = x.reference - x.measured;
        sq += e * e;
        m.peak_disturbance = std::max(m.peak_disturbance, std::abs(x.tau_s_dis));
    }
    m.rms_error = std::sqrt(sq / static_cast<double>(s.size()));
    m.energy_cost = s.back().m2_energy_cost;

    const double r_final = s.back().reference;
    if (r_final != 0.0) {
        const double dir = r_final > 0.0 ? 1.0 : -1.0;
        double peak = 0.0;
        for (const auto& x : s) {
            peak = std::max(peak, dir * (x.measured - r_final));
        }
        m.max_overshoot = peak / std::abs(r_final);
    }
    const double band = r_final != 0.0 ? settle_band * std::abs(r_final) : 1e-3;
    m.settling_time = s.front().t;
    for (const auto& x : s) {
        if (std::abs(x.measured - r_final) > band) {
            m.settling_time = x.t + control_dt;
        }
    }
    m.settling_time = std::min(m.settling_time, s.back().t);

    const double t_window = s.back().t - steady_window;
    double err_sum = 0.0;
    double link_sum = 0.0;
    int count = 0;
    for (const auto& x : s) {
        if (x.t >= t_window) {
            err_sum += std::abs(x.measured - r_final);
            link_sum += std::abs(x.state.q_l - r_final);
            ++count;
        }
    }
    m.steady_error = err_sum / count;
    m.steady_link_deviation = link_sum / count;

    int run = 0;
    int longest = 0;
    for (const auto& x : s) {
        run = x.m2_saturated ? run + 1 : 0;
        longest = std::max(longest, run);
    }
    m.longest_m2_saturation = longest * control_dt;
    return m;
}

namespace detail {

inline Reference measure(ControlTarget target, const ActuatorParams& p, const SimState& s)
{
    const double n = p.gear_ratio;
    switch (target) {
    case ControlTarget::MotorPosition: return {s.q_g(n), s.qd_g(n)};
    case ControlTarget::LinkPosition: return {s.q_l, s.qd_l};
    case ControlTarget::Deflection: return {s.q_l - s.q_g(n), s.qd_l - s.qd_g(n)};
    case ControlTarget::StiffnessMotorPosition: return {s.q_m2, s.qd_m2};
    }
    return {};
}

struct LoopRun {
    control::PidState pid;
    double torque = 0.0;
    bool saturated = false;
    Reference ref;
    Reference meas;
};

inline void update_loop(const LoopAssignment& a, const ActuatorParams& p, const SimState& s,
                        LoopRun& run)
{
    run.ref = a.reference(s.time);
    run.meas = measure(a.loop.target, p, s);
    const auto out =
        control::pid_update(a.loop.gains, run.pid, run.ref.value, run.ref.rate, run.meas.value, run.meas.rate);
    run.pid = out.state;
    run.saturated = out.saturated;
    run.torque = a.loop.command_scale * out.command;
}

} // namespace detail

inline ScenarioResult run_scenario(const Scenario& sc)
{
    sc.validate();
    const auto& p = sc.params;
    const int substeps = sc.substeps();
    const int steps = sc.control_steps();
    const double h = sc.control_dt / substeps;

    ScenarioResult result;
    result.name = sc.name;
    result.control_dt = sc.control_dt;
    result.samples.reserve(static_cast<std::size_t>(steps) + 1);

    SimState state = sc.initial;
    state.time = 0.0;
    detail::LoopRun m1;
    detail::LoopRun m2;
    double cost = 0.0;

    for (int k = 0;; ++k) {
        state.time = k * sc.control_dt;
        if (!state.finite()) {
            throw SimulationDiverged(sc.name + ": non-finite state");
        }
        if (sc.motor1) {
            detail::update_loop(*sc.motor1, p, state, m1);
        }
        if (sc.motor2) {
            detail::update_loop(*sc.motor2, p, state, m2);
        }
        const double u1 = dynamics::saturate(m1.torque, p.tau_m1_max);
        const double u2 = dynamics::saturate(m2.torque, p.tau_m2_max);

        const auto c = dynamics::coupling(p, state.q_m2, state.q_l - state.q_g(p.gear_ratio), true);
        Sample smp;
        smp.t = state.time;
        smp.state = state;
        smp.q_g = state.q_g(p.gear_ratio);
        smp.tau_m1_cmd = u1;
        smp.tau_m2_cmd = u2;
        smp.tau_s = c.spring_torque;
        smp.tau_s_dis = c.disturbance;
        smp.k = c.stiffness;
        smp.stored_energy = c.stored_energy;
        smp.m2_energy_cost = cost;
        const auto& scored = sc.scored == ScoredLoop::Motor1 ? m1 : m2;
        smp.reference = scored.ref.value;
        smp.measured = scored.meas.value;
        smp.m2_saturated = m2.saturated;
        result.samples.push_back(smp);
        if (k == steps) {
            break;
        }

        for (int j = 0; j < substeps; ++j) {
            const double p0 = std::max(dynamics::mechanical_power_m2(state, u2), 0.0);
            state = dynamics::step(p, state, u1, u2, sc.disturbances, h, sc.locks);
            const double p1 = std::max(dynamics::mechanical_power_m2(state, u2), 0.0);
            cost += 0.5 * (p0 + p1) * h;
        }
    }
    result.metrics = compute_metrics(result.samples, sc.control_dt);
    return result;
}

/// Runs scenarios on up to `threads` workers; results keep the input order.
inline std::vector<ScenarioResult> run_scenarios(const std::vector<Scenario>& scenarios,
                                                 unsigned threads = 0)
{
    std::vector<ScenarioResult> out(scenarios.size());
    std::vector<std::exception_ptr> errors(scenarios.size());
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, scenarios.size())));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < scenarios.size(); i = next++) {
            try {
                out[i] = run_scenario(scenarios[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) {
        pool.emplace_back(worker);
    }
    for (auto& t : pool) {
        t.join();
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return out;
}

// Catalog ------------------------------------------------------------------

struct CatalogOptions {
    ActuatorParams params;
    double physics_dt = 1e-4;
    double control_dt = 1e-3;
};

inline constexpr double soft_stiffness = 21.0;
inline constexpr double stiff_stiffness = 985.0;

/// Motor-2 angle giving equilibrium stiffness k.
inline double motor2_for_stiffness(const vsam::VsamConfig& cfg, double k)
{
    return vsam::motor_angle_for_roller(cfg, vsam::roller_position_for_stiffness(cfg, k));
}

inline ReferenceFn hold(double value)
{
    return [value](double) { return Reference{value, 0.0}; };
}

inline ReferenceFn step_at(double t0, double value)
{
    return [t0, value](double t) { return Reference{t < t0 ? 0.0 : value, 0.0}; };
}

/// a + (b - a)(1 - cos(2 pi f (t - t0))) / 2 for t >= t0, a before.
inline ReferenceFn raised_cosine(double a, double b, double frequency, double t0)
{
    return [=](double t) {
        if (t < t0) {
            return Reference{a, 0.0};
        }
        const double w = 2.0 * std::numbers::pi * frequency;
        const double ph = w * (t - t0);
        return Reference{a + 0.5 * (b - a) * (1.0 - std::cos(ph)), 0.5 * (b - a) * w * std::sin(ph)};
    };
}

/// Stiffness swept between k_a and k_b with a raised cosine in k, mapped to
/// the motor-2 angle through the cubic law.
inline ReferenceFn stiffness_modulation(const vsam::VsamConfig& cfg, double k_a, double k_b,
                                        double frequency, double t0)
{
    auto k_of_t = raised_cosine(k_a, k_b, frequency, t0);
    return [cfg, k_of_t](double t) {
        const auto k = k_of_t(t);
        const double q = motor2_for_stiffness(cfg, k.value);
        return Reference{q, -q / (3.0 * k.value) * k.rate};
    };
}

namespace detail {

inline Scenario base(const std::string& name, const std::string& description,
                     const CatalogOptions& o, double k_mode)
{
    Scenario s;
    s.name = name;
    s.description = description;
    s.params = o.params;
    s.physics_dt = o.physics_dt;
    s.control_dt = o.control_dt;
    const double q2 = motor2_for_stiffness(o.params.vsam, k_mode);
    s.initial.q_m2 = q2;
    s.motor2 = LoopAssignment{
        control::with_limits(control::stiffness_servo(), o.params.tau_m2_max, o.control_dt), hold(q2)};
    return s;
}

inline LoopAssignment motor1_loop(control::LoopPreset p, const CatalogOptions& o, ReferenceFn ref)
{
    return {control::with_limits(std::move(p), o.params.tau_m1_max, o.control_dt), std::move(ref)};
}

inline const char* mode_name(bool stiff) { return stiff ? "stiff" : "soft"; }

} // namespace detail

inline Scenario motor_pid_scenario(const CatalogOptions& o, bool stiff, double load)
{
    auto s = detail::base(std::string("fig9_") + detail::mode_name(stiff),
                          "motor-side PID, step to pi/2, link load ramped in at 2 s", o,
                          stiff ? stiff_stiffness : soft_stiffness);
    s.motor1 = detail::motor1_loop(control::fig9_motor_pid(), o, hold(0.5 * std::numbers::pi));
    s.disturbances.link = dynamics::Schedule::ramp(2.0, 0.5, load);
    s.duration = 5.0;
    return s;
}

inline Scenario link_pid_scenario(const CatalogOptions& o, bool stiff, double load)
{
    auto s = detail::base(std::string("fig10_") + detail::mode_name(stiff),
                          "link-side PID, step to pi/2, link load ramped in at 2 s", o,
                          stiff ? stiff_stiffness : soft_stiffness);
    s.motor1 = detail::motor1_loop(control::fig10_link_pid(), o, hold(0.5 * std::numbers::pi));
    s.disturbances.link = dynamics::Schedule::ramp(2.0, 0.5, load);
    s.duration = 5.0;
    return s;
}

inline Scenario tracking_scenario(const CatalogOptions& o, bool stiff, double frequency,
                                  double amplitude, const std::string& amp_label)
{
    const std::string freq = frequency < 0.5 ? "0p1hz" : "1hz";
    auto s = detail::base(std::string("fig11_") + detail::mode_name(stiff) + "_" + freq + "_" + amp_label,
                          "link-side PID tracking K(1 - cos(2 pi f (t - 1)))", o,
                          stiff ? stiff_stiffness : soft_stiffness);
    s.motor1 = detail::motor1_loop(control::fig10_link_pid(), o, [amplitude, frequency](double t) {
        return control::reference_trajectory(amplitude, frequency, t);
    });
    s.duration = frequency < 0.5 ? 10.0 : 5.0;
    return s;
}

inline constexpr double soft_deflection_target = 20.0 * vsam::degrees;
inline constexpr double stiff_deflection_target = 2.0 * vsam::degrees;

inline Scenario force_scenario(const CatalogOptions& o, bool stiff, bool tracking)
{
    const double target = stiff ? stiff_deflection_target : soft_deflection_target;
    auto s = detail::base(std::string("fig12_") + detail::mode_name(stiff) + (tracking ? "_tracking" : "_regulation"),
                          "deflection PID against a locked link", o,
                          stiff ? stiff_stiffness : soft_stiffness);
    s.locks.link = true;
    ReferenceFn ref = tracking ? raised_cosine(0.0, target, 0.5, 1.0) : step_at(0.5, target);
    s.motor1 = detail::motor1_loop(control::fig12_force_pid(), o, std::move(ref));
    s.duration = tracking ? 5.0 : 4.0;
    return s;
}

inline Scenario equilibrium_sweep(const CatalogOptions& o, double frequency, const std::string& name)
{
    auto s = detail::base(name, "soft to stiff roller sweep at equilibrium, motor 1 holding", o,
                          soft_stiffness);
    const double q_soft = motor2_for_stiffness(o.params.vsam, soft_stiffness);
    const double q_stiff = motor2_for_stiffness(o.params.vsam, stiff_stiffness);
    s.motor2->reference = raised_cosine(q_soft, q_stiff, frequency, 0.0);
    s.motor1 = detail::motor1_loop(control::fig9_motor_pid(), o, hold(0.0));
    s.scored = ScoredLoop::Motor2;
    s.duration = 10.0;
    return s;
}

/// +/-10 % band about the nominal stiffness of each mode, kept inside the
/// calibrated range.
inline std::pair<double, double> modulation_band(bool stiff)
{
    if (stiff) {
        const double nominal = stiff_stiffness / 1.1;
        return {0.9 * nominal, stiff_stiffness};
    }
    const double nominal = soft_stiffness / 0.9;
    return {soft_stiffness, 1.1 * nominal};
}

inline Scenario modulation_scenario(const CatalogOptions& o, bool stiff)
{
    const auto [k_lo, k_hi] = modulation_band(stiff);
    const double target = stiff ? stiff_deflection_target : soft_deflection_target;
    auto s = detail::base(std::string("fig14_") + detail::mode_name(stiff),
                          "10% stiffness modulation while the deflection is regulated", o, k_lo);
    s.locks.link = true;
    s.motor1 = detail::motor1_loop(control::fig12_force_pid(), o, step_at(0.5, target));
    s.motor2->reference = stiffness_modulation(o.params.vsam, k_lo, k_hi, 0.5, 2.0);
    s.duration = 6.0;
    return s;
}

inline Scenario hold_scenario(const CatalogOptions& o, bool stiff, bool deflected)
{
    const double k = stiff ? stiff_stiffness : soft_stiffness;
    const std::string name = deflected ? std::string("fig15_hold_") + detail::mode_name(stiff)
                                       : std::string("fig15_equilibrium_") + detail::mode_name(stiff);
    auto s = detail::base(name, "fixed stiffness hold for energy accounting", o, k);
    if (deflected) {
        s.locks.link = true;
        s.motor1 = detail::motor1_loop(control::fig12_force_pid(), o,
                                       step_at(0.5, stiff ? stiff_deflection_target : soft_deflection_target));
    } else {
        s.motor1 = detail::motor1_loop(control::fig9_motor_pid(), o, hold(0.0));
    }
    s.duration = 4.0;
    return s;
}

inline std::vector<Scenario> scenario_catalog(const CatalogOptions& o = {})
{
    std::vector<Scenario> c;
    c.push_back(motor_pid_scenario(o, true, 15.0));
    c.push_back(motor_pid_scenario(o, false, 5.0));
    c.push_back(link_pid_scenario(o, true, 10.0));
    c.push_back(link_pid_scenario(o, false, 1.0));
    for (bool stiff : {false, true}) {
        for (double f : {0.1, 1.0}) {
            c.push_back(tracking_scenario(o, stiff, f, 0.5 * std::numbers::pi, "k0p5pi"));
            c.push_back(tracking_scenario(o, stiff, f, 2.0 * std::numbers::pi, "k2pi"));
        }
    }
    for (bool stiff : {false, true}) {
        c.push_back(force_scenario(o, stiff, false));
        c.push_back(force_scenario(o, stiff, true));
    }
    c.push_back(equilibrium_sweep(o, 0.1, "fig13_slow"));
    c.push_back(equilibrium_sweep(o, 1.0, "fig13_fast"));
    c.push_back(modulation_scenario(o, true));
    c.push_back(modulation_scenario(o, false));
    c.push_back(hold_scenario(o, true, true));
    c.push_back(hold_scenario(o, false, true));
    c.push_back(hold_scenario(o, true, false));
    c.push_back(hold_scenario(o, false, false));
    return c;
}

inline std::optional<Scenario> find_scenario(const std::vector<Scenario>& catalog, const std::string& name)
{
    for (const auto& s : catalog) {
        if (s.name == name) {
            return s;
        }
    }
    return std::nullopt;
}

// Static model comparison ---------------------------------------------------

struct SweepRow {
    double roller_position = 0.0;
    double deflection = 0.0;
    double torque_large = 0.0;
    double torque_small = 0.0;
    double stiffness_large = 0.0;
    double stiffness_small = 0.0;
    double disturbance_large = 0.0;
    double disturbance_small = 0.0;
};

inline std::vector<SweepRow> compare_models_sweep(const vsam::VsamConfig& cfg,
                                                  const std::vector<double>& deflections,
                                                  const std::vector<double>& roller_positions)
{
    using vsam::StiffnessModel;
    std::vector<SweepRow> rows;
    rows.reserve(deflections.size() * roller_positions.size());
    for (double x : roller_positions) {
        if (!(x >= cfg.x_min && x <= cfg.x_max)) {
            throw PreconditionViolation("compare_models_sweep: roller position outside travel");
        }
        const double q2 = vsam::motor_angle_for_roller(cfg, x);
        for (double q : deflections) {
            SweepRow r;
            r.roller_position = x;
            r.deflection = q;
            r.torque_large = vsam::spring_torque(cfg, StiffnessModel::LargeDeflection, q2, q);
            r.torque_small = vsam::spring_torque(cfg, StiffnessModel::SmallDeflection, q2, q);
            r.stiffness_large = vsam::stiffness(cfg, StiffnessModel::LargeDeflection, q2, q);
            r.stiffness_small = vsam::stiffness(cfg, StiffnessModel::SmallDeflection, q2, q);
            r.disturbance_large = vsam::disturbance_torque(cfg, StiffnessModel::LargeDeflection, q2, q);
            r.disturbance_small = vsam::disturbance_torque(cfg, StiffnessModel::SmallDeflection, q2, q);
            rows.push_back(r);
        }
    }
    return rows;
}

/// Evenly spaced grid including both ends.
inline std::vector<double> linspace(double a, double b, int n)
{
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        v[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
    }
    return v;
}

/// Time from the last sample with k <= k_from to the first later sample with
/// k >= k_to, for the first rising transition in the log.
inline std::optional<double> transition_time(const ScenarioResult& r, double k_from, double k_to)
{
    std::optional<double> left;
    for (const auto& s : r.samples) {
        if (s.k <= k_from) {
            left = s.t;
        } else if (left && s.k >= k_to) {
            return s.t - *left;
        }
    }
    return std::nullopt;
}

// Energy -----------------------------------------------------------------

struct EnergyReport {
    double cost = 0.0;             // J supplied by motor 2
    std::vector<double> stored;    // J per sample
    double peak_stored = 0.0;
    double final_stored = 0.0;
    double cost_to_peak_stored = 0.0; // 0 when nothing was stored
};

inline EnergyReport energy_report(const ScenarioResult& r)
{
    EnergyReport e;
    e.stored.reserve(r.samples.size());
    for (const auto& s : r.samples) {
        e.stored.push_back(s.stored_energy);
        e.peak_stored = std::max(e.peak_stored, s.stored_energy);
    }
    if (!r.samples.empty()) {
        e.cost = r.samples.back().m2_energy_cost;
        e.final_stored = r.samples.back().stored_energy;
    }
    e.cost_to_peak_stored = e.peak_stored > 0.0 ? e.cost / e.peak_stored : 0.0;
    return e;
}

} // namespace vssea::experiments
