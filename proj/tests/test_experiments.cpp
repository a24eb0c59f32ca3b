#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "vssea/experiments.hpp"

using namespace vssea;
using namespace vssea::experiments;

namespace {

const std::vector<Scenario>& catalog()
{
    static const auto c = scenario_catalog();
    return c;
}

const std::map<std::string, ScenarioResult>& results()
{
    static const auto r = [] {
        std::map<std::string, ScenarioResult> m;
        for (auto& res : run_scenarios(catalog())) m.emplace(res.name, std::move(res));
        return m;
    }();
    return r;
}

const ScenarioResult& result(const std::string& n) { return results().at(n); }

} // namespace

TEST(Catalog, HasRequiredEntries)
{
    EXPECT_GE(catalog().size(), 14u);
    std::set<std::string> names;
    for (const auto& s : catalog()) {
        EXPECT_TRUE(names.insert(s.name).second) << "duplicate " << s.name;
        s.validate();
    }
    for (const char* n : {"fig9_stiff", "fig9_soft", "fig10_stiff", "fig10_soft", "fig11_soft_1hz_k0p5pi",
                          "fig11_stiff_0p1hz_k2pi", "fig12_soft_regulation", "fig12_stiff_tracking",
                          "fig13_slow", "fig13_fast", "fig14_stiff", "fig14_soft"}) {
        EXPECT_TRUE(names.count(n)) << n;
    }
    int fig11 = 0;
    int fig15 = 0;
    for (const auto& n : names) {
        fig11 += n.rfind("fig11_", 0) == 0;
        fig15 += n.rfind("fig15_", 0) == 0;
    }
    EXPECT_EQ(fig11, 8);
    EXPECT_GE(fig15, 1);
}

TEST(Catalog, SoftAndStiffStartAtCalibratedStiffness)
{
    EXPECT_NEAR(result("fig9_soft").samples.front().k, 21.0, 1e-6);
    EXPECT_NEAR(result("fig9_stiff").samples.front().k, 985.0, 1e-6);
}

TEST(RunScenario, ZeroReferenceIsQuiet)
{
    auto s = *find_scenario(catalog(), "fig15_equilibrium_stiff");
    const auto r = run_scenario(s);
    EXPECT_EQ(r.metrics.rms_error, 0.0);
    EXPECT_EQ(r.metrics.energy_cost, 0.0);
    EXPECT_EQ(r.samples.size(), static_cast<std::size_t>(s.control_steps()) + 1);
}

TEST(RunScenario, Reproducible)
{
    const auto s = *find_scenario(catalog(), "fig10_stiff");
    const auto a = run_scenario(s);
    const auto b = run_scenario(s);
    EXPECT_EQ(a.metrics.rms_error, b.metrics.rms_error);
    EXPECT_EQ(a.metrics.energy_cost, b.metrics.energy_cost);
    EXPECT_EQ(a.samples.back().state.q_l, b.samples.back().state.q_l);
    EXPECT_EQ(a.samples.back().state.q_l, result("fig10_stiff").samples.back().state.q_l);
}

TEST(RunScenario, RejectsBadTiming)
{
    auto s = catalog().front();
    s.physics_dt = 3e-4;
    EXPECT_THROW(run_scenario(s), PreconditionViolation);
    s = catalog().front();
    s.duration = 0.0;
    EXPECT_THROW(run_scenario(s), PreconditionViolation);
}

TEST(Results, LoggedChannelsFiniteAndBounded)
{
    for (const auto& [name, r] : results()) {
        const auto& sc = *find_scenario(catalog(), name);
        for (const auto& x : r.samples) {
            ASSERT_TRUE(x.state.finite()) << name;
            ASSERT_TRUE(std::isfinite(x.tau_s) && std::isfinite(x.tau_s_dis) && std::isfinite(x.k)) << name;
            EXPECT_LE(std::abs(x.tau_m2_cmd), sc.params.tau_m2_max) << name;
            EXPECT_LE(std::abs(x.tau_m1_cmd), sc.params.tau_m1_max) << name;
            EXPECT_GE(x.stored_energy, 0.0) << name;
            EXPECT_GE(x.m2_energy_cost, 0.0) << name;
        }
        EXPECT_LE(r.metrics.longest_m2_saturation, 0.5) << name;
    }
}

TEST(Results, MetricsRecomputeFromSeries)
{
    for (const auto& [name, r] : results()) {
        double sq = 0.0;
        for (const auto& x : r.samples) sq += (x.reference - x.measured) * (x.reference - x.measured);
        EXPECT_NEAR(std::sqrt(sq / r.samples.size()), r.metrics.rms_error, 1e-12) << name;
        const auto again = compute_metrics(r.samples, r.control_dt);
        EXPECT_EQ(again.rms_error, r.metrics.rms_error);
        EXPECT_EQ(again.energy_cost, r.metrics.energy_cost);
    }
}

TEST(Results, CostIsCumulative)
{
    for (const auto& [name, r] : results()) {
        for (std::size_t i = 1; i < r.samples.size(); ++i) {
            ASSERT_GE(r.samples[i].m2_energy_cost, r.samples[i - 1].m2_energy_cost) << name;
        }
    }
}

TEST(RunScenarios, ParallelMatchesSerial)
{
    std::vector<Scenario> few(catalog().begin(), catalog().begin() + 4);
    const auto par = run_scenarios(few, 4);
    for (std::size_t i = 0; i < few.size(); ++i) {
        EXPECT_EQ(par[i].name, few[i].name);
        EXPECT_EQ(par[i].metrics.rms_error, run_scenario(few[i]).metrics.rms_error);
    }
}

TEST(Trends, MotorLoopIsBlindToLinkLoad)
{
    const auto& r = result("fig9_stiff");
    const auto& last = r.samples.back();
    EXPECT_NEAR(last.q_g, 0.5 * std::numbers::pi, 0.01);
    const auto before = r.samples[static_cast<std::size_t>(1.9 / r.control_dt)];
    EXPECT_GT(std::abs(last.state.q_l - last.q_g), 5.0 * std::abs(before.state.q_l - before.q_g));
}

TEST(Trends, SoftModeDeviatesMoreUnderEqualLoad)
{
    const auto stiff = run_scenario(motor_pid_scenario({}, true, 5.0));
    const auto& soft = result("fig9_soft");
    EXPECT_GT(soft.metrics.steady_link_deviation, stiff.metrics.steady_link_deviation);
}

TEST(Trends, TrackingErrorRanking)
{
    const double soft_fast = result("fig11_soft_1hz_k0p5pi").metrics.rms_error;
    const double soft_slow = result("fig11_soft_0p1hz_k0p5pi").metrics.rms_error;
    const double stiff_fast = result("fig11_stiff_1hz_k0p5pi").metrics.rms_error;
    EXPECT_GT(soft_fast, soft_slow);
    EXPECT_LT(stiff_fast, soft_fast);
}

TEST(Trends, LinkLoopOvershootLargerInSoftMode)
{
    EXPECT_GT(result("fig10_soft").metrics.max_overshoot, result("fig10_stiff").metrics.max_overshoot);
}

TEST(Sweeps, FastSweepCoversRangeWithinASecond)
{
    const auto t = transition_time(result("fig13_fast"), 21.0 * 1.01, 985.0 * 0.99);
    ASSERT_TRUE(t.has_value());
    EXPECT_LE(*t, 1.0);
}

TEST(Sweeps, ModulationBandIsTenPercent)
{
    for (bool stiff : {false, true}) {
        const auto [lo, hi] = modulation_band(stiff);
        const double nominal = 0.5 * (lo + hi);
        EXPECT_NEAR(hi / nominal, 1.1, 1e-12);
        EXPECT_NEAR(lo / nominal, 0.9, 1e-12);
        EXPECT_GE(lo, 21.0 - 1e-12);
        EXPECT_LE(hi, 985.0 + 1e-12);
    }
    const auto& r = result("fig14_soft");
    double kmin = 1e9, kmax = 0.0;
    for (const auto& x : r.samples) {
        if (x.t > 3.0) {
            kmin = std::min(kmin, x.k);
            kmax = std::max(kmax, x.k);
        }
        if (x.t > 1.5) {
            EXPECT_GT(std::abs(x.state.q_l - x.q_g), 0.0);
        }
    }
    EXPECT_GT(kmax / kmin, 1.1);
}

TEST(Energy, HoldAtEquilibriumCostsNothing)
{
    for (const char* n : {"fig15_equilibrium_soft", "fig15_equilibrium_stiff"}) {
        const auto e = energy_report(result(n));
        EXPECT_EQ(e.cost, 0.0) << n;
        EXPECT_EQ(e.peak_stored, 0.0) << n;
    }
}

TEST(Energy, FasterEquilibriumSweepCostsMore)
{
    EXPECT_GT(energy_report(result("fig13_fast")).cost, energy_report(result("fig13_slow")).cost);
}

TEST(Energy, SoftModulationCostsMoreThanStiff)
{
    EXPECT_GT(energy_report(result("fig14_soft")).cost, energy_report(result("fig14_stiff")).cost);
}

TEST(Energy, ReportSeriesMatchesLog)
{
    const auto& r = result("fig14_soft");
    const auto e = energy_report(r);
    ASSERT_EQ(e.stored.size(), r.samples.size());
    EXPECT_EQ(e.final_stored, r.samples.back().stored_energy);
    EXPECT_GT(e.peak_stored, 0.0);
    EXPECT_GT(e.cost_to_peak_stored, 0.0);
}

TEST(CompareModels, EquilibriumRowAndTrend)
{
    const auto& v = catalog().front().params.vsam;
    const auto xs = linspace(v.x_min, v.x_max, 8);
    const std::vector<double> qs{0.0, 5.0 * vsam::degrees, 20.0 * vsam::degrees, 25.0 * vsam::degrees,
                                 -25.0 * vsam::degrees};
    const auto rows = compare_models_sweep(v, qs, xs);
    ASSERT_EQ(rows.size(), qs.size() * xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto& r0 = rows[i * qs.size()];
        EXPECT_EQ(r0.torque_large, 0.0);
        EXPECT_EQ(r0.torque_small, 0.0);
        EXPECT_NEAR(r0.stiffness_large, r0.stiffness_small, 1e-4 * r0.stiffness_small);
        auto gap = [&](const SweepRow& r) { return std::abs(r.torque_small - r.torque_large) / std::abs(r.torque_large); };
        EXPECT_GT(gap(rows[i * qs.size() + 2]), gap(rows[i * qs.size() + 1]));
    }
    for (const auto& r : rows) {
        EXPECT_TRUE(std::isfinite(r.torque_large) && std::isfinite(r.stiffness_large) &&
                    std::isfinite(r.disturbance_large) && std::isfinite(r.disturbance_small));
    }
    EXPECT_THROW(compare_models_sweep(v, qs, {0.5 * v.x_min}), PreconditionViolation);
}

TEST(CompareModels, Linspace)
{
    const auto v = linspace(1.0, 2.0, 5);
    ASSERT_EQ(v.size(), 5u);
    EXPECT_EQ(v.front(), 1.0);
    EXPECT_EQ(v.back(), 2.0);
    EXPECT_DOUBLE_EQ(v[2], 1.5);
}

TEST(LargeDeflectionModel, ShortScenarioRuns)
{
    CatalogOptions o;
    o.params.model = vsam::StiffnessModel::LargeDeflection;
    auto s = force_scenario(o, false, false);
    s.duration = 1.0;
    const auto r = run_scenario(s);
    EXPECT_GT(r.samples.back().stored_energy, 0.0);
    EXPECT_GT(r.metrics.peak_disturbance, 0.0);
}
