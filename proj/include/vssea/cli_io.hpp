#pragma once

// Flat `section.key = value` configuration layers, CSV and metrics output, and
// the command-line entry point.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "vssea/errors.hpp"
#include "vssea/experiments.hpp"
#include "vssea/validation.hpp"

namespace vssea::cli {

/// One override layer: key -> raw value text.
using Layer = std::map<std::string, std::string>;

/// Later layers win.
inline Layer merge(const Layer& lower, const Layer& upper)
{
    Layer out = lower;
    for (const auto& [k, v] : upper) {
        out[k] = v;
    }
    return out;
}

struct RunConfig {
    dynamics::ActuatorParams actuator;
    bool calibrate = true;
    vsam::CalibrationTargets targets;
    std::string scenario;
    std::string output_dir = ".";
    double physics_dt = 1e-4;
    double control_dt = 1e-3;

    experiments::CatalogOptions catalog_options() const { return {actuator, physics_dt, control_dt}; }
};

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline bool valid_key(const std::string& k)
{
    if (k.empty() || k.front() == '.' || k.back() == '.') {
        return false;
    }
    for (char c : k) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) {
            return false;
        }
    }
    return true;
}

inline const std::vector<std::string>& known_keys()
{
    static const std::vector<std::string> keys = {
        "actuator.J_m1", "actuator.J_g", "actuator.J_m2", "actuator.J_l",
        "actuator.b_m1", "actuator.b_g", "actuator.b_m2", "actuator.b_l",
        "actuator.gear_ratio", "actuator.tau_m1_max", "actuator.tau_m2_max",
        "actuator.end_stop_stiffness", "actuator.model",
        "vsam.youngs_modulus", "vsam.area_moment", "vsam.full_length", "vsam.spring_count",
        "vsam.moment_arm", "vsam.screw_lead", "vsam.x_min", "vsam.x_max",
        "vsam.deflection_limit_deg", "vsam.calibrate", "vsam.k_soft", "vsam.k_stiff",
        "solver.residual_tol", "solver.max_iterations", "solver.quadrature_points",
        "sim.physics_dt", "sim.control_dt",
        "run.scenario", "run.output_dir",
    };
    return keys;
}

inline bool is_known(const std::string& key)
{
    const auto& keys = known_keys();
    return std::find(keys.begin(), keys.end(), key) != keys.end();
}

inline double to_double(const std::string& key, const std::string& v)
{
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end) {
        throw ValidationError(key.substr(0, key.find('.')), key + " must be a number, got '" + v + "'");
    }
    return out;
}

inline int to_int(const std::string& key, const std::string& v)
{
    int out = 0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end) {
        throw ValidationError(key.substr(0, key.find('.')), key + " must be an integer, got '" + v + "'");
    }
    return out;
}

inline bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ValidationError(key.substr(0, key.find('.')), key + " must be true or false");
}

inline void require(bool ok, const char* module, const std::string& invariant)
{
    if (!ok) {
        throw ValidationError(module, invariant);
    }
}

} // namespace detail

/// Parses one layer. Blank lines and `#` comments are skipped.
inline Layer parse_layer(std::istream& in)
{
    Layer out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        const std::string body = detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            const auto col = static_cast<int>(line.find_first_not_of(" \t")) + 1;
            throw ParseError("expected 'key = value'", line_no, col);
        }
        const std::string key = detail::trim(body.substr(0, eq));
        const std::string value = detail::trim(body.substr(eq + 1));
        if (!detail::valid_key(key)) {
            throw ParseError("malformed key '" + key + "'", line_no,
                             static_cast<int>(line.find_first_not_of(" \t")) + 1);
        }
        if (value.empty()) {
            throw ParseError("missing value for '" + key + "'", line_no, static_cast<int>(line.find('=')) + 2);
        }
        if (!detail::is_known(key)) {
            throw UnknownKey(key);
        }
        if (out.count(key)) {
            throw ParseError("duplicate key '" + key + "'", line_no, 1);
        }
        out[key] = value;
    }
    return out;
}

inline Layer parse_layer(const std::string& text)
{
    std::istringstream in(text);
    return parse_layer(in);
}

inline Layer read_layer(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file " + path.string());
    }
    return parse_layer(in);
}

/// `key=value` strings from the command line.
inline Layer parse_overrides(const std::vector<std::string>& items)
{
    std::string text;
    for (const auto& s : items) {
        text += s;
        text += '\n';
    }
    return parse_layer(text);
}

inline std::string default_output_dir()
{
    const char* env = std::getenv("VSSEA_OUT_DIR");
    return env && *env ? std::string(env) : std::string(".");
}

/// Turns a merged layer into a validated configuration on top of the defaults.
inline RunConfig build_config(const Layer& layer)
{
    using detail::require;
    RunConfig c;
    c.output_dir = default_output_dir();
    auto& a = c.actuator;
    vsam::VsamConfig v{};
    for (const auto& [key, value] : layer) {
        if (!detail::is_known(key)) {
            throw UnknownKey(key);
        }
    }
    auto num = [&](const char* key, double& dst) {
        if (auto it = layer.find(key); it != layer.end()) dst = detail::to_double(key, it->second);
    };
    num("actuator.J_m1", a.J_m1);
    num("actuator.J_g", a.J_g);
    num("actuator.J_m2", a.J_m2);
    num("actuator.J_l", a.J_l);
    num("actuator.b_m1", a.b_m1);
    num("actuator.b_g", a.b_g);
    num("actuator.b_m2", a.b_m2);
    num("actuator.b_l", a.b_l);
    num("actuator.gear_ratio", a.gear_ratio);
    num("actuator.tau_m1_max", a.tau_m1_max);
    num("actuator.tau_m2_max", a.tau_m2_max);
    num("actuator.end_stop_stiffness", a.end_stop_stiffness);
    if (auto it = layer.find("actuator.model"); it != layer.end()) {
        if (it->second == "small") a.model = vsam::StiffnessModel::SmallDeflection;
        else if (it->second == "large") a.model = vsam::StiffnessModel::LargeDeflection;
        else throw ValidationError("actuator", "actuator.model must be 'small' or 'large'");
    }
    num("vsam.youngs_modulus", v.beam.youngs_modulus);
    num("vsam.area_moment", v.beam.area_moment);
    num("vsam.full_length", v.beam.full_length);
    num("vsam.moment_arm", v.moment_arm);
    num("vsam.screw_lead", v.screw_lead);
    num("vsam.x_min", v.x_min);
    num("vsam.x_max", v.x_max);
    if (auto it = layer.find("vsam.spring_count"); it != layer.end()) {
        v.spring_count = detail::to_int(it->first, it->second);
    }
    if (auto it = layer.find("vsam.deflection_limit_deg"); it != layer.end()) {
        v.deflection_limit = detail::to_double(it->first, it->second) * vsam::degrees;
    }
    if (auto it = layer.find("vsam.calibrate"); it != layer.end()) {
        c.calibrate = detail::to_bool(it->first, it->second);
    }
    num("vsam.k_soft", c.targets.k_soft);
    num("vsam.k_stiff", c.targets.k_stiff);
    num("solver.residual_tol", v.solver.residual_tol);
    if (auto it = layer.find("solver.max_iterations"); it != layer.end()) {
        v.solver.max_iterations = detail::to_int(it->first, it->second);
    }
    if (auto it = layer.find("solver.quadrature_points"); it != layer.end()) {
        v.solver.quadrature_points = detail::to_int(it->first, it->second);
    }
    num("sim.physics_dt", c.physics_dt);
    num("sim.control_dt", c.control_dt);
    if (auto it = layer.find("run.scenario"); it != layer.end()) c.scenario = it->second;
    if (auto it = layer.find("run.output_dir"); it != layer.end()) c.output_dir = it->second;

    require(v.beam.youngs_modulus > 0.0, "vsam", "youngs_modulus > 0");
    require(v.beam.area_moment > 0.0, "vsam", "area_moment > 0");
    require(v.beam.full_length > 0.0, "vsam", "full_length > 0");
    require(v.spring_count >= 1, "vsam", "spring_count >= 1");
    require(v.moment_arm > 0.0, "vsam", "moment_arm > 0");
    require(v.screw_lead > 0.0, "vsam", "screw_lead > 0");
    require(v.deflection_limit > 0.0 && v.deflection_limit < std::numbers::pi / 2.0, "vsam",
            "0 < deflection_limit < 90 deg");
    require(v.solver.residual_tol > 0.0, "solver", "residual_tol > 0");
    require(v.solver.max_iterations >= 1, "solver", "max_iterations >= 1");
    require(v.solver.quadrature_points >= 16, "solver", "quadrature_points >= 16");
    require(c.targets.k_soft > 0.0 && c.targets.k_stiff > c.targets.k_soft, "vsam", "0 < k_soft < k_stiff");
    if (c.calibrate) {
        try {
            v = vsam::calibrate(v, c.targets);
        } catch (const InfeasibleGeometry& e) {
            throw ValidationError("vsam", std::string("x_min >= 5 mm after calibration (") + e.what() + ")");
        }
    }
    require(v.x_min > 0.0 && v.x_min < v.x_max && v.x_max <= v.beam.full_length, "vsam",
            "0 < x_min < x_max <= full_length");
    a.vsam = v;

    require(a.J_m1 > 0.0 && a.J_l > 0.0 && a.J_m2 > 0.0, "actuator", "J_m1, J_l, J_m2 > 0");
    require(a.J_g >= 0.0, "actuator", "J_g >= 0");
    require(a.b_m1 >= 0.0 && a.b_g >= 0.0 && a.b_m2 >= 0.0 && a.b_l >= 0.0, "actuator", "dampings >= 0");
    require(a.gear_ratio >= 1.0, "actuator", "gear_ratio >= 1");
    require(a.tau_m1_max > 0.0 && a.tau_m2_max > 0.0, "actuator", "torque limits > 0");
    require(a.end_stop_stiffness >= 0.0, "actuator", "end_stop_stiffness >= 0");

    require(c.physics_dt > 0.0, "sim", "physics_dt > 0");
    require(c.control_dt > 0.0, "sim", "control_dt > 0");
    const double ratio = c.control_dt / c.physics_dt;
    require(std::lround(ratio) >= 1 && std::abs(ratio - std::lround(ratio)) <= 1e-9 * ratio, "sim",
            "control_dt is an integer multiple of physics_dt");
    return c;
}

/// defaults + file + overrides.
inline RunConfig load_config(const std::filesystem::path& path, const Layer& overrides = {})
{
    return build_config(merge(read_layer(path), overrides));
}

// CSV ---------------------------------------------------------------------

inline const std::vector<std::string>& csv_columns()
{
    static const std::vector<std::string> cols = {
        "t", "q_m1", "q_g", "q_l", "q_m2", "qd_m1", "qd_l", "qd_m2", "tau_m1_cmd", "tau_m2_cmd",
        "tau_s", "tau_s_dis", "k", "stored_energy", "m2_energy_cost"};
    return cols;
}

inline std::vector<double> csv_row(const experiments::Sample& s)
{
    return {s.t, s.state.q_m1, s.q_g, s.state.q_l, s.state.q_m2, s.state.qd_m1, s.state.qd_l,
            s.state.qd_m2, s.tau_m1_cmd, s.tau_m2_cmd, s.tau_s, s.tau_s_dis, s.k, s.stored_energy,
            s.m2_energy_cost};
}

inline void write_csv(const experiments::ScenarioResult& result, const std::filesystem::path& path)
{
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f) {
        throw IoError("cannot write " + path.string());
    }
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) {
        std::fprintf(f, i ? ",%s" : "%s", cols[i].c_str());
    }
    std::fputc('\n', f);
    for (const auto& s : result.samples) {
        const auto row = csv_row(s);
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::fprintf(f, i ? ",%.9g" : "%.9g", row[i]);
        }
        std::fputc('\n', f);
    }
    const bool failed = std::ferror(f) != 0;
    if (std::fclose(f) != 0 || failed) {
        throw IoError("error while writing " + path.string());
    }
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

inline CsvTable read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) {
        return t;
    }
    std::stringstream hs(line);
    for (std::string cell; std::getline(hs, cell, ',');) {
        t.header.push_back(cell);
    }
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<double> row;
        std::stringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) {
            row.push_back(std::strtod(cell.c_str(), nullptr));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline nlohmann::json metrics_json(const experiments::ScenarioResult& r)
{
    const auto& m = r.metrics;
    return {{"scenario", r.name},
            {"samples", r.samples.size()},
            {"rms_error", m.rms_error},
            {"max_overshoot", m.max_overshoot},
            {"settling_time", m.settling_time},
            {"steady_error", m.steady_error},
            {"steady_link_deviation", m.steady_link_deviation},
            {"peak_disturbance_torque", m.peak_disturbance},
            {"energy_cost", m.energy_cost},
            {"longest_m2_saturation", m.longest_m2_saturation}};
}

inline void write_metrics(const experiments::ScenarioResult& r, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << metrics_json(r).dump(2) << '\n';
    if (!out) {
        throw IoError("error while writing " + path.string());
    }
}

inline void write_sweep_csv(const std::vector<experiments::SweepRow>& rows, const std::filesystem::path& path)
{
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f) {
        throw IoError("cannot write " + path.string());
    }
    std::fprintf(f, "x_r,q_rel,tau_large,tau_small,k_large,k_small,tau_dis_large,tau_dis_small\n");
    for (const auto& r : rows) {
        std::fprintf(f, "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.roller_position, r.deflection,
                     r.torque_large, r.torque_small, r.stiffness_large, r.stiffness_small,
                     r.disturbance_large, r.disturbance_small);
    }
    if (std::fclose(f) != 0) {
        throw IoError("error while writing " + path.string());
    }
}

// Command line --------------------------------------------------------------

inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_usage = 2;

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr)
{
    CLI::App app{"Variable stiffness series elastic actuator simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> sets;
    std::string out_dir;
    std::string scenario;

    auto* run = app.add_subcommand("run", "Run one catalog scenario, write <name>.csv and <name>_metrics.json");
    run->add_option("scenario", scenario, "Scenario name (see `catalog`)")->required();
    run->add_option("--config", config_path, "Config file")->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory (default $VSSEA_OUT_DIR or .)");
    run->add_option("--set", sets, "key=value override, repeatable");

    auto* catalog = app.add_subcommand("catalog", "List scenario names");
    catalog->add_option("--config", config_path, "Config file")->check(CLI::ExistingFile);

    auto* sweep = app.add_subcommand("sweep-static", "Tabulate large vs small deflection models");
    sweep->add_option("--config", config_path, "Config file")->check(CLI::ExistingFile);
    sweep->add_option("--out", out_dir, "Output directory");
    sweep->add_option("--set", sets, "key=value override, repeatable");

    auto* validate = app.add_subcommand("validate", "Run solver oracle and gradient checks");
    validate->add_option("--config", config_path, "Config file")->check(CLI::ExistingFile);
    validate->add_option("--set", sets, "key=value override, repeatable");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n\n" << app.help();
        return exit_usage;
    }

    RunConfig cfg;
    try {
        const Layer file = config_path.empty() ? Layer{} : read_layer(config_path);
        cfg = build_config(merge(file, parse_overrides(sets)));
    } catch (const ParseError& e) {
        err << "config: " << e.what() << " (line " << e.line() << ", column " << e.column() << ")\n";
        return exit_failure;
    } catch (const Error& e) {
        err << "config: " << e.what() << '\n';
        return exit_failure;
    }
    if (!out_dir.empty()) {
        cfg.output_dir = out_dir;
    }

    try {
        if (*catalog) {
            for (const auto& s : experiments::scenario_catalog(cfg.catalog_options())) {
                out << s.name << "  " << s.description << '\n';
            }
            return exit_ok;
        }
        if (*run) {
            const auto list = experiments::scenario_catalog(cfg.catalog_options());
            const auto sc = experiments::find_scenario(list, scenario);
            if (!sc) {
                err << "unknown scenario '" << scenario << "'; run `catalog` for the list\n";
                return exit_usage;
            }
            const auto result = experiments::run_scenario(*sc);
            std::filesystem::create_directories(cfg.output_dir);
            const auto dir = std::filesystem::path(cfg.output_dir);
            write_csv(result, dir / (sc->name + ".csv"));
            write_metrics(result, dir / (sc->name + "_metrics.json"));
            out << metrics_json(result).dump(2) << '\n';
            return exit_ok;
        }
        if (*sweep) {
            const auto& v = cfg.actuator.vsam;
            const auto rows = experiments::compare_models_sweep(
                v, experiments::linspace(-v.deflection_limit, v.deflection_limit, 51),
                experiments::linspace(v.x_min, v.x_max, 20));
            std::filesystem::create_directories(cfg.output_dir);
            const auto path = std::filesystem::path(cfg.output_dir) / "sweep_static.csv";
            write_sweep_csv(rows, path);
            out << "wrote " << rows.size() << " rows to " << path.string() << '\n';
            return exit_ok;
        }
        if (*validate) {
            bool all = true;
            for (const auto& c : validation::run_checks(cfg.actuator.vsam)) {
                char line[160];
                std::snprintf(line, sizeof line, "[%s] %s  (%.3g, tol %.1g)\n", c.passed ? "PASS" : "FAIL",
                              c.name.c_str(), c.value, c.tolerance);
                out << line;
                all = all && c.passed;
            }
            return all ? exit_ok : exit_failure;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_failure;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_failure;
    }
    return exit_usage;
}

} // namespace vssea::cli
