#include "mechsql/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string_view>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "mechsql/config_io.hpp"
#include "mechsql/error.hpp"
#include "mechsql/langevin.hpp"
#include "mechsql/reducer.hpp"
#include "mechsql/resolution.hpp"
#include "mechsql/spectra.hpp"
#include "mechsql/sweep.hpp"
#include "mechsql/version.hpp"

namespace mechsql {

namespace {

enum class Format { csv, jsonl };

struct Common {
    std::string config_path;
    std::vector<std::string> sets;
    std::string out_path;
    std::string format = "csv";
    std::uint64_t seed = 1;
    int workers = 1;

    Format fmt() const { return format == "jsonl" ? Format::jsonl : Format::csv; }
};

struct Header {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string config_text;
};

class Emitter {
public:
    Emitter(std::ostream& out, Format format) : out_(out), format_(format) {}

    void header(const Header& h)
    {
        if (format_ == Format::csv) {
            out_ << "# mechsql " << version << '\n';
            out_ << "# command: " << h.command << '\n';
            out_ << "# config_hash: " << h.config_hash << '\n';
            out_ << "# seed: " << h.seed << '\n';
            out_ << "# config:\n";
            std::istringstream lines(h.config_text);
            for (std::string line; std::getline(lines, line);)
                out_ << "#   " << line << '\n';
        } else {
            nlohmann::ordered_json j;
            j["record"] = "header";
            j["tool"] = "mechsql";
            j["version"] = version;
            j["command"] = h.command;
            j["config_hash"] = h.config_hash;
            j["seed"] = h.seed;
            auto cfg = nlohmann::ordered_json::array();
            std::istringstream lines(h.config_text);
            for (std::string line; std::getline(lines, line);)
                cfg.push_back(line);
            j["config"] = cfg;
            out_ << j.dump() << '\n';
        }
    }

    void table(const Table& t, const std::string& name)
    {
        if (format_ == Format::csv) {
            out_ << "# table: " << name << '\n';
            write_csv(out_, t);
            out_ << '\n';
        } else {
            write_jsonl(out_, t, name);
        }
    }

private:
    std::ostream& out_;
    Format format_;
};

struct KeyValue {
    std::string quantity;
    Cell value;
    std::string unit;
};

Table kv_table(const std::vector<KeyValue>& items)
{
    Table t;
    t.columns = {"quantity", "value", "unit"};
    for (const auto& kv : items)
        t.add_row({kv.quantity, kv.value, kv.unit});
    return t;
}

Table regime_table(const RegimeReport& report)
{
    Table t;
    t.columns = {"check", "ratio", "threshold", "pass"};
    for (const auto& c : report.checks)
        t.add_row({c.name, c.ratio, c.threshold, c.pass});
    return t;
}

void add_common(CLI::App* sub, Common& c, bool with_config = true)
{
    if (with_config) {
        sub->add_option("--config", c.config_path, "Config file (default: built-in parameter set)");
        sub->add_option("--set", c.sets, "Override KEY=VALUE [unit], applied after the file");
    }
    sub->add_option("--out", c.out_path, "Output file (default: stdout)");
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "jsonl"}));
    sub->add_option("--seed", c.seed, "Random seed");
    sub->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
}

ModelConfig load(const Common& c)
{
    if (c.config_path.empty())
        return parse_config(default_config_text(), c.sets);
    return load_config_file(c.config_path, c.sets);
}

Header header_for(const std::string& command, const ModelConfig& cfg, std::uint64_t seed)
{
    return {command, config_hash(cfg), seed, format_config(cfg)};
}

std::vector<double> log_grid(double lo, double hi, int n)
{
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        v[k] = n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1));
    return v;
}

std::vector<KeyValue> derived_items(const DerivedQuantities& d)
{
    std::vector<KeyValue> kv{
        {"omega_m", d.omega_m, "rad/s"},
        {"gamma_m", d.gamma_m, "rad/s"},
        {"n_th", d.n_th, ""},
        {"omega_s", d.omega_s, "rad/s"},
        {"gamma_c", d.gamma_c, "rad/s"},
        {"gamma_d", d.gamma_d, "rad/s"},
        {"G_0", d.G_0, "rad/s"},
        {"c_bar", d.c_bar, ""},
        {"photons", d.c_bar * d.c_bar, ""},
        {"driven_mode", std::string(to_string(d.driven_mode)), ""},
        {"idle_detuning", d.idle_detuning(), "rad/s"},
        {"K_spring", d.K_spring, "rad/s"},
        {"omega_eff_sq", d.omega_eff_sq, "rad^2/s^2"},
        {"omega_eff", d.omega_eff, "rad/s"},
        {"Lambda", d.Lambda, ""},
        {"G_eff", d.G_eff, "rad/s"},
        {"threshold_photons", d.threshold_photons, ""},
        {"stable", d.stable(), ""},
    };
    if (d.optics) {
        const auto& o = *d.optics;
        const std::vector<KeyValue> optics{
            {"x_q", o.x_q, "m"},
            {"omega_0", o.omega_0, "rad/s"},
            {"t_m", o.t_m, ""},
            {"t0_sq", o.t0_sq, ""},
            {"I_0", o.I_0, "W"},
            {"I_0_instability", o.I_0_instability, "W"},
            {"I_0_optimal_spring", o.I_0_optimal_spring, "W"},
            {"subcavity_G_0", o.subcavity.G_0, "rad/s"},
            {"subcavity_omega_s", o.subcavity.omega_s, "rad/s"},
            {"subcavity_gamma_c", o.subcavity.gamma_c, "rad/s"},
        };
        kv.insert(kv.end(), optics.begin(), optics.end());
    }
    const double nan = std::nan("");
    double tm = nan;
    try {
        tm = measurement_time(d);
    } catch (const ZeroSignal&) {
    }
    kv.push_back({"measurement_time", tm, "s"});
    kv.push_back({"decoherence_rate", decoherence_rate(d), "rad/s"});
    return kv;
}

std::vector<KeyValue> report_items(const FeasibilityReport& r)
{
    return {
        {"sql_ratio", r.sql_ratio, ""},
        {"finesse_form", r.finesse_form, ""},
        {"sql_ok", r.sql_ok, ""},
        {"finesse_ok", r.finesse_ok, ""},
        {"min_resolution", r.min_resolution, ""},
        {"dn_min", std::sqrt(r.min_resolution), ""},
        {"tau_star", r.tau_star, "s"},
        {"tau_error", r.tau_error, ""},
        {"condition_i", r.condition_i, ""},
        {"condition_ii", r.condition_ii, ""},
        {"condition_iii", r.condition_iii, ""},
        {"storage_time", r.storage_time, "s"},
        {"oscillation_time", r.oscillation_time, "s"},
        {"omega_eff_sq", r.omega_eff_sq, "rad^2/s^2"},
        {"thermal_constraint_lhs", r.thermal_constraint_lhs, ""},
        {"thermal_constraint_rhs", r.thermal_constraint_rhs, ""},
        {"thermal_constraint_ok", r.thermal_constraint_ok, ""},
        {"omega_eff_opt", r.omega_eff_opt, "rad/s"},
        {"regime_ok", r.regime_ok, ""},
        {"feasible", r.feasible, ""},
    };
}

std::string error_line(const Error& e, int code)
{
    nlohmann::ordered_json j;
    j["error"] = e.kind();
    j["message"] = e.what();
    j["exit_code"] = code;
    if (const auto* c = dynamic_cast<const ConfigError*>(&e); c && c->line() > 0)
        j["line"] = c->line();
    if (const auto* u = dynamic_cast<const UnstableSpring*>(&e)) {
        j["threshold_photons"] = u->threshold_photons();
        if (std::isfinite(u->threshold_power()))
            j["threshold_power"] = u->threshold_power();
    }
    return j.dump();
}

std::string plain_error_line(std::string_view kind, const std::string& message, int code)
{
    nlohmann::ordered_json j;
    j["error"] = kind;
    j["message"] = message;
    j["exit_code"] = code;
    return j.dump();
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Energy-quantization readout limits for membrane-in-the-middle optomechanics", "mechsql"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);

    Common c;

    // derive
    bool allow_unstable = false;
    auto* derive_cmd = app.add_subcommand("derive", "Derived rates, couplings and regime checks");
    add_common(derive_cmd, c);
    derive_cmd->add_flag("--allow-unstable", allow_unstable, "Report an unstable spring instead of failing");

    // analyze
    double tau_min = 0.0, tau_max = 0.0, slack = 1.0;
    int tau_points = 0;
    std::string thermal_form = "omega_eff";
    auto* analyze_cmd = app.add_subcommand("analyze", "Resolution curve and feasibility report");
    add_common(analyze_cmd, c);
    analyze_cmd->add_option("--tau-min", tau_min, "Smallest tau of the curve, s");
    analyze_cmd->add_option("--tau-max", tau_max, "Largest tau of the curve, s");
    analyze_cmd->add_option("--tau-points", tau_points, "Points on the curve (default 200)");
    analyze_cmd->add_option("--slack", slack, "Slack factor on the inequalities")->check(CLI::PositiveNumber);
    analyze_cmd->add_option("--thermal-form", thermal_form, "Thermal normalization")
        ->check(CLI::IsMember({"omega_eff", "omega_m"}));

    // spectra
    double omega_min = 0.0, omega_max = 0.0;
    int spectrum_points = 400;
    std::string spectrum_scale = "log";
    auto* spectra_cmd = app.add_subcommand("spectra", "Radiation-pressure transfer functions and back-action spectrum");
    add_common(spectra_cmd, c);
    spectra_cmd->add_option("--omega-min", omega_min, "Lowest frequency, rad/s");
    spectra_cmd->add_option("--omega-max", omega_max, "Highest frequency, rad/s");
    spectra_cmd->add_option("--points", spectrum_points, "Grid points");
    spectra_cmd->add_option("--scale", spectrum_scale, "Grid spacing")->check(CLI::IsMember({"log", "linear"}));

    // simulate
    SimConfig sim;
    std::string mode = "adiabatic";
    std::vector<double> taus;
    int sim_tau_points = 8;
    int dump = 0;
    std::string dump_out;
    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo resolution of the N estimator");
    add_common(simulate_cmd, c);
    simulate_cmd->add_option("--trials", sim.n_trials, "Independent trials")->check(CLI::Range(2, 100000000));
    simulate_cmd->add_option("--mode", mode, "Integrator")->check(CLI::IsMember({"full", "adiabatic"}));
    simulate_cmd->add_option("--dt", sim.dt, "Time step, s (default: largest admissible)");
    simulate_cmd->add_option("--tau", taus, "Readout times, s")->delimiter(',');
    simulate_cmd->add_option("--tau-min", tau_min, "Smallest readout time of a log grid, s");
    simulate_cmd->add_option("--tau-max", tau_max, "Largest readout time of a log grid, s");
    simulate_cmd->add_option("--tau-points", sim_tau_points, "Points of the log grid")->check(CLI::PositiveNumber);
    simulate_cmd->add_option("--n-true", sim.n_true, "Initial quantum number");
    simulate_cmd->add_option("--vacuum-scale", sim.vacuum_noise_scale, "Vacuum density is this / 2");
    simulate_cmd->add_option("--dump-trajectories", dump, "Also write the first K trajectories");
    simulate_cmd->add_option("--dump-out", dump_out, "File for dumped trajectories (default: main output)");
    simulate_cmd->add_option("--stride", sim.record_stride, "Record every N steps in dumps")->check(CLI::PositiveNumber);

    // reduce
    std::string system_path;
    double dispersive_threshold = 0.1;
    auto* reduce_cmd = app.add_subcommand("reduce", "Reduce a parametric system to its tripartite equivalent");
    add_common(reduce_cmd, c, false);
    reduce_cmd->add_option("--system", system_path, "System description file")->required();
    reduce_cmd->add_option("--threshold", dispersive_threshold, "Dispersive/adiabatic ratio threshold");

    // sweep
    std::vector<std::string> axes;
    bool json = false;
    auto* sweep_cmd = app.add_subcommand("sweep", "Feasibility over a 1D or 2D parameter grid");
    add_common(sweep_cmd, c);
    sweep_cmd->add_option("--axis", axes, "name:scale:min:max:n (SI units), up to two")->required();
    sweep_cmd->add_flag("--json", json, "Same as --format jsonl");
    sweep_cmd->add_option("--slack", slack, "Slack factor on the inequalities")->check(CLI::PositiveNumber);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::CallForVersion&) {
        out << version << '\n';
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << plain_error_line("UsageError", e.what(), exit_usage) << '\n';
        return exit_usage;
    }

    std::ostringstream buffer;
    std::ostringstream dump_buffer;
    try {
        if (json)
            c.format = "jsonl";
        Emitter emit(buffer, c.fmt());

        if (derive_cmd->parsed()) {
            const auto cfg = load(c);
            const auto d = derive(cfg, allow_unstable);
            emit.header(header_for("derive", cfg, c.seed));
            emit.table(kv_table(derived_items(d)), "derived");
            emit.table(regime_table(validate_regime(d)), "regime");
        } else if (analyze_cmd->parsed()) {
            const auto cfg = load(c);
            const auto d = derive(cfg, true);
            FeasibilityOptions opts;
            opts.slack = slack;
            opts.resolution.thermal_form = thermal_form == "omega_m" ? ThermalForm::omega_m : ThermalForm::omega_eff;
            const auto r = feasibility_report(d, opts);
            emit.header(header_for("analyze", cfg, c.seed));
            emit.table(kv_table(report_items(r)), "report");
            emit.table(regime_table(validate_regime(d, opts.margins)), "regime");
            if (d.stable()) {
                const double centre = std::isfinite(r.tau_star) ? r.tau_star : 1.0 / d.gamma_c;
                const double lo = tau_min > 0.0 ? tau_min : centre * 1e-3;
                const double hi = tau_max > 0.0 ? tau_max : centre * 1e3;
                if (!(hi > lo))
                    throw ConfigError("--tau-max must exceed --tau-min");
                Table curve;
                curve.columns = {"tau", "shot_term", "backaction_term", "thermal_term", "total", "dn"};
                for (const double tau : log_grid(lo, hi, tau_points > 0 ? tau_points : 200)) {
                    const auto b = resolution_squared(tau, d, opts.resolution);
                    curve.add_row({b.tau, b.shot_term, b.backaction_term, b.thermal_term, b.total, std::sqrt(b.total)});
                }
                emit.table(curve, "curve");
            }
        } else if (spectra_cmd->parsed()) {
            const auto cfg = load(c);
            const auto d = derive(cfg, true);
            SpectrumGrid grid;
            grid.scale = spectrum_scale == "linear" ? GridScale::linear : GridScale::log;
            const double gap = std::abs(d.idle_detuning());
            grid.omega_min = omega_min != 0.0 ? omega_min : (grid.scale == GridScale::log ? 1e-3 * gap : -2.0 * gap);
            grid.omega_max = omega_max != 0.0 ? omega_max : (grid.scale == GridScale::log ? 1e1 * gap : 2.0 * gap);
            grid.points = spectrum_points;
            const auto table = spectra_table(d, grid);
            emit.header(header_for("spectra", cfg, c.seed));
            emit.table(kv_table({{"spring_coefficient", spring_coefficient(d), "rad/s"},
                                 {"K_spring", d.K_spring, "rad/s"},
                                 {"force_variance", backaction_force_variance(d), "rad^2/s^2"},
                                 {"S_ba_sym_zero", backaction_spectrum(0.0, d), "rad/s"}}),
                       "summary");
            emit.table(table, "spectrum");
        } else if (simulate_cmd->parsed()) {
            const auto cfg = load(c);
            const auto d = derive(cfg);
            sim.seed = c.seed;
            sim.workers = c.workers;
            sim.mode = sim_mode_from_string(mode);
            if (!taus.empty()) {
                sim.tau_grid = taus;
            } else {
                double centre = 1.0 / d.gamma_c;
                try {
                    centre = optimal_tau(d).tau_star;
                } catch (const Error&) {
                }
                const double lo = tau_min > 0.0 ? tau_min : centre / 10.0;
                const double hi = tau_max > 0.0 ? tau_max : centre * 3.0;
                if (!(hi >= lo))
                    throw ConfigError("--tau-max must not be below --tau-min");
                sim.tau_grid = log_grid(lo, hi, sim_tau_points);
            }
            const auto result = monte_carlo_resolution(sim, d);
            Header h = header_for("simulate", cfg, c.seed);
            emit.header(h);
            emit.table(kv_table({{"mode", std::string(to_string(sim.mode)), ""},
                                 {"dt", result.dt, "s"},
                                 {"n_trials", static_cast<std::int64_t>(result.n_trials), ""},
                                 {"n_true", sim.n_true, ""},
                                 {"vacuum_noise_scale", sim.vacuum_noise_scale, ""}}),
                       "settings");
            emit.table(monte_carlo_table(result), "monte_carlo");
            if (dump > 0) {
                const auto table = trajectory_table(dump_trajectories(sim, d, dump));
                if (dump_out.empty()) {
                    emit.table(table, "trajectories");
                } else {
                    Emitter dump_emit(dump_buffer, c.fmt());
                    dump_emit.header(h);
                    dump_emit.table(table, "trajectories");
                }
            }
        } else if (reduce_cmd->parsed()) {
            std::ifstream in(system_path);
            if (!in)
                throw ConfigError(fmt::format("cannot open system file '{}'", system_path));
            std::stringstream text;
            text << in.rdbuf();
            const auto system = parse_system(text.str());
            const auto regime = validate_dispersive(system, dispersive_threshold);
            const auto reduction = reduce(system);
            emit.header({"reduce", text_hash(text.str()), c.seed, text.str()});
            emit.table(regime_table(regime), "dispersive");
            emit.table(reduction_table(system, reduction), "reduction");
            if (!reduction.qnd_conditions_ok) {
                Table v;
                v.columns = {"violation"};
                for (const auto& s : reduction.qnd_violations)
                    v.add_row({s});
                emit.table(v, "qnd_violations");
            }
            const auto tri = to_tripartite(system);
            std::vector<KeyValue> kv{
                {"probe", static_cast<std::int64_t>(tri.probe), ""},
                {"idle", static_cast<std::int64_t>(tri.idle), ""},
                {"omega_s", tri.omega_s, "rad/s"},
                {"G_0", tri.G_0, "rad/s"},
                {"driven_mode", std::string(to_string(tri.driven_mode)), ""},
                {"quadratic_full", tri.quadratic_full, "rad/s"},
                {"quadratic_tripartite", tri.quadratic_tripartite, "rad/s"},
            };
            for (const auto& w : tri.warnings)
                kv.push_back({"warning", w, ""});
            emit.table(kv_table(kv), "tripartite");
            if (tri.rates) {
                const auto d = from_rates(*tri.rates, true);
                emit.table(kv_table(derived_items(d)), "tripartite_derived");
                emit.table(kv_table(report_items(feasibility_report(d))), "tripartite_report");
            }
        } else if (sweep_cmd->parsed()) {
            const auto cfg = load(c);
            SweepSpec spec{cfg, {}, {}, c.workers};
            spec.options.slack = slack;
            for (const auto& a : axes)
                spec.axes.push_back(parse_axis(a));
            const auto table = run_sweep(spec);
            emit.header(header_for("sweep", cfg, c.seed));
            emit.table(table, "sweep");
        }
    } catch (const Error& e) {
        const int code = e.is_model_error() ? exit_model : exit_usage;
        err << error_line(e, code) << '\n';
        return code;
    }

    auto write_to = [&](const std::string& path, const std::string& content) {
        if (path.empty()) {
            out << content;
            return true;
        }
        std::ofstream f(path, std::ios::binary);
        f << content;
        if (!f) {
            err << plain_error_line("ConfigError", fmt::format("cannot write '{}'", path), exit_usage) << '\n';
            return false;
        }
        return true;
    };
    if (!write_to(c.out_path, buffer.str()))
        return exit_usage;
    if (!dump_out.empty() && dump > 0 && !write_to(dump_out, dump_buffer.str()))
        return exit_usage;
    return exit_ok;
}

} // namespace mechsql
