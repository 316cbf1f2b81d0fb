#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mechsql/cli.hpp"
#include "mechsql/config_io.hpp"
#include "mechsql/error.hpp"
#include "mechsql/langevin.hpp"
#include "mechsql/params.hpp"
#include "mechsql/reducer.hpp"
#include "mechsql/resolution.hpp"
#include "mechsql/spectra.hpp"
#include "mechsql/sweep.hpp"
#include "mechsql/table.hpp"
#include "mechsql/version.hpp"

namespace py = pybind11;
using namespace mechsql;

namespace {

py::object cell_to_py(const Cell& cell)
{
    return std::visit([](const auto& v) -> py::object { return py::cast(v); }, cell);
}

// Table -> list of dicts in column order.
py::list table_records(const Table& table)
{
    py::list out;
    for (const auto& row : table.rows) {
        py::dict rec;
        for (std::size_t c = 0; c < table.columns.size(); ++c)
            rec[py::str(table.columns[c])] = cell_to_py(row[c]);
        out.append(std::move(rec));
    }
    return out;
}

std::string table_csv(const Table& table)
{
    std::ostringstream os;
    write_csv(os, table);
    return os.str();
}

DerivedQuantities derive_any(const py::object& config, bool allow_unstable)
{
    if (py::isinstance<RateParams>(config))
        return from_rates(config.cast<RateParams>(), allow_unstable);
    return derive(config.cast<SystemConfig>(), allow_unstable);
}

ModelConfig model_of(const py::object& config)
{
    if (py::isinstance<RateParams>(config))
        return config.cast<RateParams>();
    return config.cast<SystemConfig>();
}

py::object model_to_py(const ModelConfig& config)
{
    return std::visit([](const auto& c) -> py::object { return py::cast(c); }, config);
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Quantum-jump detection in membrane-in-the-middle optomechanics";
    m.attr("__version__") = mechsql::version;

    // Errors: translators run newest first, so the base is registered first.
    auto& base = py::register_exception<Error>(m, "MechsqlError");
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<InvalidAxis>(m, "InvalidAxis", base.ptr());
    py::register_exception<UnstableSpring>(m, "UnstableSpring", base.ptr());
    py::register_exception<ZeroSignal>(m, "ZeroSignal", base.ptr());
    py::register_exception<NoMinimum>(m, "NoMinimum", base.ptr());
    py::register_exception<StepTooLarge>(m, "StepTooLarge", base.ptr());
    py::register_exception<DegenerateModes>(m, "DegenerateModes", base.ptr());
    py::register_exception<QndViolated>(m, "QndViolated", base.ptr());

    py::enum_<DrivenMode>(m, "DrivenMode")
        .value("common", DrivenMode::common)
        .value("differential", DrivenMode::differential);
    py::enum_<SimMode>(m, "SimMode").value("full", SimMode::full).value("adiabatic", SimMode::adiabatic);
    py::enum_<ThermalForm>(m, "ThermalForm")
        .value("omega_eff", ThermalForm::omega_eff)
        .value("omega_m", ThermalForm::omega_m);

    py::class_<SystemConfig>(m, "SystemConfig")
        .def(py::init<>())
        .def_readwrite("m", &SystemConfig::m)
        .def_readwrite("omega_m", &SystemConfig::omega_m)
        .def_readwrite("Q_m", &SystemConfig::Q_m)
        .def_readwrite("wavelength", &SystemConfig::lambda)
        .def_readwrite("L", &SystemConfig::L)
        .def_readwrite("t_m", &SystemConfig::t_m)
        .def_readwrite("finesse", &SystemConfig::finesse)
        .def_readwrite("T", &SystemConfig::T)
        .def_readwrite("I_0", &SystemConfig::I_0)
        .def_readwrite("driven_mode", &SystemConfig::driven_mode)
        .def_property("r_m", &SystemConfig::r_m, &SystemConfig::set_r_m)
        .def("validate", &SystemConfig::validate);

    py::class_<RateParams>(m, "RateParams")
        .def(py::init<>())
        .def_readwrite("omega_m", &RateParams::omega_m)
        .def_readwrite("gamma_m", &RateParams::gamma_m)
        .def_readwrite("n_th", &RateParams::n_th)
        .def_readwrite("omega_s", &RateParams::omega_s)
        .def_readwrite("gamma_c", &RateParams::gamma_c)
        .def_readwrite("gamma_d", &RateParams::gamma_d)
        .def_readwrite("G_0", &RateParams::G_0)
        .def_readwrite("c_bar", &RateParams::c_bar)
        .def_readwrite("driven_mode", &RateParams::driven_mode)
        .def("validate", &RateParams::validate);

    py::class_<DerivedQuantities>(m, "DerivedQuantities")
        .def_readonly("omega_m", &DerivedQuantities::omega_m)
        .def_readonly("gamma_m", &DerivedQuantities::gamma_m)
        .def_readonly("n_th", &DerivedQuantities::n_th)
        .def_readonly("omega_s", &DerivedQuantities::omega_s)
        .def_readonly("gamma_c", &DerivedQuantities::gamma_c)
        .def_readonly("gamma_d", &DerivedQuantities::gamma_d)
        .def_readonly("G_0", &DerivedQuantities::G_0)
        .def_readonly("c_bar", &DerivedQuantities::c_bar)
        .def_readonly("driven_mode", &DerivedQuantities::driven_mode)
        .def_readonly("K_spring", &DerivedQuantities::K_spring)
        .def_readonly("omega_eff_sq", &DerivedQuantities::omega_eff_sq)
        .def_readonly("omega_eff", &DerivedQuantities::omega_eff)
        .def_readonly("Lambda", &DerivedQuantities::Lambda)
        .def_readonly("G_eff", &DerivedQuantities::G_eff)
        .def_readonly("threshold_photons", &DerivedQuantities::threshold_photons)
        .def_property_readonly("x_q", [](const DerivedQuantities& d) -> py::object {
            return d.optics ? py::cast(d.optics->x_q) : py::none();
        })
        .def_property_readonly("threshold_power", [](const DerivedQuantities& d) -> py::object {
            return d.optics ? py::cast(d.optics->I_0_instability) : py::none();
        })
        .def("stable", &DerivedQuantities::stable)
        .def("rates", &DerivedQuantities::rates);

    m.def("parse_config", [](const std::string& text, const std::vector<std::string>& overrides) {
        return model_to_py(parse_config(text, overrides));
    }, py::arg("text"), py::arg("overrides") = std::vector<std::string>{});
    m.def("load_config", [](const std::string& path, const std::vector<std::string>& overrides) {
        return model_to_py(load_config_file(path, overrides));
    }, py::arg("path"), py::arg("overrides") = std::vector<std::string>{});
    m.def("default_config", [] { return model_to_py(default_config()); });
    m.def("format_config", [](const py::object& c) { return format_config(model_of(c)); });
    m.def("config_hash", [](const py::object& c) { return config_hash(model_of(c)); });

    m.def("derive", &derive_any, py::arg("config"), py::arg("allow_unstable") = false);

    // resolution
    py::class_<TauOptimum>(m, "TauOptimum")
        .def_readonly("tau_star", &TauOptimum::tau_star)
        .def_readonly("min_resolution", &TauOptimum::min_resolution)
        .def_readonly("tau_analytic", &TauOptimum::tau_analytic)
        .def_readonly("at_window_edge", &TauOptimum::at_window_edge);

    py::class_<FeasibilityReport>(m, "FeasibilityReport")
        .def_readonly("sql_ratio", &FeasibilityReport::sql_ratio)
        .def_readonly("finesse_form", &FeasibilityReport::finesse_form)
        .def_readonly("sql_ok", &FeasibilityReport::sql_ok)
        .def_readonly("finesse_ok", &FeasibilityReport::finesse_ok)
        .def_readonly("min_resolution", &FeasibilityReport::min_resolution)
        .def_readonly("tau_star", &FeasibilityReport::tau_star)
        .def_readonly("tau_error", &FeasibilityReport::tau_error)
        .def_readonly("condition_i", &FeasibilityReport::condition_i)
        .def_readonly("condition_ii", &FeasibilityReport::condition_ii)
        .def_readonly("condition_iii", &FeasibilityReport::condition_iii)
        .def_readonly("storage_time", &FeasibilityReport::storage_time)
        .def_readonly("oscillation_time", &FeasibilityReport::oscillation_time)
        .def_readonly("omega_eff_sq", &FeasibilityReport::omega_eff_sq)
        .def_readonly("thermal_constraint_ok", &FeasibilityReport::thermal_constraint_ok)
        .def_readonly("omega_eff_opt", &FeasibilityReport::omega_eff_opt)
        .def_readonly("regime_ok", &FeasibilityReport::regime_ok)
        .def_readonly("feasible", &FeasibilityReport::feasible);

    m.def("resolution_squared", [](double tau, const py::object& c) {
        const auto r = resolution_squared(tau, derive_any(c, false));
        py::dict out;
        out["tau"] = r.tau;
        out["shot"] = r.shot_term;
        out["backaction"] = r.backaction_term;
        out["thermal"] = r.thermal_term;
        out["total"] = r.total;
        return out;
    }, py::arg("tau"), py::arg("config"));
    m.def("optimal_tau", [](const py::object& c) { return optimal_tau(derive_any(c, false)); });
    m.def("measurement_time", [](const py::object& c) { return measurement_time(derive_any(c, false)); });
    m.def("decoherence_rate", [](const py::object& c) { return decoherence_rate(derive_any(c, false)); });
    m.def("sql_ratio", [](const py::object& c) { return sql_ratio(derive_any(c, false)).ratio; });
    m.def("analyze", [](const py::object& c, double slack) {
        FeasibilityOptions o;
        o.slack = slack;
        return feasibility_report(derive_any(c, true), o);
    }, py::arg("config"), py::arg("slack") = 1.0);

    // spectra
    m.def("backaction_spectrum", [](double omega, const py::object& c, bool symmetrized) {
        return backaction_spectrum(omega, derive_any(c, false),
                                   symmetrized ? SpectrumKind::symmetrized : SpectrumKind::non_symmetrized);
    }, py::arg("omega"), py::arg("config"), py::arg("symmetrized") = true);
    m.def("spring_coefficient", [](const py::object& c) { return spring_coefficient(derive_any(c, false)); });

    // simulation
    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("dt", &SimConfig::dt)
        .def_readwrite("duration", &SimConfig::duration)
        .def_readwrite("n_trials", &SimConfig::n_trials)
        .def_readwrite("seed", &SimConfig::seed)
        .def_readwrite("mode", &SimConfig::mode)
        .def_readwrite("tau_grid", &SimConfig::tau_grid)
        .def_readwrite("n_true", &SimConfig::n_true)
        .def_readwrite("vacuum_noise_scale", &SimConfig::vacuum_noise_scale)
        .def_readwrite("record_stride", &SimConfig::record_stride)
        .def_readwrite("workers", &SimConfig::workers);

    m.def("max_step", [](const py::object& c, SimMode mode) { return max_step(derive_any(c, false), mode); },
          py::arg("config"), py::arg("mode") = SimMode::adiabatic);
    m.def("monte_carlo", [](const SimConfig& sim, const py::object& c) {
        const auto r = monte_carlo_resolution(sim, derive_any(c, false));
        py::dict out;
        out["dt"] = r.dt;
        out["rows"] = table_records(monte_carlo_table(r));
        out["errors"] = r.errors;
        return out;
    }, py::arg("sim"), py::arg("config"));
    m.def("trajectories", [](const SimConfig& sim, const py::object& c, int k) {
        return table_records(trajectory_table(dump_trajectories(sim, derive_any(c, false), k)));
    }, py::arg("sim"), py::arg("config"), py::arg("k") = 1);

    // reducer
    py::class_<ParametricSystem>(m, "ParametricSystem")
        .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("Omega"), py::arg("omega"))
        .def_readwrite("Omega", &ParametricSystem::Omega)
        .def_readwrite("omega", &ParametricSystem::omega)
        .def_readwrite("drive_index", &ParametricSystem::drive_index)
        .def_readwrite("drive_amplitude", &ParametricSystem::drive_amplitude)
        .def_readwrite("decay", &ParametricSystem::decay)
        .def_readwrite("gamma_m", &ParametricSystem::gamma_m)
        .def_readwrite("n_th", &ParametricSystem::n_th)
        .def("coupling", &ParametricSystem::coupling)
        .def("set_coupling", &ParametricSystem::set_coupling)
        .def("validate", &ParametricSystem::validate);

    py::class_<EffectiveFrequency>(m, "EffectiveFrequency")
        .def_readonly("constant", &EffectiveFrequency::constant)
        .def_readonly("linear", &EffectiveFrequency::linear)
        .def_readonly("quadratic", &EffectiveFrequency::quadratic)
        .def("__call__", &EffectiveFrequency::evaluate);

    py::class_<DispersiveReduction>(m, "DispersiveReduction")
        .def_readonly("omega_prime", &DispersiveReduction::omega_prime)
        .def_readonly("residual_linear", &DispersiveReduction::residual_linear)
        .def_readonly("qnd_conditions_ok", &DispersiveReduction::qnd_conditions_ok)
        .def_readonly("qnd_violations", &DispersiveReduction::qnd_violations);

    py::class_<TripartiteEquivalent>(m, "TripartiteEquivalent")
        .def_readonly("probe", &TripartiteEquivalent::probe)
        .def_readonly("idle", &TripartiteEquivalent::idle)
        .def_readonly("omega_s", &TripartiteEquivalent::omega_s)
        .def_readonly("G_0", &TripartiteEquivalent::G_0)
        .def_readonly("driven_mode", &TripartiteEquivalent::driven_mode)
        .def_readonly("quadratic_full", &TripartiteEquivalent::quadratic_full)
        .def_readonly("quadratic_tripartite", &TripartiteEquivalent::quadratic_tripartite)
        .def_readonly("warnings", &TripartiteEquivalent::warnings)
        .def_readonly("rates", &TripartiteEquivalent::rates);

    m.def("parse_system", &parse_system);
    m.def("load_system", &load_system_file);
    m.def("coupled_cavity_system", &coupled_cavity_system);
    m.def("reduce", &reduce);
    m.def("to_tripartite", &to_tripartite);
    m.def("brute_force_eigen", &brute_force_eigen);

    // sweep
    m.def("sweep", [](const py::object& base, const std::vector<std::string>& axes, int workers, double slack) {
        SweepSpec spec;
        spec.base = model_of(base);
        for (const auto& a : axes)
            spec.axes.push_back(parse_axis(a));
        spec.workers = workers;
        spec.options.slack = slack;
        return table_records(run_sweep(spec));
    }, py::arg("base"), py::arg("axes"), py::arg("workers") = 1, py::arg("slack") = 1.0);

    m.def("run_cli", [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
            py::gil_scoped_release release;
            code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
    }, py::arg("args"));

    m.def("spectra_csv", [](const py::object& c, double lo, double hi, int points) {
        return table_csv(spectra_table(derive_any(c, false), {lo, hi, points, GridScale::log}));
    }, py::arg("config"), py::arg("omega_min"), py::arg("omega_max"), py::arg("points") = 200);
}
