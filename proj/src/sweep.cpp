#include "mechsql/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "mechsql/error.hpp"
#include "mechsql/parallel.hpp"

namespace mechsql {

namespace {

const std::vector<std::string> kPhysical{"m", "omega_m", "Q_m", "lambda", "L", "r_m", "t_m", "finesse", "T", "I_0"};
const std::vector<std::string> kRates{"omega_m", "gamma_m", "n_th", "omega_s", "gamma_c", "gamma_d", "G_0", "c_bar"};

double parse_double(std::string_view tok, std::string_view what)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
        throw InvalidAxis(fmt::format("axis {} '{}' is not a number", what, tok));
    return v;
}

} // namespace

std::vector<double> SweepAxis::values() const
{
    std::vector<double> v(static_cast<std::size_t>(points));
    if (points == 1) {
        v[0] = min;
        return v;
    }
    for (int k = 0; k < points; ++k) {
        const double f = static_cast<double>(k) / (points - 1);
        v[k] = scale == AxisScale::log ? min * std::pow(max / min, f) : min + (max - min) * f;
    }
    // Pin the end points exactly.
    v.front() = min;
    v.back() = max;
    return v;
}

SweepAxis parse_axis(std::string_view text)
{
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (true) {
        const auto colon = text.find(':', pos);
        parts.push_back(text.substr(pos, colon == std::string_view::npos ? std::string_view::npos : colon - pos));
        if (colon == std::string_view::npos)
            break;
        pos = colon + 1;
    }
    if (parts.size() != 4 && parts.size() != 5)
        throw InvalidAxis(fmt::format("axis '{}' must look like name:scale:min:max:n", text));

    SweepAxis a;
    a.name = std::string(parts[0]);
    std::size_t i = 1;
    if (parts.size() == 5) {
        if (parts[1] == "log")
            a.scale = AxisScale::log;
        else if (parts[1] == "linear" || parts[1] == "lin")
            a.scale = AxisScale::linear;
        else
            throw InvalidAxis(fmt::format("axis scale must be linear or log, got '{}'", parts[1]));
        i = 2;
    }
    a.min = parse_double(parts[i], "min");
    a.max = parse_double(parts[i + 1], "max");
    int n = 0;
    const auto tok = parts[i + 2];
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), n);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw InvalidAxis(fmt::format("axis point count '{}' is not an integer", tok));
    a.points = n;
    return a;
}

std::vector<std::string> sweepable_parameters(const ModelConfig& config)
{
    return std::holds_alternative<SystemConfig>(config) ? kPhysical : kRates;
}

ModelConfig with_parameter(const ModelConfig& config, std::string_view name, double value)
{
    ModelConfig out = config;
    if (auto* c = std::get_if<SystemConfig>(&out)) {
        if (name == "m") c->m = value;
        else if (name == "omega_m") c->omega_m = value;
        else if (name == "Q_m") c->Q_m = value;
        else if (name == "lambda") c->lambda = value;
        else if (name == "L") c->L = value;
        else if (name == "r_m") c->set_r_m(value);
        else if (name == "t_m") c->t_m = value;
        else if (name == "finesse") c->finesse = value;
        else if (name == "T") c->T = value;
        else if (name == "I_0") c->I_0 = value;
        else
            throw InvalidAxis(fmt::format("'{}' is not a parameter of the physical model", name));
    } else {
        auto& r = std::get<RateParams>(out);
        if (name == "omega_m") r.omega_m = value;
        else if (name == "gamma_m") r.gamma_m = value;
        else if (name == "n_th") r.n_th = value;
        else if (name == "omega_s") r.omega_s = value;
        else if (name == "gamma_c") r.gamma_c = value;
        else if (name == "gamma_d") r.gamma_d = value;
        else if (name == "G_0") r.G_0 = value;
        else if (name == "c_bar") r.c_bar = value;
        else
            throw InvalidAxis(fmt::format("'{}' is not a parameter of the rates model", name));
    }
    return out;
}

void validate_sweep(const SweepSpec& spec)
{
    if (spec.axes.empty() || spec.axes.size() > 2)
        throw InvalidAxis(fmt::format("a sweep takes 1 or 2 axes, got {}", spec.axes.size()));
    const auto names = sweepable_parameters(spec.base);
    for (const auto& a : spec.axes) {
        if (std::find(names.begin(), names.end(), a.name) == names.end())
            throw InvalidAxis(fmt::format("unknown sweep parameter '{}'", a.name));
        if (a.points < 1)
            throw InvalidAxis(fmt::format("axis '{}' needs at least one point", a.name));
        if (a.points == 1 ? a.min != a.max : !(a.min < a.max))
            throw InvalidAxis(fmt::format("axis '{}' needs min < max (or min == max for one point)", a.name));
        if (a.scale == AxisScale::log && !(a.min > 0.0))
            throw InvalidAxis(fmt::format("log axis '{}' needs min > 0", a.name));
    }
    if (spec.axes.size() == 2 && spec.axes[0].name == spec.axes[1].name)
        throw InvalidAxis(fmt::format("axis '{}' given twice", spec.axes[0].name));
}

Table run_sweep(const SweepSpec& spec)
{
    validate_sweep(spec);
    std::vector<std::vector<double>> values;
    for (const auto& a : spec.axes)
        values.push_back(a.values());
    const std::size_t n1 = values.size() == 2 ? values[1].size() : 1;
    const std::size_t total = values[0].size() * n1;

    Table t;
    for (const auto& a : spec.axes)
        t.columns.push_back(a.name);
    const std::vector<std::string> result_columns{
        "photons", "omega_eff", "sql_ratio", "finesse_form", "dn2_min", "dn_min", "tau_star",
        "sql_ok", "finesse_ok", "condition_i", "condition_ii", "condition_iii", "regime_ok", "feasible", "error"};
    t.columns.insert(t.columns.end(), result_columns.begin(), result_columns.end());

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::vector<Cell>> rows(total);
    parallel_for(total, spec.workers, [&](std::size_t idx) {
        std::vector<double> point{values[0][idx / n1]};
        if (values.size() == 2)
            point.push_back(values[1][idx % n1]);
        std::vector<Cell> row(point.begin(), point.end());
        try {
            ModelConfig cfg = spec.base;
            for (std::size_t k = 0; k < point.size(); ++k)
                cfg = with_parameter(cfg, spec.axes[k].name, point[k]);
            const auto d = derive(cfg);
            const auto r = feasibility_report(d, spec.options);
            row.insert(row.end(), {d.c_bar * d.c_bar, d.omega_eff, r.sql_ratio, r.finesse_form, r.min_resolution,
                                   std::sqrt(r.min_resolution), r.tau_star, r.sql_ok, r.finesse_ok, r.condition_i,
                                   r.condition_ii, r.condition_iii, r.regime_ok, r.feasible, r.tau_error});
        } catch (const Error& e) {
            const Cell verdict = e.kind();
            row.insert(row.end(), {nan, nan, nan, nan, nan, nan, nan, verdict, verdict, verdict, verdict, verdict,
                                   verdict, verdict, e.kind()});
        }
        rows[idx] = std::move(row);
    });
    for (auto& r : rows)
        t.add_row(std::move(r));
    return t;
}

} // namespace mechsql
