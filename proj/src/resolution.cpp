#include "mechsql/resolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mechsql/error.hpp"

namespace mechsql {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();
constexpr double inf = std::numeric_limits<double>::infinity();
constexpr int kTauGridPoints = 256;
constexpr double kTauWindowLow = 1e-2;
constexpr double kTauWindowHigh = 1e6;

double square(double x) { return x * x; }

} // namespace

double lorentzian_spectrum(double omega, const DerivedQuantities& d)
{
    const double detuned = omega - d.idle_detuning();
    return 2.0 * d.gamma_d / (detuned * detuned + d.gamma_d * d.gamma_d);
}

double decoherence_rate(const DerivedQuantities& d)
{
    return square(d.G_0 * d.c_bar) * lorentzian_spectrum(-d.omega_m, d);
}

double measurement_time(const DerivedQuantities& d)
{
    if (d.c_bar <= 0.0 || d.G_0 <= 0.0)
        throw ZeroSignal("measurement time undefined: no dispersive signal (c_bar or G_0 is zero)");
    return 2.0 * square(d.omega_s) * d.gamma_c / (square(square(d.G_0)) * square(d.c_bar));
}

SqlRatio sql_ratio(const DerivedQuantities& d, double slack)
{
    SqlRatio out;
    out.ratio = d.gamma_c * d.gamma_d / square(d.G_eff);
    out.ratio_ok = out.ratio <= slack;
    if (d.optics) {
        out.finesse_form = d.optics->lambda / (d.optics->finesse * d.optics->x_q);
        out.finesse_ok = *out.finesse_form <= finesse_form_threshold * slack;
    }
    return out;
}

ResolutionCoefficients resolution_coefficients(const DerivedQuantities& d, const ResolutionOptions& opts)
{
    ResolutionCoefficients k;
    const double g2 = square(d.G_eff);
    const double c2 = square(d.c_bar);
    const double ws2 = square(d.omega_s);

    k.shot = d.gamma_c * ws2 / (g2 * g2 * c2);
    k.backaction = 5.0 / 6.0 * square(d.gamma_d * g2 * c2 / (2.0 * std::sqrt(2.0) * ws2));

    // k_B T / hbar expressed through the occupation: n_th omega_m.
    const double n_th = opts.n_th_override.value_or(d.n_th);
    const double kT_over_hbar = n_th * d.omega_m;
    const double normalizer = opts.thermal_form == ThermalForm::omega_eff ? d.omega_eff : d.omega_m;
    k.thermal = (d.gamma_m == 0.0 || n_th == 0.0)
        ? 0.0
        : 5.0 / 6.0 * square(d.gamma_m * kT_over_hbar / (std::sqrt(2.0) * normalizer));
    return k;
}

ResolutionBreakdown resolution_squared(double tau, const DerivedQuantities& d, const ResolutionOptions& opts)
{
    const auto k = resolution_coefficients(d, opts);
    ResolutionBreakdown r;
    r.tau = tau;
    r.shot_term = k.shot / tau;
    r.backaction_term = k.backaction * tau * tau;
    r.thermal_term = k.thermal * tau * tau;
    r.total = r.shot_term + r.backaction_term + r.thermal_term;
    return r;
}

TauOptimum optimal_tau(const DerivedQuantities& d, const ResolutionOptions& opts)
{
    const auto k = resolution_coefficients(d, opts);
    if (!std::isfinite(k.shot))
        throw ZeroSignal("no dispersive signal: shot term is unbounded");
    const double growth = k.backaction + k.thermal;
    if (!(growth > 0.0))
        throw NoMinimum("Delta N^2 has no minimum: back-action and thermal terms vanish");

    auto total = [&](double log_tau) {
        const double tau = std::exp(log_tau);
        return k.shot / tau + growth * tau * tau;
    };

    const double lo = std::log(kTauWindowLow / d.gamma_c);
    const double hi = std::log(kTauWindowHigh / d.gamma_c);
    const double step = (hi - lo) / (kTauGridPoints - 1);
    int best = 0;
    double best_value = inf;
    for (int i = 0; i < kTauGridPoints; ++i) {
        const double v = total(lo + step * i);
        if (v < best_value) {
            best_value = v;
            best = i;
        }
    }

    double a = lo + step * std::max(best - 1, 0);
    double b = lo + step * std::min(best + 1, kTauGridPoints - 1);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = total(x1);
    double f2 = total(x2);
    while (b - a > 1e-12) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = total(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = total(x2);
        }
    }

    TauOptimum out;
    const double x = 0.5 * (a + b);
    out.tau_star = std::exp(x);
    out.min_resolution = total(x);
    out.tau_analytic = std::cbrt(k.shot / (2.0 * growth));
    out.at_window_edge = best == 0 || best == kTauGridPoints - 1;
    return out;
}

OmegaEffOptimum optimal_omega_eff(const DerivedQuantities& d)
{
    OmegaEffOptimum out;
    // n_th / Q_m with Q_m = omega_m / gamma_m.
    out.thermal_ratio = d.n_th * d.gamma_m / d.omega_m;
    out.omega_eff_opt = d.omega_m * std::sqrt(out.thermal_ratio);
    out.constraint_rhs = std::pow(square(d.G_0) / (d.omega_s * d.gamma_c), 2.0 / 3.0);
    out.constraint_ok = out.thermal_ratio <= out.constraint_rhs * (1.0 + 1e-12);
    out.in_model = out.thermal_ratio > 0.0 && out.thermal_ratio < 1.0;
    return out;
}

FeasibilityReport feasibility_report(const DerivedQuantities& d, const FeasibilityOptions& opts)
{
    FeasibilityReport r;
    r.storage_time = 1.0 / d.gamma_c;
    r.omega_eff_sq = d.omega_eff_sq;
    r.condition_iii = d.stable();
    r.regime_ok = validate_regime(d, opts.margins).pass();

    const auto w = optimal_omega_eff(d);
    r.thermal_constraint_lhs = w.thermal_ratio;
    r.thermal_constraint_rhs = w.constraint_rhs;
    r.thermal_constraint_ok = w.constraint_ok;
    r.omega_eff_opt = w.omega_eff_opt;

    if (!r.condition_iii) {
        r.sql_ratio = nan;
        r.finesse_form = d.optics ? d.optics->lambda / (d.optics->finesse * d.optics->x_q) : nan;
        r.finesse_ok = d.optics && r.finesse_form <= finesse_form_threshold * opts.slack;
        r.min_resolution = nan;
        r.tau_star = nan;
        r.oscillation_time = nan;
        r.tau_error = "UnstableSpring";
        return r;
    }

    const auto sql = sql_ratio(d, opts.slack);
    r.sql_ratio = sql.ratio;
    r.sql_ok = sql.ratio_ok;
    r.finesse_form = sql.finesse_form.value_or(nan);
    r.finesse_ok = sql.finesse_ok;
    r.oscillation_time = 1.0 / d.omega_eff;

    try {
        const auto t = optimal_tau(d, opts.resolution);
        r.tau_star = t.tau_star;
        r.min_resolution = t.min_resolution;
    } catch (const Error& e) {
        r.tau_star = nan;
        r.min_resolution = nan;
        r.tau_error = e.kind();
    }

    r.condition_i = r.min_resolution <= opts.slack;
    r.condition_ii = r.tau_star >= r.storage_time && r.storage_time >= r.oscillation_time;
    r.feasible = r.condition_i && r.condition_ii && r.condition_iii;
    return r;
}

FeasibilityReport analyze(const ModelConfig& config, const FeasibilityOptions& opts)
{
    return feasibility_report(derive(config, true), opts);
}

} // namespace mechsql
