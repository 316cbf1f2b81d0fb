#pragma once

#include <optional>
#include <string>

#include "mechsql/params.hpp"

namespace mechsql {

/// Threshold of the finesse form of the quantum limit, 8 sqrt(2).
inline constexpr double finesse_form_threshold = 11.313708498984761;

/// S_d(omega) = 2 gamma_d / ((omega - Delta)^2 + gamma_d^2), the spectrum of
/// <d(t) d^dagger(0)> for the idle mode detuned by Delta = idle_detuning().
double lorentzian_spectrum(double omega, const DerivedQuantities& d);

/// Golden-rule decoherence rate G_0^2 c_bar^2 S_d(-omega_m).
double decoherence_rate(const DerivedQuantities& d);

/// Shot-noise-limited time to resolve N with unit error,
/// 2 omega_s^2 gamma_c / (G_0^4 c_bar^2). Throws ZeroSignal.
double measurement_time(const DerivedQuantities& d);

struct SqlRatio {
    double ratio = 0.0;                 // gamma_c gamma_d / G_eff^2
    std::optional<double> finesse_form; // lambda / (F x_q), physical configs only
    bool ratio_ok = false;              // ratio <= slack
    bool finesse_ok = false;            // finesse_form <= 8 sqrt(2) slack
};

SqlRatio sql_ratio(const DerivedQuantities& d, double slack = 1.0);

/// How the thermal term normalizes k_B T. `omega_eff` is the closed form as
/// written (k_B T / (hbar omega_eff)); `omega_m` uses n_th = k_B T/(hbar omega_m).
enum class ThermalForm { omega_eff, omega_m };

struct ResolutionOptions {
    std::optional<double> n_th_override;
    ThermalForm thermal_form = ThermalForm::omega_eff;
};

/// Delta N^2(tau) = shot / tau + (backaction + thermal) tau^2, stored as the
/// coefficients of the three terms.
struct ResolutionCoefficients {
    double shot = 0.0;        // gamma_c omega_s^2 / (G_eff^4 c_bar^2)
    double backaction = 0.0;  // (5/6) (gamma_d G_eff^2 c_bar^2 / (2 sqrt2 omega_s^2))^2
    double thermal = 0.0;     // (5/6) (gamma_m k_B T / (sqrt2 hbar omega_eff))^2
};

ResolutionCoefficients resolution_coefficients(const DerivedQuantities& d, const ResolutionOptions& opts = {});

struct ResolutionBreakdown {
    double tau = 0.0;
    double shot_term = 0.0;
    double backaction_term = 0.0;
    double thermal_term = 0.0;
    double total = 0.0;
};

ResolutionBreakdown resolution_squared(double tau, const DerivedQuantities& d, const ResolutionOptions& opts = {});

struct TauOptimum {
    double tau_star = 0.0;
    double min_resolution = 0.0;  // Delta N^2 at tau_star
    double tau_analytic = 0.0;    // (A / 2B)^(1/3)
    bool at_window_edge = false;
};

/// Minimizes Delta N^2 over tau in [1e-2/gamma_c, 1e6/gamma_c]: 256-point log
/// grid, then golden-section refinement in log tau. Throws NoMinimum when
/// only the shot term is present and ZeroSignal when there is no signal.
TauOptimum optimal_tau(const DerivedQuantities& d, const ResolutionOptions& opts = {});

struct OmegaEffOptimum {
    double omega_eff_opt = 0.0;    // omega_m sqrt(n_th / Q_m)
    double thermal_ratio = 0.0;    // n_th / Q_m
    double constraint_rhs = 0.0;   // (G_0^2 / (omega_s gamma_c))^(2/3)
    bool constraint_ok = false;
    bool in_model = false;         // 0 < n_th/Q_m < 1
};

OmegaEffOptimum optimal_omega_eff(const DerivedQuantities& d);

struct FeasibilityOptions {
    double slack = 1.0;
    ResolutionOptions resolution;
    RegimeMargins margins;
};

struct FeasibilityReport {
    double sql_ratio = 0.0;
    double finesse_form = 0.0;     // NaN for rate configs
    bool sql_ok = false;
    bool finesse_ok = false;

    double min_resolution = 0.0;   // Delta N^2 at tau_star
    double tau_star = 0.0;
    std::string tau_error;         // error kind when tau_star is undefined

    bool condition_i = false;      // min_resolution <= slack
    bool condition_ii = false;     // tau* >= 1/gamma_c and 1/gamma_c >= 1/omega_eff
    bool condition_iii = false;    // omega_eff^2 > 0
    double storage_time = 0.0;     // 1/gamma_c
    double oscillation_time = 0.0; // 1/omega_eff
    double omega_eff_sq = 0.0;

    double thermal_constraint_lhs = 0.0;
    double thermal_constraint_rhs = 0.0;
    bool thermal_constraint_ok = false;
    double omega_eff_opt = 0.0;

    bool regime_ok = false;
    bool feasible = false;         // i and ii and iii
};

/// Aggregates every verdict. Accepts unstable derived quantities (from
/// `derive(..., true)`) and reports them as condition (iii) failures.
FeasibilityReport feasibility_report(const DerivedQuantities& d, const FeasibilityOptions& opts = {});

FeasibilityReport analyze(const ModelConfig& config, const FeasibilityOptions& opts = {});

} // namespace mechsql
