#include "mechsql/params.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "mechsql/constants.hpp"
#include "mechsql/error.hpp"

namespace mechsql {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();
constexpr double inf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what)
{
    if (!ok)
        throw ConfigError(what);
}

} // namespace

std::string_view to_string(DrivenMode mode)
{
    return mode == DrivenMode::common ? "common" : "differential";
}

DrivenMode driven_mode_from_string(std::string_view name)
{
    if (name == "common")
        return DrivenMode::common;
    if (name == "differential")
        return DrivenMode::differential;
    throw ConfigError(fmt::format("driven_mode must be 'common' or 'differential', got '{}'", name));
}

double SystemConfig::r_m() const { return std::sqrt(1.0 - t_m * t_m); }

void SystemConfig::set_r_m(double r)
{
    require(r > 0.0 && r < 1.0, "r_m must lie in (0, 1)");
    t_m = std::sqrt((1.0 - r) * (1.0 + r));
}

void SystemConfig::validate() const
{
    require(m > 0.0, "m must be positive");
    require(omega_m > 0.0, "omega_m must be positive");
    require(Q_m > 0.0, "Q_m must be positive");
    require(lambda > 0.0, "lambda must be positive");
    require(L > 0.0, "L must be positive");
    require(t_m > 0.0 && t_m < 1.0, "t_m must lie in (0, 1)");
    require(finesse > 1.0, "finesse must exceed 1");
    require(T >= 0.0, "T must be non-negative");
    require(I_0 >= 0.0, "I_0 must be non-negative");
}

void RateParams::validate() const
{
    require(omega_m > 0.0, "omega_m must be positive");
    require(omega_s > 0.0, "omega_s must be positive");
    require(gamma_c > 0.0, "gamma_c must be positive");
    require(gamma_d > 0.0, "gamma_d must be positive");
    require(gamma_m >= 0.0, "gamma_m must be non-negative");
    require(n_th >= 0.0, "n_th must be non-negative");
    require(G_0 >= 0.0, "G_0 must be non-negative");
    require(c_bar >= 0.0, "c_bar must be non-negative");
}

double DerivedQuantities::idle_detuning() const { return 2.0 * spring_sign() * omega_s; }

double DerivedQuantities::spring_sign() const
{
    return driven_mode == DrivenMode::common ? 1.0 : -1.0;
}

RateParams DerivedQuantities::rates() const
{
    return RateParams{omega_m, gamma_m, n_th, omega_s, gamma_c, gamma_d, G_0, c_bar, driven_mode};
}

RateParams rates_from_config(const SystemConfig& config)
{
    config.validate();
    using C = PhysicalConstants;
    const double x_q = std::sqrt(C::hbar / (2.0 * config.m * config.omega_m));
    const double omega_0 = two_pi * C::c_light / config.lambda;
    const double t0_sq = pi / config.finesse;

    RateParams r;
    r.omega_m = config.omega_m;
    r.gamma_m = config.omega_m / config.Q_m;
    r.n_th = C::k_B * config.T / (C::hbar * config.omega_m);
    r.omega_s = config.t_m * C::c_light / config.L;
    r.gamma_c = C::c_light * t0_sq / (2.0 * config.L);
    r.gamma_d = r.gamma_c;
    r.G_0 = 2.0 * std::sqrt(2.0) * omega_0 * x_q / config.L;
    r.c_bar = std::sqrt(2.0 * config.I_0 / (r.gamma_c * C::hbar * omega_0));
    r.driven_mode = config.driven_mode;
    return r;
}

DerivedQuantities from_rates(const RateParams& rates, bool allow_unstable)
{
    rates.validate();

    DerivedQuantities d;
    d.omega_m = rates.omega_m;
    d.gamma_m = rates.gamma_m;
    d.n_th = rates.n_th;
    d.omega_s = rates.omega_s;
    d.gamma_c = rates.gamma_c;
    d.gamma_d = rates.gamma_d;
    d.G_0 = rates.G_0;
    d.c_bar = rates.c_bar;
    d.driven_mode = rates.driven_mode;

    d.K_spring = d.G_0 * d.G_0 * d.c_bar * d.c_bar / d.omega_s;
    // Low-frequency limit of the radiation-pressure spring inserted into
    // q' = omega_m p, p' = -omega_m q + F.
    d.omega_eff_sq = d.omega_m * (d.omega_m - d.spring_sign() * d.K_spring);
    d.threshold_photons = (d.driven_mode == DrivenMode::common && d.G_0 > 0.0)
        ? d.omega_m * d.omega_s / (d.G_0 * d.G_0)
        : inf;

    if (d.stable()) {
        d.omega_eff = std::sqrt(d.omega_eff_sq);
        d.Lambda = std::sqrt(d.omega_m / d.omega_eff);
        d.G_eff = d.Lambda * d.G_0;
    } else {
        d.omega_eff = nan;
        d.Lambda = nan;
        d.G_eff = nan;
        if (!allow_unstable) {
            throw UnstableSpring(
                fmt::format("optical spring exceeds mechanical rigidity: K = {:.6g} rad/s >= omega_m = {:.6g} "
                            "rad/s (threshold photon number {:.6g})",
                            d.K_spring, d.omega_m, d.threshold_photons),
                d.threshold_photons, nan);
        }
    }
    return d;
}

DerivedQuantities derive(const SystemConfig& config, bool allow_unstable)
{
    using C = PhysicalConstants;
    const RateParams rates = rates_from_config(config);

    OpticsInfo o;
    o.x_q = std::sqrt(C::hbar / (2.0 * config.m * config.omega_m));
    o.omega_0 = two_pi * C::c_light / config.lambda;
    o.lambda = config.lambda;
    o.L = config.L;
    o.finesse = config.finesse;
    o.t_m = config.t_m;
    o.t0_sq = pi / config.finesse;
    o.I_0 = config.I_0;
    o.T = config.T;
    o.Q_m = config.Q_m;
    o.m = config.m;

    const double power_per_photon = rates.gamma_c * C::hbar * o.omega_0 / 2.0;
    const bool softening = config.driven_mode == DrivenMode::common;
    o.I_0_instability = softening ? rates.omega_m * rates.omega_s / (rates.G_0 * rates.G_0) * power_per_photon : inf;
    const double thermal_ratio = rates.n_th / config.Q_m;
    if (softening && thermal_ratio > 0.0 && thermal_ratio < 1.0) {
        const double k_opt = rates.omega_m * (1.0 - thermal_ratio);
        o.I_0_optimal_spring = k_opt * rates.omega_s / (rates.G_0 * rates.G_0) * power_per_photon;
    } else {
        o.I_0_optimal_spring = nan;
    }

    const double half = config.L / 2.0;
    o.subcavity.G_0 = 2.0 * std::sqrt(2.0) * o.omega_0 * o.x_q / half;
    o.subcavity.omega_s = config.t_m * C::c_light / half;
    o.subcavity.gamma_c = C::c_light * o.t0_sq / (2.0 * half);

    DerivedQuantities d;
    try {
        d = from_rates(rates, allow_unstable);
    } catch (const UnstableSpring& e) {
        throw UnstableSpring(fmt::format("{} (threshold power {:.6g} W, configured {:.6g} W)", e.what(),
                                         o.I_0_instability, config.I_0),
                             e.threshold_photons(), o.I_0_instability);
    }
    d.optics = o;
    return d;
}

DerivedQuantities derive(const ModelConfig& config, bool allow_unstable)
{
    return std::visit([&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, SystemConfig>)
            return derive(c, allow_unstable);
        else
            return from_rates(c, allow_unstable);
    }, config);
}

bool RegimeReport::pass() const
{
    for (const auto& c : checks) {
        if (!c.pass)
            return false;
    }
    return true;
}

RegimeReport validate_regime(const DerivedQuantities& d, const RegimeMargins& margins)
{
    RegimeReport report;
    auto add = [&](std::string name, double ratio, double threshold) {
        report.checks.push_back({std::move(name), ratio, threshold, ratio < threshold});
    };
    const double gap = 2.0 * d.omega_s;
    add("omega_m/omega_s", d.omega_m / d.omega_s, margins.mech_over_split);
    add("G_0/(2 omega_s)", d.G_0 / gap, margins.coupling_over_gap);
    add("gamma_c/omega_m", d.gamma_c / d.omega_m, margins.decay_over_mech);
    add("gamma_d/omega_m", d.gamma_d / d.omega_m, margins.decay_over_mech);
    add("gamma_c/(2 omega_s)", d.gamma_c / gap, margins.decay_over_gap);
    add("gamma_d/(2 omega_s)", d.gamma_d / gap, margins.decay_over_gap);
    return report;
}

} // namespace mechsql
