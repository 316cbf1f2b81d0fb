#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mechsql {

/// Which optical normal mode carries the pump. The other one is the idle
/// mode whose vacuum fluctuations produce the linear (demolition) coupling.
enum class DrivenMode { common, differential };

std::string_view to_string(DrivenMode mode);
DrivenMode driven_mode_from_string(std::string_view name);

/// Raw parameters of the membrane-in-the-middle experiment, SI units with
/// angular frequencies in rad/s.
struct SystemConfig {
    double m = 0.0;          // effective mass, kg
    double omega_m = 0.0;    // mechanical angular frequency, rad/s
    double Q_m = 0.0;        // mechanical quality factor
    double lambda = 0.0;     // optical wavelength, m
    double L = 0.0;          // full cavity length, m
    double t_m = 0.0;        // membrane amplitude transmissivity
    double finesse = 0.0;    // F = pi / t0^2 with equal end mirrors
    double T = 0.0;          // bath temperature, K
    double I_0 = 0.0;        // input power, W
    DrivenMode driven_mode = DrivenMode::common;

    double r_m() const;
    void set_r_m(double r);

    /// Throws ConfigError when an invariant is broken.
    void validate() const;
};

/// The experiment expressed directly through rates. This is what every
/// downstream module consumes; physical configs are reduced to it.
struct RateParams {
    double omega_m = 0.0;  // rad/s
    double gamma_m = 0.0;  // rad/s
    double n_th = 0.0;     // thermal occupation at omega_m
    double omega_s = 0.0;  // optical mode splitting is 2 omega_s, rad/s
    double gamma_c = 0.0;  // driven-mode decay rate, rad/s
    double gamma_d = 0.0;  // idle-mode decay rate, rad/s
    double G_0 = 0.0;      // linear optomechanical coupling, rad/s
    double c_bar = 0.0;    // intracavity amplitude, sqrt(photons)
    DrivenMode driven_mode = DrivenMode::common;

    void validate() const;
};

using ModelConfig = std::variant<SystemConfig, RateParams>;

/// Alternative reading where the rates use the sub-cavity length L/2.
struct SubcavityReading {
    double G_0 = 0.0;
    double omega_s = 0.0;
    double gamma_c = 0.0;
};

/// Geometry-dependent quantities that only exist for a physical config.
struct OpticsInfo {
    double x_q = 0.0;       // zero-point motion, m
    double omega_0 = 0.0;   // optical carrier, rad/s
    double lambda = 0.0;
    double L = 0.0;
    double finesse = 0.0;
    double t_m = 0.0;
    double t0_sq = 0.0;     // end-mirror power transmissivity pi / F
    double I_0 = 0.0;
    double T = 0.0;
    double Q_m = 0.0;
    double m = 0.0;
    double I_0_instability = 0.0;      // power where omega_eff reaches 0
    double I_0_optimal_spring = 0.0;   // power giving omega_m sqrt(n_th/Q_m); NaN if out of model
    SubcavityReading subcavity;
};

struct DerivedQuantities {
    // rates
    double omega_m = 0.0;
    double gamma_m = 0.0;
    double n_th = 0.0;
    double omega_s = 0.0;
    double gamma_c = 0.0;
    double gamma_d = 0.0;
    double G_0 = 0.0;
    double c_bar = 0.0;
    DrivenMode driven_mode = DrivenMode::common;

    // optical spring
    double K_spring = 0.0;         // G_0^2 c_bar^2 / omega_s
    double omega_eff_sq = 0.0;     // may be <= 0 only in unchecked derivations
    double omega_eff = 0.0;        // NaN when unstable
    double Lambda = 1.0;           // sqrt(omega_m / omega_eff)
    double G_eff = 0.0;            // Lambda G_0
    double threshold_photons = 0.0;  // c_bar^2 at omega_eff = 0; +inf if never

    std::optional<OpticsInfo> optics;

    bool stable() const { return omega_eff_sq > 0.0; }
    /// Detuning of the idle mode from the pump in the rotating frame:
    /// +2 omega_s for common drive, -2 omega_s for differential drive.
    double idle_detuning() const;
    /// +1 when the spring softens the mechanics, -1 when it stiffens it.
    double spring_sign() const;
    RateParams rates() const;
};

/// Reduce rates to derived quantities. Throws UnstableSpring if the spring
/// drives omega_eff^2 non-positive, unless `allow_unstable` is set, in which
/// case omega_eff, Lambda and G_eff are NaN.
DerivedQuantities from_rates(const RateParams& rates, bool allow_unstable = false);

DerivedQuantities derive(const SystemConfig& config, bool allow_unstable = false);
DerivedQuantities derive(const ModelConfig& config, bool allow_unstable = false);

/// Physical config -> rates (no spring evaluation).
RateParams rates_from_config(const SystemConfig& config);

struct RegimeMargins {
    double mech_over_split = 0.1;     // omega_m / omega_s
    double coupling_over_gap = 0.1;   // G_0 / (2 omega_s)
    double decay_over_mech = 1.0;     // gamma_{c,d} / omega_m
    double decay_over_gap = 0.1;      // gamma_{c,d} / (2 omega_s)
};

struct RegimeCheck {
    std::string name;
    double ratio = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct RegimeReport {
    std::vector<RegimeCheck> checks;
    bool pass() const;
};

RegimeReport validate_regime(const DerivedQuantities& derived, const RegimeMargins& margins = {});

} // namespace mechsql
