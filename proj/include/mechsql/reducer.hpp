#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mechsql/params.hpp"
#include "mechsql/table.hpp"

namespace mechsql {

/// n mechanical modes coupled to n' external modes through
/// hbar chi_{ij nu} q_nu (a_i^dagger a_j + h.c.). Indices are 0-based; the
/// probed mechanical mode is 0.
struct ParametricSystem {
    std::vector<double> Omega;   // mechanical frequencies, rad/s
    std::vector<double> omega;   // external frequencies, rad/s (any common frame)
    /// chi[(i * n' + j) * n + nu], symmetric in (i, j)
    std::vector<double> chi;

    int drive_index = 0;
    double drive_amplitude = 0.0;  // classical amplitude of the driven mode

    /// Optional per-mode decay rates (size n' or empty) and mechanical bath.
    std::vector<double> decay;
    double gamma_m = 0.0;
    double n_th = 0.0;

    ParametricSystem() = default;
    ParametricSystem(std::vector<double> Omega_, std::vector<double> omega_);

    int n_mech() const { return static_cast<int>(Omega.size()); }
    int n_ext() const { return static_cast<int>(omega.size()); }

    double coupling(int i, int j, int nu) const;
    /// Sets both chi_{ij nu} and chi_{ji nu}.
    void set_coupling(int i, int j, int nu, double value);

    /// Throws ConfigError on shape/symmetry problems and non-positive
    /// mechanical frequencies, DegenerateModes on coincident external modes.
    void validate() const;
};

/// |omega_i - omega_j| below this (relative to max |omega|) is degenerate.
inline constexpr double degeneracy_tolerance = 1e-6;

/// Per pair (i < j): max_nu |chi_ij nu| / |omega_i - omega_j| and
/// max_nu Omega_nu / |omega_i - omega_j|. Degenerate pairs report +inf.
RegimeReport validate_dispersive(const ParametricSystem& system, double threshold = 0.1);

/// omega_i'(q) = constant + linear . q + q^T quadratic q
struct EffectiveFrequency {
    double constant = 0.0;
    std::vector<double> linear;                  // size n
    std::vector<std::vector<double>> quadratic;  // n x n, symmetric

    double evaluate(const std::vector<double>& q) const;
};

struct DispersiveReduction {
    std::vector<EffectiveFrequency> omega_prime;  // per external mode
    /// chi_{1i1} a_1 / (omega_i - omega_1) for i != drive (0 at the drive).
    std::vector<double> residual_linear;
    bool qnd_conditions_ok = false;
    std::vector<std::string> qnd_violations;
};

/// Second-order perturbative reduction of the external-mode frequencies.
DispersiveReduction reduce(const ParametricSystem& system);

/// Eigenvalues of the clamped-q frequency matrix, ordered so that entry i
/// is the eigenvalue continuously connected to omega_i (largest eigenvector
/// overlap).
std::vector<double> brute_force_eigen(const ParametricSystem& system, const std::vector<double>& q);

struct TripartiteEquivalent {
    int probe = 0;   // driven external mode
    int idle = 1;    // nearest external mode
    double omega_s = 0.0;   // |omega_idle - omega_probe| / 2
    double G_0 = 0.0;       // |chi_{probe idle 0}|
    DrivenMode driven_mode = DrivenMode::common;
    /// q_1^2 coefficient of the probe frequency from all idle modes and from
    /// the nearest idle mode only.
    double quadratic_full = 0.0;
    double quadratic_tripartite = 0.0;
    std::vector<std::string> warnings;
    /// Present when the system carries decay rates.
    std::optional<RateParams> rates;
};

/// Throws QndViolated if the probe mode has linear self-coupling or couples
/// to mechanical modes other than 0.
TripartiteEquivalent to_tripartite(const ParametricSystem& system);

/// System description file:
///
///     Omega = 1.0            # mechanical frequencies
///     omega = -50 50         # external frequencies
///     decay = 0.1 0.1        # optional
///     drive = 0 20           # mode index, amplitude
///     gamma_m = 0            # optional
///     n_th = 0               # optional
///     chi 0 1 0 = 0.05       # i j nu = value
ParametricSystem parse_system(std::string_view text);
ParametricSystem load_system_file(const std::string& path);

/// Build the two-mode coupled-cavity instance of a rate set, in the frame
/// rotating at the mean optical frequency.
ParametricSystem coupled_cavity_system(const RateParams& rates);

/// One row per external mode: constant, linear and diagonal quadratic
/// coefficients on mechanical mode 0, residual linear coupling.
Table reduction_table(const ParametricSystem& system, const DispersiveReduction& reduction);

} // namespace mechsql
