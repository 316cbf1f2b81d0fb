#pragma once

#include <complex>
#include <cstdint>
#include <ostream>
#include <vector>

#include "mechsql/noise.hpp"
#include "mechsql/params.hpp"
#include "mechsql/table.hpp"

namespace mechsql {

/// `full` co-integrates the idle field (stiff at 2 omega_s) with the
/// mechanics; `adiabatic` eliminates it and drives the mechanics with the
/// low-frequency back-action force, the spring absorbed into omega_eff.
enum class SimMode { full, adiabatic };

std::string_view to_string(SimMode mode);
SimMode sim_mode_from_string(std::string_view name);

struct SimConfig {
    double dt = 0.0;          // 0 selects max_step()
    double duration = 0.0;    // 0 selects the largest tau
    int n_trials = 100;
    std::uint64_t seed = 1;
    SimMode mode = SimMode::adiabatic;
    std::vector<double> tau_grid;

    /// Quantum number fixed by the initial condition: (q0, p0) sit on a circle
    /// of radius sqrt(2 n_true) with a random phase.
    double n_true = 1.0;
    /// Vacuum quadrature density is vacuum_noise_scale / 2.
    double vacuum_noise_scale = 1.0;
    int record_stride = 1;
    int workers = 1;
};

/// Largest admissible step: 1/(20 max(omega_eff, gamma_c)) adiabatic,
/// 1/(20 * 2 omega_s) full.
double max_step(const DerivedQuantities& d, SimMode mode);

/// Throws StepTooLarge / ConfigError on an inconsistent SimConfig.
void validate_sim(const SimConfig& sim, const DerivedQuantities& d);

NoiseLevels noise_levels(const DerivedQuantities& d, double vacuum_noise_scale);

/// Sampled path. q, p are the mechanical quadratures normalized to omega_m
/// (q' = omega_m p); q0, p0 are the initial quadratures normalized to
/// omega_eff, so N = (q0^2 + p0^2)/2. `readout` is the cumulative estimator
/// integral excluding the raw shot input in adiabatic mode (which
/// estimate_N adds from the noise streams) and the full detected output
/// quadrature in full mode.
struct Trajectory {
    SimMode mode = SimMode::adiabatic;
    double dt = 0.0;
    int stride = 1;
    std::vector<double> t, q, p, N;
    std::vector<double> d1_re, d1_im;   // first-order idle field
    std::vector<double> c2_re, c2_im;   // second-order signal field
    std::vector<double> readout;
    double q0 = 0.0;
    double p0 = 0.0;
};

/// Integrate one path driven by explicit noise streams. With empty streams
/// the run is noiseless. Records every `record_stride` steps. The optical
/// fluctuations start at zero here; Monte Carlo trials start them in their
/// stationary vacuum state instead.
Trajectory integrate(const SimConfig& sim, const DerivedQuantities& d, const NoiseStreams& noise, double q0,
                     double p0);

/// Noiseless path of `n_steps` steps without materializing zero streams.
Trajectory integrate_noiseless(const SimConfig& sim, const DerivedQuantities& d, std::size_t n_steps, double q0,
                               double p0);

struct SecondOrderSignal {
    std::vector<std::complex<double>> convolution;  // -i G_0 int e^{-gamma_c(t-t')} q d dt'
    std::vector<std::complex<double>> adiabatic;    // i s G_eff^2 c_bar N / (2 gamma_c omega_s)
};

/// Both forms of the second-order field on the recorded grid. The
/// convolution is accurate when the trajectory was recorded every step.
SecondOrderSignal second_order_signal(const Trajectory& traj, const DerivedQuantities& d);

struct EstimatorSample {
    double tau = 0.0;
    double Y = 0.0;
    double N_est = 0.0;
    double N_true = 0.0;
};

/// Gain of the dispersive readout, G_eff^2 c_bar / (sqrt(gamma_c) omega_s).
double readout_gain(const DerivedQuantities& d);

/// Y(tau) and N_est = -Y / (gain tau). `tau` is rounded to the recorded grid.
EstimatorSample estimate_N(const Trajectory& traj, const NoiseStreams& noise, double tau,
                           const DerivedQuantities& d);

struct MonteCarloRow {
    double tau = 0.0;
    double dn2_emp = 0.0;    // mean of (N_est - N_true)^2
    double stderr_ = 0.0;    // jackknife standard error of dn2_emp
    double dn2_closed = 0.0; // closed form as written
    double dn2_pred = 0.0;   // closed form rescaled to the vacuum noise scale, plus initial-amplitude term
    double mean_error = 0.0;
    double var_error = 0.0;
};

struct MonteCarloResult {
    std::vector<MonteCarloRow> rows;
    double dt = 0.0;
    int n_trials = 0;
    double vacuum_noise_scale = 1.0;
    /// errors[trial][k] = N_est - N_true at tau_grid[k]
    std::vector<std::vector<double>> errors;
};

/// Per-tau mean-square error of N_est over independent trials. Trial k uses
/// random substreams derived from (seed, k) only, and results are reduced in
/// trial order, so the table is independent of `workers`.
MonteCarloResult monte_carlo_resolution(const SimConfig& sim, const DerivedQuantities& d);

/// Closed-form prediction the Monte Carlo should reproduce: the shot term
/// scales with the vacuum noise scale kappa as kappa/2, back-action as
/// (kappa/2)^2, and a nonzero n_true adds 2 n_true D tau / 3.
double predicted_mse(double tau, const DerivedQuantities& d, double vacuum_noise_scale, double n_true);

/// Delete-one jackknife standard error of the mean of `values`.
double jackknife_stderr(const std::vector<double>& values);

Table monte_carlo_table(const MonteCarloResult& result);

/// The first `k` trials of the same ensemble, recorded every `record_stride`.
std::vector<Trajectory> dump_trajectories(const SimConfig& sim, const DerivedQuantities& d, int k);

Table trajectory_table(const std::vector<Trajectory>& trajectories);

} // namespace mechsql
