#include "mechsql/langevin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "mechsql/constants.hpp"
#include "mechsql/error.hpp"
#include "mechsql/parallel.hpp"
#include "mechsql/resolution.hpp"
#include "mechsql/spectra.hpp"

namespace mechsql {

using cplx = std::complex<double>;

namespace {

constexpr cplx I{0.0, 1.0};
const double kSqrt2 = std::sqrt(2.0);

// Mechanics with the idle mode eliminated, in omega_eff-normalized
// quadratures (Q, P) = (q / Lambda, Lambda p): Q' = omega_eff P,
// P' = -omega_eff Q - gamma_m P + Lambda f, with f the white force on p.
class AdiabaticStepper {
public:
    AdiabaticStepper(const DerivedQuantities& d, double h)
        : h_(h), lambda_(d.Lambda), cos_(std::cos(d.omega_eff * h)), sin_(std::sin(d.omega_eff * h)),
          damp_(std::exp(-d.gamma_m * h))
    {
    }

    void reset(double Q0, double P0)
    {
        Q_ = Q0;
        P_ = P0;
        N_ = 0.5 * (Q0 * Q0 + P0 * P0);
        signal_ = 0.0;
    }

    /// `impulse` is the integral of the force on p over the step.
    void step(double impulse)
    {
        const double P = P_ * damp_ + lambda_ * impulse;
        const double Q = Q_;
        Q_ = Q * cos_ + P * sin_;
        P_ = -Q * sin_ + P * cos_;
        const double N = 0.5 * (Q_ * Q_ + P_ * P_);
        signal_ += 0.5 * h_ * (N_ + N);
        N_ = N;
    }

    double q() const { return lambda_ * Q_; }
    double p() const { return P_ / lambda_; }
    double N() const { return N_; }
    /// int_0^t N dt'
    double signal() const { return signal_; }

private:
    double h_, lambda_, cos_, sin_, damp_;
    double Q_ = 0.0, P_ = 0.0, N_ = 0.0, signal_ = 0.0;
};

// Linearized Langevin system with the idle field kept: exponential
// integrators for the three optical amplitudes (stiff rotation at the idle
// detuning), kick + exact free rotation for the mechanics.
class FullStepper {
public:
    FullStepper(const DerivedQuantities& d, double h)
        : h_(h), sign_(d.spring_sign()), gamma_m_(d.gamma_m), G0_(d.G_0), c_bar_(d.c_bar), gamma_c_(d.gamma_c),
          lambda_norm_(d.Lambda), cos_(std::cos(d.omega_m * h)), sin_(std::sin(d.omega_m * h))
    {
        lambda_d_ = cplx(d.gamma_d, d.idle_detuning());
        e_d_ = std::exp(-lambda_d_ * h);
        phi_d_ = (1.0 - e_d_) / lambda_d_;
        // Weight of the end-of-step value for a linearly interpolated drive.
        psi_d_ = phi_d_ - (1.0 - e_d_ * (1.0 + lambda_d_ * h)) / (lambda_d_ * lambda_d_ * h);
        noise_d_ = std::sqrt(2.0 * d.gamma_d) * std::exp(-0.5 * lambda_d_ * h);
        e_c_ = std::exp(-d.gamma_c * h);
        phi_c_ = -std::expm1(-d.gamma_c * h) / d.gamma_c;
        noise_c_ = std::sqrt(2.0 * d.gamma_c) * std::exp(-0.5 * d.gamma_c * h);
    }

    /// `c1`, `d_vac` are the initial optical fluctuations (zero for a
    /// deterministic start).
    void reset(double q, double p, double N0, cplx c1 = {}, cplx d_vac = {})
    {
        q_ = q;
        p_ = p;
        d_ = -I * G0_ * c_bar_ * q / lambda_d_ + d_vac;
        c1_ = c1;
        // Steady dispersive response to the initial quantum number.
        c2_ = I * sign_ * G0_ * G0_ * lambda_norm_ * lambda_norm_ * c_bar_ * N0 / (2.0 * gamma_c_ * omega_s());
        readout_ = 0.0;
    }

    void step(double du1, double du2, double dv1, double dv2, double dxi)
    {
        const cplx dc = cplx(du1, du2) / kSqrt2;
        const cplx dd = cplx(dv1, dv2) / kSqrt2;

        const double pk = p_ + 0.5 * h_ * (-gamma_m_ * p_ - force(d_)) + dxi;
        const double q_next = q_ * cos_ + pk * sin_;
        const double p_rot = -q_ * sin_ + pk * cos_;

        const cplx drive = -I * G0_ * c_bar_;
        const cplx d_next = e_d_ * d_ + drive * (phi_d_ * q_ + psi_d_ * (q_next - q_)) + noise_d_ * dd;
        const double p_next = p_rot + 0.5 * h_ * (-gamma_m_ * p_rot - force(d_next));
        const cplx c2_next = e_c_ * c2_ + phi_c_ * (-I * G0_) * 0.5 * (q_ * d_ + q_next * d_next);
        const cplx c1_next = e_c_ * c1_ + noise_c_ * dc;

        // Output c_out = sqrt(2 gamma_c) c - c_in, integrated over the step.
        const cplx out = std::sqrt(2.0 * gamma_c_) * 0.5 * h_ * (c1_ + c2_ + c1_next + c2_next) - dc;
        // Detected quadrature oriented so that Y = int u2 - gain int N dt.
        readout_ += -sign_ * kSqrt2 * out.imag();

        q_ = q_next;
        p_ = p_next;
        d_ = d_next;
        c1_ = c1_next;
        c2_ = c2_next;
    }

    double q() const { return q_; }
    double p() const { return p_; }
    double N() const
    {
        const double Q = q_ / lambda_norm_;
        const double P = p_ * lambda_norm_;
        return 0.5 * (Q * Q + P * P);
    }
    cplx d() const { return d_; }
    cplx c2() const { return c2_; }
    double readout() const { return readout_; }

private:
    double force(cplx d) const { return 2.0 * G0_ * c_bar_ * d.real(); }
    double omega_s() const { return std::abs(lambda_d_.imag()) / 2.0; }

    double h_, sign_, gamma_m_, G0_, c_bar_, gamma_c_, lambda_norm_, cos_, sin_;
    cplx lambda_d_, e_d_, phi_d_, psi_d_, noise_d_;
    double e_c_, phi_c_, noise_c_;
    double q_ = 0.0, p_ = 0.0;
    cplx d_, c1_, c2_;
    double readout_ = 0.0;
};

// Low-frequency coefficients of the back-action force on v1, v2.
struct ForceCoefficients {
    double v1 = 0.0;
    double v2 = 0.0;
};

ForceCoefficients force_coefficients(const DerivedQuantities& d)
{
    const auto r = rp_transfer(0.0, d);
    return {r.coeff_v1.real(), r.coeff_v2.real()};
}

double resolve_dt(const SimConfig& sim, const DerivedQuantities& d)
{
    return sim.dt > 0.0 ? sim.dt : max_step(d, sim.mode);
}

void record_adiabatic(Trajectory& tr, double t, const AdiabaticStepper& s, const DerivedQuantities& d,
                      double gain)
{
    const double q = s.q();
    const cplx d1 = -I * d.G_0 * d.c_bar * q / cplx(d.gamma_d, d.idle_detuning());
    const cplx c2 = I * d.spring_sign() * d.G_eff * d.G_eff * d.c_bar * s.N() / (2.0 * d.gamma_c * d.omega_s);
    tr.t.push_back(t);
    tr.q.push_back(q);
    tr.p.push_back(s.p());
    tr.N.push_back(s.N());
    tr.d1_re.push_back(d1.real());
    tr.d1_im.push_back(d1.imag());
    tr.c2_re.push_back(c2.real());
    tr.c2_im.push_back(c2.imag());
    tr.readout.push_back(-gain * s.signal());
}

void record_full(Trajectory& tr, double t, const FullStepper& s)
{
    tr.t.push_back(t);
    tr.q.push_back(s.q());
    tr.p.push_back(s.p());
    tr.N.push_back(s.N());
    tr.d1_re.push_back(s.d().real());
    tr.d1_im.push_back(s.d().imag());
    tr.c2_re.push_back(s.c2().real());
    tr.c2_im.push_back(s.c2().imag());
    tr.readout.push_back(s.readout());
}

Trajectory run_path(const SimConfig& sim, const DerivedQuantities& d, const NoiseStreams* noise,
                    std::size_t n_steps, double q0, double p0)
{
    validate_sim(sim, d);
    const double h = resolve_dt(sim, d);
    const int stride = std::max(sim.record_stride, 1);

    Trajectory tr;
    tr.mode = sim.mode;
    tr.dt = h;
    tr.stride = stride;
    tr.q0 = q0;
    tr.p0 = p0;
    const double N0 = 0.5 * (q0 * q0 + p0 * p0);
    auto inc = [&](const std::vector<double>& v, std::size_t k) { return noise ? v[k] : 0.0; };

    if (sim.mode == SimMode::adiabatic) {
        const auto f = force_coefficients(d);
        const double gain = readout_gain(d);
        AdiabaticStepper s(d, h);
        s.reset(q0, p0);
        record_adiabatic(tr, 0.0, s, d, gain);
        for (std::size_t k = 0; k < n_steps; ++k) {
            const double impulse = noise ? -(f.v1 * noise->v1[k] + f.v2 * noise->v2[k]) + noise->xi[k] : 0.0;
            s.step(impulse);
            if ((k + 1) % stride == 0)
                record_adiabatic(tr, h * static_cast<double>(k + 1), s, d, gain);
        }
    } else {
        FullStepper s(d, h);
        s.reset(d.Lambda * q0, p0 / d.Lambda, N0);
        record_full(tr, 0.0, s);
        for (std::size_t k = 0; k < n_steps; ++k) {
            if (noise)
                s.step(inc(noise->u1, k), inc(noise->u2, k), inc(noise->v1, k), inc(noise->v2, k), inc(noise->xi, k));
            else
                s.step(0.0, 0.0, 0.0, 0.0, 0.0);
            if ((k + 1) % stride == 0)
                record_full(tr, h * static_cast<double>(k + 1), s);
        }
    }
    return tr;
}

// Step indices at which the estimator is read out.
std::vector<std::size_t> tau_steps(const std::vector<double>& tau_grid, double h)
{
    std::vector<std::size_t> steps;
    steps.reserve(tau_grid.size());
    for (const double tau : tau_grid)
        steps.push_back(static_cast<std::size_t>(std::max(1.0, std::round(tau / h))));
    return steps;
}

struct TrialSetup {
    const SimConfig& sim;
    const DerivedQuantities& d;
    double h;
    std::vector<std::size_t> steps;  // sorted readout steps
    std::vector<std::size_t> order;  // steps[k] belongs to tau_grid[order[k]]
    double gain;
};

// One Monte Carlo trial; returns N_est - N_true per tau (in tau_grid order).
std::vector<double> run_trial(const TrialSetup& setup, std::uint64_t trial, Trajectory* record)
{
    const auto& sim = setup.sim;
    const auto& d = setup.d;
    const double h = setup.h;
    const double kappa = sim.vacuum_noise_scale;

    TrialRng init(sim.seed, trial, Substream::initial_state);
    const double phase = two_pi * init.uniform();
    const double radius = std::sqrt(2.0 * sim.n_true);
    const double Q0 = radius * std::cos(phase);
    const double P0 = radius * std::sin(phase);

    std::vector<double> errors(setup.steps.size());
    const int stride = std::max(sim.record_stride, 1);
    if (record) {
        record->mode = sim.mode;
        record->dt = h;
        record->stride = stride;
        record->q0 = Q0;
        record->p0 = P0;
    }

    TrialRng rng(sim.seed, trial, Substream::noise);
    const std::size_t last = setup.steps.back();

    if (sim.mode == SimMode::adiabatic) {
        // The back-action quadratures and the thermal force are independent
        // white inputs, so their combined impulse is one Gaussian per step.
        const auto f = force_coefficients(d);
        const double density = 0.5 * kappa * (f.v1 * f.v1 + f.v2 * f.v2) + 2.0 * d.gamma_m * d.n_th;
        const double sigma = std::sqrt(density * h);
        // The raw shot input enters Y only through int u2 dt, drawn per interval.
        TrialRng shot(sim.seed, trial, Substream::shot);
        double shot_integral = 0.0;
        std::size_t shot_step = 0;

        AdiabaticStepper s(d, h);
        s.reset(Q0, P0);
        if (record)
            record_adiabatic(*record, 0.0, s, d, setup.gain);
        std::size_t next = 0;
        for (std::size_t k = 1; k <= last; ++k) {
            s.step(sigma * rng.normal());
            if (record && k % stride == 0)
                record_adiabatic(*record, h * static_cast<double>(k), s, d, setup.gain);
            while (next < setup.steps.size() && setup.steps[next] == k) {
                shot_integral += std::sqrt(0.5 * kappa * h * static_cast<double>(k - shot_step)) * shot.normal();
                shot_step = k;
                const double tau = h * static_cast<double>(k);
                const double Y = shot_integral - setup.gain * s.signal();
                errors[setup.order[next]] = -Y / (setup.gain * tau) - sim.n_true;
                ++next;
            }
        }
    } else {
        const NoiseLevels levels = noise_levels(d, kappa);
        const double vac = std::sqrt(levels.vacuum_density * h);
        const double th = std::sqrt(levels.thermal_density * h);
        // Optical fluctuations start in their stationary vacuum state,
        // E|c|^2 = E|d|^2 = kappa / 2.
        const double sv = std::sqrt(0.25 * kappa);
        const cplx c1(sv * init.normal(), sv * init.normal());
        const cplx dv(sv * init.normal(), sv * init.normal());
        FullStepper s(d, h);
        s.reset(d.Lambda * Q0, P0 / d.Lambda, sim.n_true, c1, dv);
        if (record)
            record_full(*record, 0.0, s);
        std::size_t next = 0;
        for (std::size_t k = 1; k <= last; ++k) {
            // Same draw order as generate_noise.
            const double u1 = vac * rng.normal();
            const double u2 = vac * rng.normal();
            const double v1 = vac * rng.normal();
            const double v2 = vac * rng.normal();
            const double xi = th * rng.normal();
            s.step(u1, u2, v1, v2, xi);
            if (record && k % stride == 0)
                record_full(*record, h * static_cast<double>(k), s);
            while (next < setup.steps.size() && setup.steps[next] == k) {
                const double tau = h * static_cast<double>(k);
                errors[setup.order[next]] = -s.readout() / (setup.gain * tau) - sim.n_true;
                ++next;
            }
        }
    }
    return errors;
}

TrialSetup make_setup(const SimConfig& sim, const DerivedQuantities& d)
{
    validate_sim(sim, d);
    if (sim.tau_grid.empty())
        throw ConfigError("Monte Carlo needs a non-empty tau grid");
    TrialSetup setup{sim, d, resolve_dt(sim, d), {}, {}, readout_gain(d)};
    const auto raw = tau_steps(sim.tau_grid, setup.h);
    setup.order.resize(raw.size());
    std::iota(setup.order.begin(), setup.order.end(), std::size_t{0});
    std::stable_sort(setup.order.begin(), setup.order.end(), [&](auto a, auto b) { return raw[a] < raw[b]; });
    for (const auto idx : setup.order)
        setup.steps.push_back(raw[idx]);
    return setup;
}

} // namespace

std::string_view to_string(SimMode mode) { return mode == SimMode::full ? "full" : "adiabatic"; }

SimMode sim_mode_from_string(std::string_view name)
{
    if (name == "full")
        return SimMode::full;
    if (name == "adiabatic")
        return SimMode::adiabatic;
    throw ConfigError(fmt::format("mode must be 'full' or 'adiabatic', got '{}'", name));
}

double max_step(const DerivedQuantities& d, SimMode mode)
{
    if (mode == SimMode::full)
        return 1.0 / (20.0 * 2.0 * d.omega_s);
    return 1.0 / (20.0 * std::max(d.omega_eff, d.gamma_c));
}

void validate_sim(const SimConfig& sim, const DerivedQuantities& d)
{
    if (!d.stable())
        throw UnstableSpring("cannot simulate an unstable optical spring", d.threshold_photons,
                             d.optics ? d.optics->I_0_instability : std::nan(""));
    if (sim.dt < 0.0)
        throw ConfigError("dt must be positive");
    const double limit = max_step(d, sim.mode);
    if (sim.dt > limit * (1.0 + 1e-12))
        throw StepTooLarge(fmt::format("dt = {:.6g} exceeds the {} limit {:.6g}", sim.dt, to_string(sim.mode), limit));
    if (sim.n_trials < 2)
        throw ConfigError("n_trials must be at least 2");
    if (sim.n_true < 0.0)
        throw ConfigError("n_true must be non-negative");
    if (sim.vacuum_noise_scale < 0.0)
        throw ConfigError("vacuum_noise_scale must be non-negative");
    for (const double tau : sim.tau_grid) {
        if (!(tau > 0.0))
            throw ConfigError("tau grid values must be positive");
        if (sim.duration > 0.0 && tau > sim.duration * (1.0 + 1e-12))
            throw ConfigError(fmt::format("tau = {:.6g} exceeds the simulated duration {:.6g}", tau, sim.duration));
    }
}

NoiseLevels noise_levels(const DerivedQuantities& d, double vacuum_noise_scale)
{
    return {0.5 * vacuum_noise_scale, 2.0 * d.gamma_m * d.n_th};
}

Trajectory integrate(const SimConfig& sim, const DerivedQuantities& d, const NoiseStreams& noise, double q0,
                     double p0)
{
    if (noise.size() == 0) {
        const double h = resolve_dt(sim, d);
        return run_path(sim, d, nullptr, static_cast<std::size_t>(std::llround(sim.duration / h)), q0, p0);
    }
    SimConfig matched = sim;
    if (sim.dt > 0.0 && std::abs(sim.dt - noise.dt) > 1e-12 * noise.dt)
        throw ConfigError("noise streams were generated with a different dt");
    matched.dt = noise.dt;
    return run_path(matched, d, &noise, noise.size(), q0, p0);
}

Trajectory integrate_noiseless(const SimConfig& sim, const DerivedQuantities& d, std::size_t n_steps, double q0,
                               double p0)
{
    return run_path(sim, d, nullptr, n_steps, q0, p0);
}

SecondOrderSignal second_order_signal(const Trajectory& traj, const DerivedQuantities& d)
{
    SecondOrderSignal out;
    const std::size_t n = traj.t.size();
    out.convolution.resize(n);
    out.adiabatic.resize(n);

    const double gain = d.spring_sign() * d.G_eff * d.G_eff * d.c_bar / (2.0 * d.gamma_c * d.omega_s);
    for (std::size_t k = 0; k < n; ++k)
        out.adiabatic[k] = I * gain * traj.N[k];

    // Recursive exponential filter with the source held piecewise linear.
    cplx c = n ? out.adiabatic[0] : cplx{};
    if (n)
        out.convolution[0] = c;
    for (std::size_t k = 1; k < n; ++k) {
        const double h = traj.t[k] - traj.t[k - 1];
        const double e = std::exp(-d.gamma_c * h);
        const cplx s0 = -I * d.G_0 * traj.q[k - 1] * cplx(traj.d1_re[k - 1], traj.d1_im[k - 1]);
        const cplx s1 = -I * d.G_0 * traj.q[k] * cplx(traj.d1_re[k], traj.d1_im[k]);
        // Exact for a linear source: weights for s0 and s1.
        const double gh = d.gamma_c * h;
        const double w1 = (gh - 1.0 + e) / (d.gamma_c * gh);
        const double w0 = (1.0 - e) / d.gamma_c - w1;
        c = e * c + w0 * s0 + w1 * s1;
        out.convolution[k] = c;
    }
    return out;
}

double readout_gain(const DerivedQuantities& d)
{
    return d.G_eff * d.G_eff * d.c_bar / (std::sqrt(d.gamma_c) * d.omega_s);
}

EstimatorSample estimate_N(const Trajectory& traj, const NoiseStreams& noise, double tau, const DerivedQuantities& d)
{
    if (traj.t.empty())
        throw ConfigError("empty trajectory");
    const double spacing = traj.dt * traj.stride;
    const auto idx = static_cast<std::size_t>(std::llround(tau / spacing));
    if (idx == 0 || idx >= traj.t.size())
        throw ConfigError(fmt::format("tau = {:.6g} is outside the recorded trajectory", tau));

    EstimatorSample e;
    e.tau = traj.t[idx];
    e.Y = traj.readout[idx];
    if (traj.mode == SimMode::adiabatic && noise.size() > 0) {
        const std::size_t steps = idx * static_cast<std::size_t>(traj.stride);
        if (steps > noise.size())
            throw ConfigError("noise streams shorter than the trajectory");
        e.Y += std::accumulate(noise.u2.begin(), noise.u2.begin() + static_cast<std::ptrdiff_t>(steps), 0.0);
    }
    e.N_est = -e.Y / (readout_gain(d) * e.tau);
    e.N_true = 0.5 * (traj.q0 * traj.q0 + traj.p0 * traj.p0);
    return e;
}

double predicted_mse(double tau, const DerivedQuantities& d, double vacuum_noise_scale, double n_true)
{
    const auto k = resolution_coefficients(d);
    const double half_kappa = 0.5 * vacuum_noise_scale;
    // Heating rates dE[N]/dt of the back-action and thermal forces.
    const double D_ba = half_kappa * d.gamma_d * d.G_eff * d.G_eff * d.c_bar * d.c_bar / (2.0 * d.omega_s * d.omega_s);
    const double D_th = d.gamma_m * d.n_th * d.omega_m / d.omega_eff;
    return k.shot * half_kappa / tau + k.backaction * half_kappa * half_kappa * tau * tau + k.thermal * tau * tau
        + 2.0 / 3.0 * n_true * (D_ba + D_th) * tau;
}

double jackknife_stderr(const std::vector<double>& values)
{
    const std::size_t n = values.size();
    if (n < 2)
        return std::nan("");
    const double total = std::accumulate(values.begin(), values.end(), 0.0);
    double mean_loo = 0.0;
    std::vector<double> loo(n);
    for (std::size_t i = 0; i < n; ++i) {
        loo[i] = (total - values[i]) / static_cast<double>(n - 1);
        mean_loo += loo[i];
    }
    mean_loo /= static_cast<double>(n);
    double ss = 0.0;
    for (const double v : loo)
        ss += (v - mean_loo) * (v - mean_loo);
    return std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n) * ss);
}

MonteCarloResult monte_carlo_resolution(const SimConfig& sim, const DerivedQuantities& d)
{
    const TrialSetup setup = make_setup(sim, d);
    MonteCarloResult result;
    result.dt = setup.h;
    result.n_trials = sim.n_trials;
    result.vacuum_noise_scale = sim.vacuum_noise_scale;
    result.errors.resize(static_cast<std::size_t>(sim.n_trials));

    parallel_for(result.errors.size(), sim.workers,
                 [&](std::size_t trial) { result.errors[trial] = run_trial(setup, trial, nullptr); });

    const std::size_t n = result.errors.size();
    for (std::size_t k = 0; k < sim.tau_grid.size(); ++k) {
        std::vector<double> sq(n);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = result.errors[i][k];
            sq[i] = e * e;
            sum += e;
        }
        MonteCarloRow row;
        row.tau = setup.h * static_cast<double>(std::max(1.0, std::round(sim.tau_grid[k] / setup.h)));
        row.dn2_emp = std::accumulate(sq.begin(), sq.end(), 0.0) / static_cast<double>(n);
        row.stderr_ = jackknife_stderr(sq);
        row.mean_error = sum / static_cast<double>(n);
        row.var_error = (row.dn2_emp - row.mean_error * row.mean_error) * static_cast<double>(n) / static_cast<double>(n - 1);
        row.dn2_closed = resolution_squared(row.tau, d).total;
        row.dn2_pred = predicted_mse(row.tau, d, sim.vacuum_noise_scale, sim.n_true);
        result.rows.push_back(row);
    }
    return result;
}

Table monte_carlo_table(const MonteCarloResult& result)
{
    Table t;
    t.columns = {"tau", "dn2_emp", "stderr", "dn2_closed", "dn2_pred", "mean_error", "var_error", "n_trials"};
    for (const auto& r : result.rows) {
        t.add_row({r.tau, r.dn2_emp, r.stderr_, r.dn2_closed, r.dn2_pred, r.mean_error, r.var_error,
                   static_cast<std::int64_t>(result.n_trials)});
    }
    return t;
}

std::vector<Trajectory> dump_trajectories(const SimConfig& sim, const DerivedQuantities& d, int k)
{
    const TrialSetup setup = make_setup(sim, d);
    const auto count = static_cast<std::size_t>(std::clamp(k, 0, sim.n_trials));
    std::vector<Trajectory> out(count);
    for (std::size_t trial = 0; trial < count; ++trial)
        run_trial(setup, trial, &out[trial]);
    return out;
}

Table trajectory_table(const std::vector<Trajectory>& trajectories)
{
    Table t;
    t.columns = {"trial", "t", "q", "p", "N", "d1_re", "d1_im", "c2_re", "c2_im", "readout"};
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        const auto& tr = trajectories[i];
        for (std::size_t k = 0; k < tr.t.size(); ++k) {
            t.add_row({static_cast<std::int64_t>(i), tr.t[k], tr.q[k], tr.p[k], tr.N[k], tr.d1_re[k], tr.d1_im[k],
                       tr.c2_re[k], tr.c2_im[k], tr.readout[k]});
        }
    }
    return t;
}

} // namespace mechsql
