#include <cmath>
#include <complex>
#include <numeric>
#include <random>

#include <doctest.h>

#include "mechsql/error.hpp"
#include "mechsql/langevin.hpp"
#include "mechsql/resolution.hpp"
#include "mechsql/spectra.hpp"
#include "support.hpp"

using namespace mechsql;
using doctest::Approx;

namespace {

// Small splitting so the full model stays cheap to integrate.
RateParams fast_rates()
{
    RateParams r;
    r.omega_m = 1.0;
    r.omega_s = 10.0;
    r.gamma_c = 0.1;
    r.gamma_d = 0.1;
    r.G_0 = 0.1;
    r.c_bar = 5.0;
    return r;
}

// c_bar that gives a requested Lambda.
double c_bar_for_lambda(const RateParams& r, double lambda)
{
    return std::sqrt((1.0 - std::pow(lambda, -4.0)) * r.omega_m * r.omega_s / (r.G_0 * r.G_0));
}

SimConfig sim_for(SimMode mode)
{
    SimConfig s;
    s.mode = mode;
    return s;
}

NoiseStreams pair_sum(const NoiseStreams& fine)
{
    NoiseStreams c;
    c.dt = 2.0 * fine.dt;
    auto sum = [](const std::vector<double>& v) {
        std::vector<double> out(v.size() / 2);
        for (std::size_t k = 0; k < out.size(); ++k)
            out[k] = v[2 * k] + v[2 * k + 1];
        return out;
    };
    c.u1 = sum(fine.u1);
    c.u2 = sum(fine.u2);
    c.v1 = sum(fine.v1);
    c.v2 = sum(fine.v2);
    c.xi = sum(fine.xi);
    return c;
}

double variance(const std::vector<double>& x)
{
    const double n = static_cast<double>(x.size());
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double s = 0.0;
    for (double v : x)
        s += (v - m) * (v - m);
    return s / (n - 1.0);
}

} // namespace

TEST_CASE("free oscillator without coupling")
{
    auto r = fast_rates();
    r.G_0 = 0.0;
    const auto d = from_rates(r);
    for (const auto mode : {SimMode::full, SimMode::adiabatic}) {
        auto sim = sim_for(mode);
        const double h = max_step(d, mode);
        const auto n = static_cast<std::size_t>(std::round(200.0 * M_PI / h));
        const auto tr = integrate_noiseless(sim, d, n, 1.0, 0.0);
        double worst = 0.0;
        for (std::size_t k = 0; k < tr.t.size(); ++k) {
            worst = std::max(worst, std::abs(tr.q[k] - std::cos(tr.t[k])));
            worst = std::max(worst, std::abs(tr.p[k] + std::sin(tr.t[k])));
        }
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("noiseless estimator returns the conserved quantum number")
{
    auto r = fast_rates();
    r.c_bar = c_bar_for_lambda(r, 1.5);
    const auto d = from_rates(r);
    const NoiseStreams none;

    auto sim = sim_for(SimMode::adiabatic);
    const double q0 = 2.0 * std::cos(0.3), p0 = 2.0 * std::sin(0.3);
    const double h = max_step(d, SimMode::adiabatic);
    auto tr = integrate_noiseless(sim, d, static_cast<std::size_t>(500.0 / h), q0, p0);
    auto e = estimate_N(tr, none, 400.0, d);
    CHECK(e.N_true == Approx(2.0));
    CHECK(e.N_est == Approx(2.0).epsilon(1e-12));

    // The full model also carries optical damping, so the estimator reads
    // the time-averaged quantum number.
    sim = sim_for(SimMode::full);
    tr = integrate_noiseless(sim, d, static_cast<std::size_t>(200.0 / max_step(d, SimMode::full)), q0, p0);
    e = estimate_N(tr, none, 200.0, d);
    double mean_N = 0.0;
    for (std::size_t k = 1; k < tr.t.size(); ++k)
        mean_N += 0.5 * (tr.N[k] + tr.N[k - 1]) * (tr.t[k] - tr.t[k - 1]);
    mean_N /= tr.t.back();
    CHECK(mean_N < 2.0);
    CHECK(e.N_est == Approx(mean_N).epsilon(0.02));
}

TEST_CASE("optical spring frequency from the full model")
{
    auto r = fast_rates();
    r.omega_s = 20.0;
    for (const double lambda : {1.05, 2.0}) {
        r.c_bar = c_bar_for_lambda(r, lambda);
        const auto d = from_rates(r);
        REQUIRE(d.Lambda == Approx(lambda).epsilon(1e-12));
        auto sim = sim_for(SimMode::full);
        sim.record_stride = 8;
        const double h = max_step(d, SimMode::full);
        const auto tr = integrate_noiseless(sim, d, static_cast<std::size_t>(1500.0 / h), 1.0, 0.0);
        const double w = testing::fft_peak_frequency(tr.q, h * sim.record_stride);
        CHECK(w == Approx(d.omega_eff).epsilon(0.01));
        CHECK(std::abs(w - d.omega_m) > 0.01);
    }
}

TEST_CASE("thermal variance of the adiabatic model")
{
    auto r = fast_rates();
    r.c_bar = c_bar_for_lambda(r, 1.5);
    r.gamma_m = 0.01;
    r.n_th = 10.0;
    const auto d = from_rates(r);

    SimConfig sim;
    sim.mode = SimMode::adiabatic;
    sim.n_true = 0.0;
    sim.vacuum_noise_scale = 0.0;
    sim.n_trials = 8000;
    sim.seed = 11;
    sim.tau_grid = {100.0};
    sim.record_stride = static_cast<int>(std::round(50.0 / max_step(d, SimMode::adiabatic)));
    const auto paths = dump_trajectories(sim, d, sim.n_trials);
    std::vector<double> q;
    for (const auto& p : paths)
        q.push_back(p.q.back());
    const double t = paths.front().t.back();
    const double expected = std::pow(d.Lambda, 4) * d.n_th * (1.0 - std::exp(-d.gamma_m * t));
    CHECK(variance(q) == Approx(expected).epsilon(0.05));
}

TEST_CASE("second-order signal field")
{
    auto r = fast_rates();
    r.gamma_c = 0.05;
    r.gamma_d = 0.01;
    r.c_bar = c_bar_for_lambda(r, 1.5);
    const auto d = from_rates(r);
    auto sim = sim_for(SimMode::full);
    const double h = max_step(d, SimMode::full);
    const auto n = static_cast<std::size_t>(300.0 / h);

    // No motion, no signal.
    const auto idle = integrate_noiseless(sim, d, n / 10, 0.0, 0.0);
    for (std::size_t k = 0; k < idle.t.size(); ++k)
        REQUIRE(std::hypot(idle.c2_re[k], idle.c2_im[k]) == 0.0);

    const auto tr = integrate_noiseless(sim, d, n, std::sqrt(2.0), 0.0);
    const auto sig = second_order_signal(tr, d);
    // Average over the last 20 mechanical periods.
    const double window = 20.0 * 2.0 * M_PI / d.omega_eff;
    std::complex<double> sim_mean, conv_mean, adia_mean;
    double N_mean = 0.0;
    int count = 0;
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        if (tr.t[k] < tr.t.back() - window)
            continue;
        sim_mean += std::complex<double>(tr.c2_re[k], tr.c2_im[k]);
        conv_mean += sig.convolution[k];
        adia_mean += sig.adiabatic[k];
        N_mean += tr.N[k];
        ++count;
    }
    sim_mean /= count;
    conv_mean /= count;
    adia_mean /= count;
    N_mean /= count;
    const double stationary = d.G_eff * d.G_eff * d.c_bar / (2.0 * d.gamma_c * d.omega_s);
    CHECK(N_mean == Approx(1.0).epsilon(0.05));
    CHECK(adia_mean.imag() == Approx(stationary * N_mean).epsilon(1e-3));
    CHECK(std::abs(conv_mean - adia_mean) < 0.02 * std::abs(adia_mean));
    CHECK(std::abs(sim_mean - conv_mean) < 0.02 * std::abs(adia_mean));
}

TEST_CASE("uncoupled output is white vacuum")
{
    auto r = fast_rates();
    r.G_0 = 0.0;
    r.omega_s = 5.0;
    const auto d = from_rates(r);
    SimConfig sim;
    sim.mode = SimMode::full;
    sim.n_trials = 1500;
    sim.seed = 3;
    const double tau = 20.0;
    sim.tau_grid = {tau};
    sim.record_stride = static_cast<int>(std::round(tau / max_step(d, SimMode::full)));
    std::vector<double> Y;
    for (const auto& p : dump_trajectories(sim, d, sim.n_trials))
        Y.push_back(p.readout.back());
    CHECK(variance(Y) == Approx(tau / 2.0).epsilon(0.1));
}

TEST_CASE("strong convergence under step halving")
{
    auto r = fast_rates();
    r.c_bar = c_bar_for_lambda(r, 1.5);
    r.gamma_m = 0.01;
    r.n_th = 5.0;
    const auto d = from_rates(r);

    for (const auto mode : {SimMode::adiabatic, SimMode::full}) {
        auto sim = sim_for(mode);
        const double h_ref = max_step(d, mode) / 16.0;
        const double T = mode == SimMode::full ? 20.0 : 50.0;
        // Whole number of coarsest steps so every level ends at the same time.
        const auto n = 16 * static_cast<std::size_t>(std::round(T / (16.0 * h_ref)));
        std::vector<double> err(4, 0.0);
        for (std::uint64_t trial = 0; trial < 32; ++trial) {
            std::vector<NoiseStreams> levels{generate_noise(5, trial, n, h_ref, noise_levels(d, 1.0))};
            for (int k = 0; k < 4; ++k)
                levels.push_back(pair_sum(levels.back()));
            const double ref = integrate(sim, d, levels[0], 1.0, 0.5).q.back();
            for (int k = 0; k < 4; ++k)
                err[k] += std::abs(integrate(sim, d, levels[k + 1], 1.0, 0.5).q.back() - ref);
        }
        CAPTURE(to_string(mode));
        for (int k = 0; k + 1 < 4; ++k) {
            CAPTURE(k);
            CHECK(err[k] < 0.6 * err[k + 1]);
        }
    }
}

TEST_CASE("Monte Carlo ensembles are reproducible and worker independent")
{
    const auto d = from_rates(fast_rates());
    SimConfig sim;
    sim.n_trials = 12;
    sim.seed = 99;
    sim.tau_grid = {50.0, 10.0, 25.0};
    const auto a = monte_carlo_resolution(sim, d);
    sim.workers = 3;
    const auto b = monte_carlo_resolution(sim, d);
    CHECK(a.errors == b.errors);
    REQUIRE(a.rows.size() == 3);
    CHECK(a.rows[0].tau == Approx(50.0).epsilon(1e-3));
    CHECK(a.rows[1].tau == Approx(10.0).epsilon(1e-2));
    CHECK(a.rows[0].dn2_emp == b.rows[0].dn2_emp);
    sim.seed = 100;
    CHECK(monte_carlo_resolution(sim, d).errors != a.errors);

    // A dumped trajectory is the same path the ensemble used.
    sim.seed = 99;
    sim.record_stride = 1;
    const auto paths = dump_trajectories(sim, d, 2);
    REQUIRE(paths.size() == 2);
    CHECK(paths[1].N.front() == Approx(sim.n_true));
}

TEST_CASE("idle field fluctuations reproduce the integrated force variance")
{
    auto r = fast_rates();
    r.gamma_d = 1.0;
    r.c_bar = 1e-3;
    const auto d = from_rates(r);
    SimConfig sim;
    sim.mode = SimMode::full;
    sim.n_true = 0.0;
    sim.n_trials = 20;
    sim.seed = 4;
    sim.tau_grid = {1000.0};
    sim.record_stride = 40;
    std::vector<double> re;
    for (const auto& p : dump_trajectories(sim, d, sim.n_trials)) {
        for (std::size_t k = 10; k < p.d1_re.size(); ++k)
            re.push_back(p.d1_re[k]);
    }
    const double force_var = 4.0 * d.G_0 * d.G_0 * d.c_bar * d.c_bar * variance(re);
    CHECK(force_var == Approx(backaction_force_variance(d)).epsilon(0.05));
}

TEST_CASE("noise terms scale with the drive" * doctest::test_suite("slow"))
{
    // Shot part ~ (G_eff^2 c_bar)^-2 / tau, back-action part ~ (G_eff^2 c_bar^2)^2 tau^2.
    auto r = fast_rates();
    r.G_0 = 0.5;
    r.gamma_d = 1.0;
    const std::vector<double> drives{1.0, 1.4, 2.0};
    r.c_bar = drives.front();
    const double tau_mid = optimal_tau(from_rates(r)).tau_star;
    SimConfig sim;
    sim.n_true = 0.0;
    sim.n_trials = 400;
    sim.seed = 21;
    sim.tau_grid = {tau_mid / 30.0, 6.0 * tau_mid};
    std::vector<double> log_c, shot_law, ba_law, shot_emp, shot_pred, ba_emp, ba_pred;
    for (const double c : drives) {
        r.c_bar = c;
        const auto d = from_rates(r);
        const auto res = monte_carlo_resolution(sim, d);
        const double g2 = d.G_eff * d.G_eff;
        log_c.push_back(std::log(c));
        shot_law.push_back(-2.0 * std::log(g2 * c));
        ba_law.push_back(2.0 * std::log(g2 * c * c));
        shot_emp.push_back(std::log(res.rows[0].dn2_emp * res.rows[0].tau));
        shot_pred.push_back(std::log(res.rows[0].dn2_pred * res.rows[0].tau));
        ba_emp.push_back(std::log(res.rows[1].dn2_emp / (res.rows[1].tau * res.rows[1].tau)));
        ba_pred.push_back(std::log(res.rows[1].dn2_pred / (res.rows[1].tau * res.rows[1].tau)));
    }
    const double s_shot = testing::fit_slope(log_c, shot_emp);
    const double s_ba = testing::fit_slope(log_c, ba_emp);
    CAPTURE(s_shot);
    CAPTURE(s_ba);
    CHECK(testing::fit_slope(log_c, shot_pred) == Approx(testing::fit_slope(log_c, shot_law)).epsilon(0.02));
    CHECK(testing::fit_slope(log_c, ba_pred) == Approx(testing::fit_slope(log_c, ba_law)).epsilon(0.02));
    CHECK(s_shot == Approx(testing::fit_slope(log_c, shot_pred)).epsilon(0.1));
    CHECK(s_ba == Approx(testing::fit_slope(log_c, ba_pred)).epsilon(0.1));
}

TEST_CASE("empirical resolution is converged in dt")
{
    // Same Brownian paths at dt and dt/2: fine increments summed in pairs.
    const auto d = from_rates(fast_rates());
    const double h = max_step(d, SimMode::adiabatic);
    const std::vector<double> taus{5.0, 20.0, 80.0};
    const auto n = static_cast<std::size_t>(std::round(2.0 * taus.back() / h));
    std::vector<std::vector<double>> sq_fine(taus.size()), sq_coarse(taus.size());
    std::mt19937_64 phase_rng(5);
    SimConfig sim;
    for (std::uint64_t trial = 0; trial < 400; ++trial) {
        const double phase = std::uniform_real_distribution<double>(0.0, 2.0 * M_PI)(phase_rng);
        const double q0 = std::sqrt(2.0) * std::cos(phase), p0 = std::sqrt(2.0) * std::sin(phase);
        const auto fine = generate_noise(17, trial, n, h / 2.0, noise_levels(d, 1.0));
        const auto coarse = pair_sum(fine);
        sim.dt = 0.0;
        const auto tf = integrate(sim, d, fine, q0, p0);
        const auto tc = integrate(sim, d, coarse, q0, p0);
        for (std::size_t k = 0; k < taus.size(); ++k) {
            const auto ef = estimate_N(tf, fine, taus[k], d);
            const auto ec = estimate_N(tc, coarse, taus[k], d);
            sq_fine[k].push_back(std::pow(ef.N_est - ef.N_true, 2));
            sq_coarse[k].push_back(std::pow(ec.N_est - ec.N_true, 2));
        }
    }
    for (std::size_t k = 0; k < taus.size(); ++k) {
        const double mf = std::accumulate(sq_fine[k].begin(), sq_fine[k].end(), 0.0) / 400.0;
        const double mc = std::accumulate(sq_coarse[k].begin(), sq_coarse[k].end(), 0.0) / 400.0;
        CAPTURE(taus[k]);
        CHECK(std::abs(mf - mc) < jackknife_stderr(sq_coarse[k]));
    }

    sim = SimConfig{};
    sim.n_true = 0.0;
    sim.seed = 17;
    sim.tau_grid = taus;
    // Twice the trials, about 1/sqrt(2) of the error bar.
    sim.dt = 0.0;
    sim.n_trials = 1600;
    const auto big = monte_carlo_resolution(sim, d);
    sim.n_trials = 800;
    const auto small = monte_carlo_resolution(sim, d);
    CHECK(big.rows[1].stderr_ / small.rows[1].stderr_ == Approx(1.0 / std::sqrt(2.0)).epsilon(0.1));
}

TEST_CASE("step and configuration errors")
{
    const auto d = from_rates(fast_rates());
    SimConfig sim;
    sim.tau_grid = {1.0};
    sim.dt = 2.0 * max_step(d, SimMode::adiabatic);
    CHECK_THROWS_AS(monte_carlo_resolution(sim, d), StepTooLarge);
    sim.mode = SimMode::full;
    sim.dt = 1.01 * max_step(d, SimMode::full);
    CHECK_THROWS_AS(monte_carlo_resolution(sim, d), StepTooLarge);
    sim.dt = 0.0;
    sim.n_trials = 1;
    CHECK_THROWS_AS(monte_carlo_resolution(sim, d), ConfigError);
    sim.n_trials = 4;
    sim.tau_grid = {};
    CHECK_THROWS_AS(monte_carlo_resolution(sim, d), ConfigError);
    sim.tau_grid = {-1.0};
    CHECK_THROWS_AS(monte_carlo_resolution(sim, d), ConfigError);
    CHECK_THROWS_AS(sim_mode_from_string("exact"), ConfigError);

    auto r = fast_rates();
    r.c_bar = 100.0;
    const auto unstable = from_rates(r, true);
    sim.tau_grid = {1.0};
    CHECK_THROWS_AS(monte_carlo_resolution(sim, unstable), UnstableSpring);
}

TEST_CASE("jackknife of a mean is the classical standard error")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    std::vector<double> v(500);
    for (auto& x : v)
        x = g(rng);
    CHECK(jackknife_stderr(v) == Approx(std::sqrt(variance(v) / v.size())).epsilon(1e-10));
    CHECK(std::isnan(jackknife_stderr({1.0})));
}

TEST_CASE("full and adiabatic Monte Carlo agree" * doctest::test_suite("slow"))
{
    RateParams r;
    r.omega_m = 1.0;
    r.omega_s = 20.0;
    r.gamma_c = 0.2;
    r.gamma_d = 0.2;
    r.G_0 = 0.1;
    r.c_bar = 10.0;
    const auto d = from_rates(r);
    SimConfig sim;
    sim.n_true = 0.0;
    sim.vacuum_noise_scale = 2.0;
    sim.n_trials = 300;
    sim.seed = 8;
    sim.tau_grid = {300.0, 1000.0};
    for (const auto mode : {SimMode::adiabatic, SimMode::full}) {
        sim.mode = mode;
        const auto res = monte_carlo_resolution(sim, d);
        for (const auto& row : res.rows) {
            CAPTURE(to_string(mode));
            CAPTURE(row.tau);
            CHECK(std::abs(row.dn2_emp - row.dn2_pred) < 3.0 * row.stderr_ + 0.05 * row.dn2_pred);
        }
    }
}
