#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <fftw3.h>

#include "mechsql/params.hpp"

namespace testing {

/// Dimensionless toy set used throughout the tests.
inline mechsql::RateParams toy_rates()
{
    mechsql::RateParams r;
    r.omega_m = 1.0;
    r.omega_s = 50.0;
    r.gamma_c = 0.1;
    r.gamma_d = 0.1;
    r.G_0 = 0.05;
    r.c_bar = 20.0;
    return r;
}

inline mechsql::SystemConfig membrane_config(double I_0 = 2.31729918e-9)
{
    mechsql::SystemConfig c;
    c.m = 50e-15;
    c.omega_m = 2.0 * M_PI * 1e5;
    c.Q_m = 3.2e7;
    c.lambda = 532e-9;
    c.L = 0.03;
    c.set_r_m(0.9999);
    c.finesse = 6e5;
    c.T = 0.1;
    c.I_0 = I_0;
    return c;
}

/// Random rate set well inside every regime check.
inline mechsql::RateParams random_rates(std::mt19937_64& rng)
{
    auto logu = [&](double lo, double hi) {
        std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
        return std::exp(u(rng));
    };
    mechsql::RateParams r;
    r.omega_m = logu(0.1, 10.0);
    r.omega_s = r.omega_m * logu(20.0, 1e4);
    r.gamma_c = r.omega_m * logu(1e-3, 0.5);
    r.gamma_d = r.omega_m * logu(1e-3, 0.5);
    r.G_0 = r.omega_s * logu(1e-6, 1e-2);
    // Keep the spring at most 80% of the mechanical rigidity.
    const double max_photons = 0.8 * r.omega_m * r.omega_s / (r.G_0 * r.G_0);
    r.c_bar = std::sqrt(max_photons * logu(1e-4, 1.0));
    r.gamma_m = r.omega_m * logu(1e-8, 1e-4);
    r.n_th = logu(1.0, 1e4);
    return r;
}

/// Frequency (rad/s) of the strongest spectral line of `x` sampled every
/// `dt`: Hann window, real FFT, Gaussian interpolation of the peak bin.
inline double fft_peak_frequency(const std::vector<double>& x, double dt)
{
    const int n = static_cast<int>(x.size());
    std::vector<double> in(n);
    double mean = 0.0;
    for (double v : x)
        mean += v;
    mean /= n;
    for (int k = 0; k < n; ++k)
        in[k] = (x[k] - mean) * 0.5 * (1.0 - std::cos(2.0 * M_PI * k / (n - 1)));
    const int m = n / 2 + 1;
    std::vector<std::complex<double>> out(m);
    fftw_plan plan = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    int best = 1;
    for (int k = 1; k < m - 1; ++k) {
        if (std::abs(out[k]) > std::abs(out[best]))
            best = k;
    }
    const double a = std::log(std::abs(out[best - 1]));
    const double b = std::log(std::abs(out[best]));
    const double c = std::log(std::abs(out[best + 1]));
    const double shift = 0.5 * (a - c) / (a - 2.0 * b + c);
    return 2.0 * M_PI * (best + shift) / (n * dt);
}

/// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace testing
