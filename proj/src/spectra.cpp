#include "mechsql/spectra.hpp"

#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <fmt/format.h>

#include "mechsql/constants.hpp"
#include "mechsql/error.hpp"
#include "mechsql/resolution.hpp"

namespace mechsql {

using cplx = std::complex<double>;

RpForceResponse rp_transfer(double omega, const DerivedQuantities& d)
{
    // For differential drive the idle mode sits below the pump, which flips
    // the sign of omega_s in the numerator (the denominator is even in it).
    const double ws = d.spring_sign() * d.omega_s;
    const double g = d.gamma_d;
    const cplx i{0.0, 1.0};
    const cplx den = (omega + 2.0 * ws + i * g) * (omega - 2.0 * ws + i * g);
    const double amp = 2.0 * std::sqrt(g) * d.G_0 * d.c_bar;

    RpForceResponse r;
    r.omega = omega;
    r.coeff_v1 = amp * (g - i * omega) / den;
    r.coeff_v2 = amp * (-2.0 * ws) / den;
    r.coeff_q = 4.0 * d.G_0 * d.G_0 * d.c_bar * d.c_bar * ws / den;
    return r;
}

double backaction_spectrum(double omega, const DerivedQuantities& d, SpectrumKind kind)
{
    if (kind == SpectrumKind::non_symmetrized) {
        // Vacuum: only <d d^dagger> contributes.
        return d.G_0 * d.G_0 * d.c_bar * d.c_bar * lorentzian_spectrum(omega, d);
    }
    const auto r = rp_transfer(omega, d);
    return 0.5 * (std::norm(r.coeff_v1) + std::norm(r.coeff_v2));
}

double backaction_force_variance(const DerivedQuantities& d)
{
    // Work in x = omega / |Delta| and split at the idle resonances x = +-1,
    // where tanh-sinh/exp-sinh cluster their nodes.
    const double scale = std::abs(d.idle_detuning());
    auto f = [&](double x) { return backaction_spectrum(x * scale, d) * scale; };
    boost::math::quadrature::tanh_sinh<double> finite;
    boost::math::quadrature::exp_sinh<double> tail;
    const double inner = finite.integrate(f, -1.0, 0.0) + finite.integrate(f, 0.0, 1.0);
    const double outer = tail.integrate(f, 1.0, std::numeric_limits<double>::infinity())
        + tail.integrate(f, -std::numeric_limits<double>::infinity(), -1.0);
    return (inner + outer) / two_pi;
}

double spring_coefficient(const DerivedQuantities& d) { return -rp_transfer(0.0, d).coeff_q.real(); }

Table spectra_table(const DerivedQuantities& d, const SpectrumGrid& grid)
{
    if (grid.points < 2)
        throw ConfigError("spectrum grid needs at least 2 points");
    if (!(grid.omega_max > grid.omega_min))
        throw ConfigError("spectrum grid needs omega_max > omega_min");
    if (grid.scale == GridScale::log && !(grid.omega_min > 0.0))
        throw ConfigError("log spectrum grid needs omega_min > 0");

    Table t;
    t.columns = {"omega",  "v1_re", "v1_im", "v1_abs2", "v2_re", "v2_im", "v2_abs2",
                 "q_re",   "q_im",  "q_abs2", "S_ba_sym", "S_ba_nonsym"};
    for (int k = 0; k < grid.points; ++k) {
        const double f = static_cast<double>(k) / (grid.points - 1);
        const double omega = grid.scale == GridScale::log
            ? grid.omega_min * std::pow(grid.omega_max / grid.omega_min, f)
            : grid.omega_min + (grid.omega_max - grid.omega_min) * f;
        const auto r = rp_transfer(omega, d);
        t.add_row({omega, r.coeff_v1.real(), r.coeff_v1.imag(), std::norm(r.coeff_v1), r.coeff_v2.real(),
                   r.coeff_v2.imag(), std::norm(r.coeff_v2), r.coeff_q.real(), r.coeff_q.imag(),
                   std::norm(r.coeff_q), backaction_spectrum(omega, d, SpectrumKind::symmetrized),
                   backaction_spectrum(omega, d, SpectrumKind::non_symmetrized)});
    }
    return t;
}

} // namespace mechsql
