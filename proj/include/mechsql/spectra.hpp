#pragma once

#include <complex>

#include "mechsql/params.hpp"
#include "mechsql/table.hpp"

namespace mechsql {

/// Radiation-pressure force F_rp = G_0 c_bar (d + d^dagger) in the frequency
/// domain (Fourier convention x(t) = int x(omega) e^{-i omega t}):
///
///   F(omega) = coeff_v1 v1(omega) + coeff_v2 v2(omega) + coeff_q q(omega)
///
/// with v1, v2 the idle-mode input quadratures. The mechanics feel -F_rp, so a
/// negative `coeff_q` at omega = 0 is a negative rigidity.
struct RpForceResponse {
    double omega = 0.0;
    std::complex<double> coeff_v1;
    std::complex<double> coeff_v2;
    std::complex<double> coeff_q;
};

RpForceResponse rp_transfer(double omega, const DerivedQuantities& d);

enum class SpectrumKind {
    symmetrized,      // (S(omega) + S(-omega)) / 2, classical-equivalent
    non_symmetrized,  // int dt e^{i omega t} <F(t) F(0)>
};

/// Spectral density of the back-action force. Vacuum quadratures are white
/// with density 1/2, so the symmetrized spectrum is (|coeff_v1|^2 +
/// |coeff_v2|^2) / 2.
double backaction_spectrum(double omega, const DerivedQuantities& d,
                           SpectrumKind kind = SpectrumKind::symmetrized);

/// int S(omega) d omega / 2 pi of the symmetrized spectrum by double-
/// exponential quadrature over the real line.
double backaction_force_variance(const DerivedQuantities& d);

/// -Re coeff_q(0): the optical rigidity felt by the mechanics.
double spring_coefficient(const DerivedQuantities& d);

enum class GridScale { linear, log };

struct SpectrumGrid {
    double omega_min = 0.0;
    double omega_max = 0.0;
    int points = 0;
    GridScale scale = GridScale::log;
};

/// Columns: omega, then (re, im, abs2) for v1, v2 and q, then S_sym and
/// S_nonsym of the back-action force.
Table spectra_table(const DerivedQuantities& d, const SpectrumGrid& grid);

} // namespace mechsql
