#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "mechsql/error.hpp"
#include "mechsql/reducer.hpp"
#include "mechsql/resolution.hpp"
#include "support.hpp"

using namespace mechsql;
using doctest::Approx;

namespace {

// Random 4-mode system with well separated external modes.
ParametricSystem random_system(std::mt19937_64& rng, int n_mech = 2)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> Omega;
    for (int nu = 0; nu < n_mech; ++nu)
        Omega.push_back(0.01 * (1.0 + nu + 0.5 * u(rng)));
    std::vector<double> omega{0.0, 1.0, 2.5, 4.5};
    for (auto& w : omega)
        w += 0.2 * u(rng);
    std::shuffle(omega.begin(), omega.end(), rng);
    ParametricSystem s(Omega, omega);
    for (int i = 0; i < 4; ++i) {
        for (int j = i; j < 4; ++j) {
            for (int nu = 0; nu < n_mech; ++nu)
                s.set_coupling(i, j, nu, 0.05 * u(rng));
        }
    }
    s.drive_amplitude = 10.0;
    return s;
}

double max_error(const ParametricSystem& s, const DispersiveReduction& red, const std::vector<double>& q)
{
    const auto exact = brute_force_eigen(s, q);
    double worst = 0.0;
    for (int i = 0; i < s.n_ext(); ++i)
        worst = std::max(worst, std::abs(red.omega_prime[i].evaluate(q) - exact[i]));
    return worst;
}

ParametricSystem scaled(ParametricSystem s, double factor)
{
    for (auto& c : s.chi)
        c *= factor;
    return s;
}

} // namespace

TEST_CASE("dispersive checks")
{
    ParametricSystem zero({0.5}, {10.0, 20.0, 35.0});
    CHECK(validate_dispersive(zero).pass());

    ParametricSystem deg({1.0}, {10.0, 10.0});
    const auto report = validate_dispersive(deg);
    CHECK_FALSE(report.pass());
    CHECK(std::isinf(report.checks[0].ratio));
    CHECK_THROWS_AS(reduce(deg), DegenerateModes);

    // Cross-module consistency with the rate-level regime check.
    const auto rates = testing::toy_rates();
    const auto sys = coupled_cavity_system(rates);
    const auto d = validate_dispersive(sys);
    CHECK(d.checks[0].ratio == Approx(rates.G_0 / (2.0 * rates.omega_s)).epsilon(1e-14));
    const auto core = validate_regime(from_rates(rates));
    const auto it = std::find_if(core.checks.begin(), core.checks.end(),
                                 [&](const RegimeCheck& c) { return c.ratio == Approx(d.checks[0].ratio); });
    CHECK(it != core.checks.end());
}

TEST_CASE("coupled-cavity instance shifts the two modes oppositely")
{
    const auto rates = testing::toy_rates();
    const auto red = reduce(coupled_cavity_system(rates));
    const double shift = rates.G_0 * rates.G_0 / (2.0 * rates.omega_s);
    // Probe (driven, lower) mode softens, idle mode stiffens.
    CHECK(red.omega_prime[0].quadratic[0][0] == Approx(-shift).epsilon(1e-14));
    CHECK(red.omega_prime[1].quadratic[0][0] == Approx(shift).epsilon(1e-14));
    CHECK(red.omega_prime[0].linear[0] == 0.0);
    CHECK(red.qnd_conditions_ok);
    CHECK(red.residual_linear[0] == 0.0);
    CHECK(red.residual_linear[1] == Approx(rates.G_0 * rates.c_bar / (2.0 * rates.omega_s)).epsilon(1e-14));
}

TEST_CASE("diagonal-only coupling gives pure linear shifts")
{
    ParametricSystem s({1.0, 2.0}, {10.0, 20.0, 30.0});
    s.set_coupling(0, 0, 0, 0.3);
    s.set_coupling(1, 1, 1, -0.2);
    s.set_coupling(2, 2, 0, 0.1);
    const auto red = reduce(s);
    for (const auto& f : red.omega_prime) {
        for (const auto& row : f.quadratic) {
            for (double v : row)
                CHECK(v == 0.0);
        }
    }
    CHECK(red.omega_prime[0].linear[0] == 0.3);
    CHECK(red.omega_prime[1].linear[1] == -0.2);
    CHECK(red.omega_prime[0].evaluate({2.0, 0.0}) == Approx(10.6));
    CHECK_FALSE(red.qnd_conditions_ok);
}

TEST_CASE("brute-force eigenvalues")
{
    ParametricSystem s({1.0}, {3.0, -2.0, 7.0});
    const auto bare = brute_force_eigen(s, {0.4});
    CHECK(bare == std::vector<double>{3.0, -2.0, 7.0});

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int k = 0; k < 100; ++k) {
        const double w1 = u(rng), w2 = w1 + 0.5 + std::abs(u(rng));
        ParametricSystem t({1.0}, {w1, w2});
        const double chi = 0.3 * u(rng), q = u(rng);
        t.set_coupling(0, 1, 0, chi);
        const double mid = 0.5 * (w1 + w2);
        const double rad = std::sqrt(0.25 * (w1 - w2) * (w1 - w2) + chi * chi * q * q);
        const auto e = brute_force_eigen(t, {q});
        REQUIRE(e[0] == Approx(mid - rad).epsilon(1e-12));
        REQUIRE(e[1] == Approx(mid + rad).epsilon(1e-12));
    }
    CHECK_THROWS_AS(brute_force_eigen(s, {0.1, 0.2}), ConfigError);
}

TEST_CASE("quadratic fit of exact eigenvalues matches the reduction")
{
    std::mt19937_64 rng(4);
    for (int k = 0; k < 10; ++k) {
        const auto s = random_system(rng, 1);
        const auto red = reduce(s);
        // Central differences of the exact branch on a small q grid.
        const double dq = 1e-3;
        const auto plus = brute_force_eigen(s, {dq});
        const auto minus = brute_force_eigen(s, {-dq});
        const auto zero = brute_force_eigen(s, {0.0});
        for (int i = 0; i < 4; ++i) {
            const double lin = (plus[i] - minus[i]) / (2.0 * dq);
            const double quad = (plus[i] - 2.0 * zero[i] + minus[i]) / (2.0 * dq * dq);
            CHECK(lin == Approx(red.omega_prime[i].linear[0]).epsilon(1e-6));
            // Fourth-order terms stay below 1e-3 of the coefficient.
            CHECK(quad == Approx(red.omega_prime[i].quadratic[0][0]).epsilon(1e-3));
        }
    }
}

TEST_CASE("perturbative error is third order")
{
    std::mt19937_64 rng(8);
    for (int k = 0; k < 20; ++k) {
        const auto s = random_system(rng);
        const std::vector<double> q{1.0, -0.7};
        const double e0 = max_error(s, reduce(s), q);
        const auto half = scaled(s, 0.5);
        const double e1 = max_error(half, reduce(half), q);
        const auto quarter = scaled(s, 0.25);
        const double e2 = max_error(quarter, reduce(quarter), q);
        CAPTURE(k);
        CHECK(e0 / e1 == Approx(8.0).epsilon(0.2));
        CHECK(std::log2(e0 / e2) / 2.0 == Approx(3.0).epsilon(0.1));
    }
}

TEST_CASE("tripartite mapping reproduces the direct path")
{
    std::mt19937_64 rng(12);
    for (int k = 0; k < 50; ++k) {
        auto rates = testing::random_rates(rng);
        rates.driven_mode = k % 2 ? DrivenMode::common : DrivenMode::differential;
        const auto t = to_tripartite(coupled_cavity_system(rates));
        REQUIRE(t.rates.has_value());
        CHECK(t.warnings.empty());
        CHECK(t.driven_mode == rates.driven_mode);
        CHECK(t.quadratic_full == Approx(t.quadratic_tripartite).epsilon(1e-15));
        const auto direct = from_rates(rates);
        const auto mapped = from_rates(*t.rates);
        CHECK(sql_ratio(mapped).ratio == Approx(sql_ratio(direct).ratio).epsilon(1e-12));
        CHECK(mapped.omega_eff == Approx(direct.omega_eff).epsilon(1e-12));
    }
}

TEST_CASE("nearest idle mode selection")
{
    // Equidistant idle modes: lower index wins, with a warning.
    ParametricSystem tie({1.0}, {0.0, -2.0, 2.0});
    tie.set_coupling(0, 1, 0, 0.01);
    tie.set_coupling(0, 2, 0, 0.02);
    const auto t = to_tripartite(tie);
    CHECK(t.idle == 1);
    CHECK(t.warnings.size() == 1);
    CHECK(t.driven_mode == DrivenMode::differential);

    // A far mode still shifts the probe but is left out of the tripartite model.
    ParametricSystem far({1.0}, {0.0, 2.0, 40.0});
    far.set_coupling(0, 1, 0, 0.02);
    far.set_coupling(0, 2, 0, 0.1);
    const auto f = to_tripartite(far);
    CHECK(f.idle == 1);
    CHECK(f.omega_s == Approx(1.0));
    CHECK(f.quadratic_tripartite == Approx(-0.02 * 0.02 / 2.0));
    CHECK(f.quadratic_full == Approx(-0.02 * 0.02 / 2.0 - 0.1 * 0.1 / 40.0));
    CHECK_FALSE(f.rates.has_value());
}

TEST_CASE("QND violations are reported")
{
    ParametricSystem s({1.0, 3.0}, {0.0, 2.0});
    s.set_coupling(0, 1, 0, 0.02);
    s.set_coupling(0, 0, 0, 0.001);
    CHECK_THROWS_AS(to_tripartite(s), QndViolated);
    s.set_coupling(0, 0, 0, 0.0);
    CHECK_NOTHROW(to_tripartite(s));
    s.set_coupling(0, 1, 1, 0.005);
    const auto red = reduce(s);
    CHECK_FALSE(red.qnd_conditions_ok);
    CHECK(red.qnd_violations.size() == 1);
    CHECK_THROWS_AS(to_tripartite(s), QndViolated);
}

TEST_CASE("property: relabelling external modes permutes the reduction")
{
    std::mt19937_64 rng(30);
    for (int k = 0; k < 30; ++k) {
        const auto s = random_system(rng);
        std::vector<int> perm{0, 1, 2, 3};
        std::shuffle(perm.begin(), perm.end(), rng);
        // Mode i of s becomes mode perm[i] of t.
        std::vector<double> omega(4);
        for (int i = 0; i < 4; ++i)
            omega[perm[i]] = s.omega[i];
        ParametricSystem t(s.Omega, omega);
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                for (int nu = 0; nu < s.n_mech(); ++nu)
                    t.set_coupling(perm[i], perm[j], nu, s.coupling(i, j, nu));
            }
        }
        t.drive_index = perm[s.drive_index];
        t.drive_amplitude = s.drive_amplitude;
        const auto a = reduce(s);
        const auto b = reduce(t);
        const auto ea = brute_force_eigen(s, {0.3, 0.2});
        const auto eb = brute_force_eigen(t, {0.3, 0.2});
        for (int i = 0; i < 4; ++i) {
            REQUIRE(b.omega_prime[perm[i]].quadratic[0][1] == Approx(a.omega_prime[i].quadratic[0][1]).epsilon(1e-12));
            REQUIRE(b.residual_linear[perm[i]] == Approx(a.residual_linear[i]).epsilon(1e-12));
            REQUIRE(eb[perm[i]] == Approx(ea[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("system file parsing")
{
    const std::string text = "# two cavities\n"
                             "Omega = 1.0\n"
                             "omega = -50 50   # rotating frame\n"
                             "decay = 0.1 0.1\n"
                             "drive = 0 20\n"
                             "chi 0 1 0 = 0.05\n"
                             "chi 1 0 0 = 0.05\n";
    const auto s = parse_system(text);
    CHECK(s.n_mech() == 1);
    CHECK(s.n_ext() == 2);
    CHECK(s.coupling(1, 0, 0) == 0.05);
    CHECK(s.drive_amplitude == 20.0);
    const auto t = to_tripartite(s);
    REQUIRE(t.rates.has_value());
    CHECK(sql_ratio(from_rates(*t.rates)).ratio
          == Approx(sql_ratio(from_rates(testing::toy_rates())).ratio).epsilon(1e-12));

    auto line_of = [](const std::string& bad) {
        try {
            (void)parse_system(bad);
        } catch (const ConfigError& e) {
            return e.line();
        }
        return -1;
    };
    CHECK(line_of("Omega = 1\nomega = 0 2\nchi 0 1 = 0.1\n") == 3);
    CHECK(line_of("Omega = 1\nomega = 0 two\n") == 2);
    CHECK(line_of("Omega = 1\nomega = 0 2\nchi 0 1 0 = 0.1\nchi 1 0 0 = 0.2\ndrive = 0 1\n") == 4);
    CHECK(line_of("Omega = 1\nOmega = 2\n") == 2);
    CHECK(line_of("Omega = 1\nomega = 0 2\nwibble = 3\n") == 3);
    CHECK(line_of("Omega = 1\nomega = 0 2\nchi 0 5 0 = 0.1\ndrive = 0 1\n") == 3);
    CHECK_THROWS_AS(parse_system("omega = 0 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_system("Omega = 1\nomega = 3 3\ndrive = 0 1\n"), DegenerateModes);
    CHECK_THROWS_AS(load_system_file("/nonexistent.sys"), ConfigError);
}

TEST_CASE("reduction table")
{
    const auto sys = coupled_cavity_system(testing::toy_rates());
    const auto t = reduction_table(sys, reduce(sys));
    CHECK(t.rows.size() == 2);
    CHECK(t.columns.front() == "mode");
    CHECK(std::get<bool>(t.rows[0].back()));
    CHECK_FALSE(std::get<bool>(t.rows[1].back()));
}
