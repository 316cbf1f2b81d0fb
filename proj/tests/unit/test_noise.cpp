#include <cmath>
#include <numeric>

#include <doctest.h>

#include "mechsql/error.hpp"
#include "mechsql/noise.hpp"

using namespace mechsql;
using doctest::Approx;

namespace {

double mean_product(const std::vector<double>& a, const std::vector<double>& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s / static_cast<double>(a.size());
}

} // namespace

TEST_CASE("noise streams are determined by seed and trial")
{
    const auto a = generate_noise(42, 3, 1000, 0.01, {0.5, 0.2});
    const auto b = generate_noise(42, 3, 1000, 0.01, {0.5, 0.2});
    CHECK(a.u1 == b.u1);
    CHECK(a.u2 == b.u2);
    CHECK(a.v1 == b.v1);
    CHECK(a.v2 == b.v2);
    CHECK(a.xi == b.xi);
    CHECK(generate_noise(42, 4, 1000, 0.01, {}).u1 != a.u1);
    CHECK(generate_noise(43, 3, 1000, 0.01, {}).u1 != a.u1);
    // Seeds differing only in the high word are distinct streams.
    CHECK(generate_noise(42 + (1ULL << 32), 3, 10, 0.01, {}).u1 != generate_noise(42, 3, 10, 0.01, {}).u1);
}

TEST_CASE("increment variances and independence")
{
    const std::size_t n = 1000000;
    const double dt = 0.02;
    const auto s = generate_noise(7, 0, n, dt, {0.5, 0.3});
    CHECK(mean_product(s.u2, s.u2) == Approx(dt / 2.0).epsilon(0.01));
    CHECK(mean_product(s.v1, s.v1) == Approx(dt / 2.0).epsilon(0.01));
    CHECK(mean_product(s.xi, s.xi) == Approx(0.3 * dt).epsilon(0.01));

    // Cross-correlation within 3 sigma of zero: sigma = (dt/2) / sqrt(n).
    const double sigma = dt / 2.0 / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(mean_product(s.u2, s.v1)) < 3.0 * sigma);
    CHECK(std::abs(mean_product(s.u1, s.u2)) < 3.0 * sigma);
    const double mean = std::accumulate(s.u2.begin(), s.u2.end(), 0.0) / static_cast<double>(n);
    CHECK(std::abs(mean) < 3.0 * std::sqrt(dt / 2.0 / static_cast<double>(n)));
}

TEST_CASE("substreams are independent")
{
    TrialRng a(1, 0, Substream::noise);
    TrialRng b(1, 0, Substream::initial_state);
    TrialRng c(1, 0, Substream::shot);
    double ab = 0.0, ac = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = a.normal(), y = b.normal(), z = c.normal();
        ab += x * y;
        ac += x * z;
    }
    CHECK(std::abs(ab / n) < 3.0 / std::sqrt(n));
    CHECK(std::abs(ac / n) < 3.0 / std::sqrt(n));
}

TEST_CASE("bad stream requests")
{
    CHECK_THROWS_AS(generate_noise(1, 0, 0, 0.1, {}), ConfigError);
    CHECK_THROWS_AS(generate_noise(1, 0, 10, 0.0, {}), ConfigError);
}
