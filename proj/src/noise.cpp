#include "mechsql/noise.hpp"

#include <cmath>

#include "mechsql/error.hpp"

namespace mechsql {

TrialRng::TrialRng(std::uint64_t seed, std::uint64_t trial, Substream stream)
{
    const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffU); };
    const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq seq{lo(seed), hi(seed), lo(trial), hi(trial), static_cast<std::uint32_t>(stream)};
    engine_.seed(seq);
}

NoiseStreams generate_noise(std::uint64_t seed, std::uint64_t trial, std::size_t n_steps, double dt,
                            const NoiseLevels& levels)
{
    if (n_steps < 1)
        throw ConfigError("generate_noise needs at least one step");
    if (!(dt > 0.0))
        throw ConfigError("generate_noise needs dt > 0");

    NoiseStreams s;
    s.dt = dt;
    for (auto* v : {&s.u1, &s.u2, &s.v1, &s.v2, &s.xi})
        v->resize(n_steps);

    const double vac = std::sqrt(levels.vacuum_density * dt);
    const double th = std::sqrt(levels.thermal_density * dt);
    TrialRng rng(seed, trial, Substream::noise);
    for (std::size_t k = 0; k < n_steps; ++k) {
        s.u1[k] = vac * rng.normal();
        s.u2[k] = vac * rng.normal();
        s.v1[k] = vac * rng.normal();
        s.v2[k] = vac * rng.normal();
        s.xi[k] = th * rng.normal();
    }
    return s;
}

} // namespace mechsql
