#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <random>

namespace mechsql {

/// Purpose tags so that different uses of one trial never share draws.
enum class Substream : std::uint64_t { noise = 0, initial_state = 1, shot = 2 };

/// Deterministic random source for one (seed, trial, substream) triple.
class TrialRng {
public:
    TrialRng(std::uint64_t seed, std::uint64_t trial, Substream stream);

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }

private:
    std::mt19937_64 engine_;
    boost::random::normal_distribution<double> normal_;
    boost::random::uniform_01<double> uniform_;
};

/// Spectral densities of the white inputs. Vacuum quadratures have density
/// 1/2 (times the vacuum noise scale); the thermal force 2 gamma_m n_th.
struct NoiseLevels {
    double vacuum_density = 0.5;
    double thermal_density = 0.0;
};

/// Per-step increments (integrals over dt) of the white inputs:
/// u1, u2 drive the pumped mode, v1, v2 the idle mode, xi the mechanics.
struct NoiseStreams {
    double dt = 0.0;
    std::vector<double> u1, u2, v1, v2, xi;

    std::size_t size() const { return u1.size(); }
};

/// Draw order per step is u1, u2, v1, v2, xi from the `noise` substream, so
/// the streams depend only on (seed, trial).
NoiseStreams generate_noise(std::uint64_t seed, std::uint64_t trial, std::size_t n_steps, double dt,
                            const NoiseLevels& levels = {});

} // namespace mechsql
