#pragma once

#include "qbcast/channels.hpp"
#include "qbcast/densops.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace qbcast {

// Smooth, redundancy-tolerant coordinates for a broadcast channel:
// U = exp(iH) with H read off a real (2d)^2 coordinate block (diagonal on
// the diagonal, strict-upper real/imag parts elsewhere) and the ancilla
// spectrum from a softmax over d-1 free logits. decode() of any finite
// coordinates is a valid channel; all-zero coordinates give the identity
// with a uniform ancilla.
struct ChannelParameterization {
    std::size_t dim_total = 0;            // 2d
    std::vector<double> hermitian_params; // (2d)^2 reals
    std::vector<double> simplex_params;   // d-1 reals

    std::size_t parameter_count() const {
        return hermitian_params.size() + simplex_params.size();
    }
};

BroadcastChannel decode(const ChannelParameterization& cp, std::size_t M);
ChannelParameterization encode(const BroadcastChannel& ch);

// Probe states for the constancy objective. Always contains the fixed grid
// lambda {0, 1/2, 1} x theta {0, pi/4, pi/2} x omega {0, pi/2}; the rest is
// drawn reproducibly from the seed.
struct StateSample {
    std::vector<QubitParams> states;
    std::uint64_t seed = 0;
};

StateSample make_state_sample(std::size_t count, std::uint64_t seed);
// Same grid and extras with omega pinned; used for the fixed-phase control.
StateSample make_fixed_omega_sample(double omega, std::size_t count, std::uint64_t seed);

// Worst-clone score over the sample: spread = max over clones of
// (max - min fidelity), mean = min over clones of the mean fidelity, so a
// channel cannot pass by transmitting one copy and junking the rest.
struct ConstancyScore {
    double mean = 0.0;
    double spread = 0.0;
};

ConstancyScore constancy_objective(const BroadcastChannel& ch, const StateSample& sample);

struct TradeoffPoint {
    double target_level = 0.0;
    double achieved_spread = 0.0;
    double achieved_mean = 0.0;
    std::uint64_t evaluations_used = 0;
    ChannelParameterization params;
};

struct TradeoffCurve {
    std::vector<TradeoffPoint> points;  // sorted by target_level
};

struct SearchOptions {
    std::uint64_t budget = 20000;  // objective evaluations per restart
    std::size_t restarts = 8;
    std::uint64_t seed = 42;
    double penalty_weight = 10.0;
    std::size_t threads = 1;  // 0 = hardware concurrency
    std::optional<ChannelParameterization> initial;  // restart 0 start point
};

// Minimizes spread + penalty_weight (mean - target)^2 over the channel
// coordinates with Nelder-Mead restarts. Deterministic given the seed,
// independent of the thread count; ties between restarts break toward the
// lowest restart index.
TradeoffPoint minimize_spread_at_level(std::size_t M, std::size_t d, double target_level,
                                       const StateSample& sample,
                                       const SearchOptions& opts);

TradeoffCurve tradeoff_sweep(std::size_t M, std::size_t d,
                             std::span<const double> levels, const StateSample& sample,
                             const SearchOptions& opts);

// Plain Nelder-Mead on a callable; returns the best vertex found when the
// evaluation budget runs out or the simplex collapses.
struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    std::uint64_t evaluations = 0;
};

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::span<const double> x0, double step,
                             std::uint64_t max_evals);

}  // namespace qbcast
