#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "jumpldp/format.hpp"
#include "jumpldp/network.hpp"
#include "jumpldp/path.hpp"

namespace jumpldp {

// Runs f(0..n-1) on up to `jobs` threads (0 = hardware concurrency).
void parallel_for(int n, int jobs, const std::function<void(int)>& f);

// Stream seed for one trial; a fixed avalanche mix of (base, trial).
std::uint64_t trial_seed(std::uint64_t base, std::uint64_t trial);

struct JumpPath {
    std::int64_t v = 1;
    Counts x0;
    double T = 0.0;
    std::vector<double> jump_times;
    std::vector<int> jump_reactions;

    Counts counts_at(const ReactionNetwork& net, double t) const;
    Vec state_at(const ReactionNetwork& net, double t) const;
};

struct FluxPath {
    JumpPath path;
    std::vector<std::int64_t> totals;  // per-reaction jump counts up to T

    // W(t) = counts of each reaction up to t, divided by v.
    Vec flux_at(double t) const;
};

constexpr std::int64_t kDefaultJumpCap = 10000000;

// Called after each jump with (time, reaction, post-jump counts). Returning
// false stops the run early.
using JumpVisitor = std::function<bool(double, int, const Counts&)>;

// Direct-method SSA on the v-lattice, driven by an explicit 64-bit stream
// seed. Returns the number of jumps performed.
std::int64_t ssa_run(const ReactionNetwork& net, std::int64_t v, const Counts& x0, double T,
                     std::uint64_t stream_seed, const JumpVisitor& visit,
                     std::int64_t jump_cap = kDefaultJumpCap);

JumpPath ssa_simulate(const ReactionNetwork& net, std::int64_t v, const Counts& x0, double T,
                      std::uint64_t seed, std::int64_t jump_cap = kDefaultJumpCap);
FluxPath simulate_with_flux(const ReactionNetwork& net, std::int64_t v, const Counts& x0, double T,
                            std::uint64_t seed, std::int64_t jump_cap = kDefaultJumpCap);

struct ReachableSet {
    std::vector<Counts> states;  // BFS order, x0 first
    bool truncated = false;
};
ReachableSet reachable_set(const ReactionNetwork& net, std::int64_t v, const Counts& x0,
                           std::int64_t state_cap);

// Wilson score interval, z = 1.96.
std::pair<double, double> wilson_interval(std::int64_t hits, std::int64_t trials);

struct TubeEstimate {
    std::int64_t v = 1;
    std::int64_t trials = 0;
    std::int64_t hits = 0;
    double p_hat = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double log_estimate = 0.0;  // (1/v) log p_hat, valid unless zero_hits
    bool zero_hits = false;
};

// Fraction of runs with sup_t |X(t) - z(t)| <= delta (Euclidean norm) on
// [0, z.T()].
TubeEstimate tube_probability_mc(const ReactionNetwork& net, std::int64_t v, const Counts& x0,
                                 const MacroPath& z, double delta, std::int64_t trials,
                                 std::uint64_t seed, int jobs = 0);

// sup_t |X(t) - z(t)| for one run; exact for piecewise-linear z.
double sup_distance(const ReactionNetwork& net, std::int64_t v, const Counts& x0, const MacroPath& z,
                    std::uint64_t stream_seed, double stop_above = -1.0);

struct FluidGapResult {
    std::vector<double> gaps;
    double median = 0.0;
};
FluidGapResult fluid_gap(const ReactionNetwork& net, std::int64_t v, const Counts& x0, double T,
                         const std::vector<std::uint64_t>& seeds, int jobs = 0, int rk_steps = 2000);

// Columns t,reaction,x_1..x_d (and w_1..w_R for flux paths); reaction is -1
// on the t = 0 and t = T rows.
CsvTable trajectory_table(const ReactionNetwork& net, const JumpPath& p);
CsvTable flux_table(const ReactionNetwork& net, const FluxPath& p);

}  // namespace jumpldp
