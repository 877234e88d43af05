#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "jumpldp/format.hpp"
#include "jumpldp/network.hpp"

namespace jumpldp {

struct Transition {
    std::int64_t target;  // index into states, or -1 for the sink
    double rate;          // v * Lambda^v_r
};

// Reachable lattice states with an absorbing sink that collects every
// transition leaving the truncation.
struct TruncatedChain {
    std::int64_t v = 1;
    int dim = 0;
    std::vector<Counts> states;
    std::vector<std::vector<Transition>> out;
    double q = 0.0;  // max total outflow
    bool truncated = false;
};

TruncatedChain build_chain(const ReactionNetwork& net, std::int64_t v, const Counts& x0,
                           std::int64_t state_cap);

struct Distribution {
    std::vector<double> prob;  // over chain.states
    double sink = 0.0;
    std::int64_t terms = 0;    // Poisson terms used
};

// Uniformization started from states[0]; stops once the Poisson tail is below tol.
Distribution transient_distribution(const TruncatedChain& chain, double t, double tol = 1e-12);

struct EventProbability {
    double value = 0.0;  // sink-exclusive
    double upper = 0.0;  // value + sink mass
    double sink = 0.0;
};

using StatePredicate = std::function<bool(const Vec&)>;
EventProbability event_probability(const TruncatedChain& chain, double t, const StatePredicate& pred,
                                   double tol = 1e-12);
EventProbability event_probability(const TruncatedChain& chain, const Distribution& dist,
                                   const StatePredicate& pred);

// (1 - e^{-t})^{k-1}.
double yule_tail(double t, std::int64_t k);

// Columns state_index,x_1..x_d,prob.
CsvTable distribution_table(const TruncatedChain& chain, const Distribution& dist);

}  // namespace jumpldp
