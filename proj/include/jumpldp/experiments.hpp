#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "jumpldp/cover.hpp"
#include "jumpldp/exactdist.hpp"
#include "jumpldp/format.hpp"
#include "jumpldp/network.hpp"
#include "jumpldp/path.hpp"
#include "jumpldp/pathlab.hpp"

namespace jumpldp {

struct BuiltinModel {
    std::string id;
    std::string description;
    std::string model_json;
    std::string cover_json;
    Vec x0;                                  // macroscopic start
    std::function<Counts(std::int64_t)> x0_v;  // lattice start at scale v
    Vec path_lo, path_hi;                    // box for random test paths
};

const std::vector<BuiltinModel>& builtin_models();
const BuiltinModel& builtin(const std::string& id);
ReactionNetwork builtin_network(const std::string& id);
Cover builtin_cover(const std::string& id);

// Random piecewise-linear path from the builtin's x0 (or a random start when
// x0 lies outside the cover) through `segments` random points of the path
// box; ex2_3 paths stay on the conservation line.
MacroPath random_cover_path(const std::string& id, std::mt19937_64& rng, int segments, double T);

struct StudyResult {
    std::string study;
    nlohmann::json params = nlohmann::json::object();
    CsvTable rows;
    nlohmann::json fits = nlohmann::json::object();
    std::vector<std::string> flags;
    int pass = -1;  // -1: no expectation, 0: fail, 1: pass

    nlohmann::json to_json() const;
    nlohmann::json meta() const;
};

enum class StudyMode { Exact, MonteCarlo };

struct MarginalOptions {
    StudyMode mode = StudyMode::Exact;
    double cap_factor = 20.0;  // state cap = cap_factor * v
    double tol = 1e-60;
    std::int64_t trials = 10000;
    std::uint64_t seed = 1;
    int jobs = 0;
    bool has_expected = false;
    double expected = 0.0;
    double expected_tol = 3e-3;
};

// Rows v, prob, upper, log_rate; Richardson limit in 1/v from the last two
// rungs and a least-squares fit a = L + b / v.
StudyResult ldp_marginal_study(const ReactionNetwork& net, const std::function<Counts(std::int64_t)>& x0_v,
                               const StatePredicate& event, double t, const std::vector<std::int64_t>& v_ladder,
                               const MarginalOptions& opt);

struct MinimizeResult {
    MacroPath path;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<std::string> flags;
};

// L-BFGS over the interior nodes of a uniform piecewise-linear path with
// both endpoints pinned.
MinimizeResult minimize_endpoint_action(const ReactionNetwork& net, const Vec& x0, const Vec& target, double T,
                                        int grid_n, int max_iter = 3000);

// Rows eps, t_eps, value: action of z on [t_eps, T], t_eps the first time
// |z(t) - z(0)| reaches eps. Divergent when the slope of value against
// log(1/eps) is at least 0.5 k.
StudyResult divergence_probe(const ReactionNetwork& net, const MacroPath& z, const std::vector<double>& eps_ladder,
                             double k_model = 1.0);

struct EscapeEventOptions {
    std::int64_t trials = 20000;
    std::uint64_t seed = 1;
    int jobs = 0;
    double aleph = 1.0;
};

// Probability that the first jumps repeat the escape sequence, fewer than
// n_+ n_j of them happen by t_delta = delta, and X(t_delta) is within
// delta''/2 of x0 + t_delta w. Exact (stage chain) and Monte Carlo columns.
StudyResult escape_event_study(const ReactionNetwork& net, const Cover& cover, int region,
                               const std::function<Counts(std::int64_t)>& x0_v, const Vec& x0,
                               const std::vector<std::int64_t>& v_ladder, double delta, const EscapeEventOptions& opt);

}  // namespace jumpldp
