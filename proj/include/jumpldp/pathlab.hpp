#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "jumpldp/cover.hpp"
#include "jumpldp/network.hpp"
#include "jumpldp/path.hpp"
#include "jumpldp/quadrature.hpp"
#include "jumpldp/ratefn.hpp"

namespace jumpldp {

// omega_z(h) = sup_{|s - t| <= h} |z(s) - z(t)|, exact for piecewise-linear z.
double modulus(const MacroPath& z, double h);
// sup{h in [0, T - t0] : omega_z(h) <= delta}.
double modulus_inverse(const MacroPath& z, double delta);

struct ModulusTable {
    std::vector<double> h;
    std::vector<double> omega;
};
ModulusTable modulus_of_continuity(const MacroPath& z, int resolution);

struct Segmentation {
    std::vector<double> tau;   // tau_0 = t0 < ... < tau_J = T
    std::vector<int> regions;  // i_0 .. i_{J-1}
};
// Greedy: from each transition time, the region containing the path longest
// (lowest id on ties).
Segmentation segment_path(const MacroPath& z, const Cover& cover);

struct ShiftPlan {
    double delta = 0.0;
    double xi = 0.0;
    double beta = 0.0;
    double t_delta = 0.0;
    double kappa_minus = 0.0;
    std::vector<double> transition_times;
    std::vector<int> region_ids;
    std::vector<double> cumulative;  // Delta_0 .. Delta_J
    double delta_prime = 0.0;
    double delta_dblprime = 0.0;
    int J = 0;
    bool truncated = false;  // horizon extended past T and cut back
};

struct ShiftedPath {
    ShiftPlan plan;
    MacroPath path;
};

ShiftPlan make_shift_plan(const MacroPath& z, const Cover& cover, double delta);
// Throws NumericError naming the first breakpoint outside every region.
ShiftedPath build_shifted_path(const MacroPath& z, const Cover& cover, double delta);

struct BreakupReport {
    double sup_distance = 0.0;
    bool sup_ok = false;
    double min_clearance = 0.0;
    double required_clearance = 0.0;
    bool clearance_ok = false;
    double first_violation_time = -1.0;
    std::vector<double> decomposition_margin;  // per shift k >= 1: kappa'' minus worst |w - w_ik|
    bool decomposition_ok = false;
    bool arithmetic_ok = false;
    bool all_ok() const { return sup_ok && clearance_ok && decomposition_ok && arithmetic_ok; }
    nlohmann::json to_json() const;
};
BreakupReport verify_breakup(const MacroPath& z, const ShiftedPath& s, const Cover& cover);

// Action of the segment t -> x0 + t w on [0, t_delta].
ActionReport escape_cost(const ReactionNetwork& net, const Vec& x0, const Vec& w, double t_delta,
                         const QuadOptions& q = {});

// Infimum/supremum of log lambda_r over sampled points, doubling the sample
// count until the value is stable within 1%.
struct SampledExtremum {
    double value = 0.0;
    int samples = 0;
};

struct DecayReport {
    int reaction = 0;
    std::vector<double> rho;
    std::vector<double> inf_log;  // inf over the shell {dist in [rho, 2 rho)}
    std::vector<int> samples;
    double exponent = 0.0;        // fitted minimal alpha
    std::vector<double> alphas;
    std::vector<bool> holds;      // decay condition per alpha
    std::vector<std::vector<double>> scaled;  // rho^alpha inf log, per alpha then rung
    bool minus_infinity = false;  // rate vanishes on a whole shell
    nlohmann::json to_json() const;
};
DecayReport decay_exponent(const ReactionNetwork& net, int r, const CoverRegion& region,
                           const std::vector<double>& rho_ladder, const std::vector<double>& alphas);

struct FastEntry {
    int reaction = 0;
    std::vector<double> values;  // rho * sup_{dist < rho} log lambda_r
    double limit = 0.0;
    bool fast = false;
    bool vanishes = false;       // lambda_r == 0 near the boundary
};
struct FastReport {
    std::vector<double> rho;
    std::vector<FastEntry> entries;
    std::vector<int> fast_set() const;
    nlohmann::json to_json() const;
};
FastReport fast_set(const ReactionNetwork& net, const CoverRegion& region, const std::vector<double>& rho_ladder);

struct ConeReport {
    bool obstructed = true;
    std::vector<int> active_facets;
    std::vector<bool> facet_obstructed;
    Vec witness;  // mu over the slow reactions when not obstructed
    std::vector<int> slow;
    nlohmann::json to_json() const;
};
// Is there a nonnegative combination of slow jumps pointing into (or along)
// every active boundary facet at x?
ConeReport cone_obstruction(const ReactionNetwork& net, const CoverRegion& region, const Vec& x,
                            const std::vector<int>& fast);

struct EscapeAudit {
    std::vector<std::int64_t> v;
    std::vector<double> b_values;  // max_k (1/v)|log Lambda^v_{r_k}| along the prefix states
    double b_slope = 0.0;
    bool b_pass = false;
    std::vector<double> rho;
    std::vector<double> c_values;  // sup_x int_0^rho |log lambda_r(x + s w)| ds
    bool c_pass = false;
    int d_checked = 0;
    int d_violations = 0;
    bool d_pass = false;
    nlohmann::json to_json() const;
};
using LatticeStart = std::function<Counts(std::int64_t)>;
EscapeAudit escape_sequence_audit(const ReactionNetwork& net, const Cover& cover, int region,
                                  const LatticeStart& x0_v, const std::vector<std::int64_t>& v_ladder,
                                  const std::vector<double>& rho_ladder);

struct Lemma32Terms {
    double t_delta = 0.0;
    double lambda_bar = 0.0;
    double entropy_term = 0.0;
    double log_integral = 0.0;
    double aleph_term = 0.0;
    double value = 0.0;
    double t_bar = 0.0;
};
// Right-hand side of the escape-event lower bound at macroscopic start x0.
Lemma32Terms lemma32_bound(const ReactionNetwork& net, const Cover& cover, int region, const Vec& x0,
                           double t_delta, double aleph, const QuadOptions& q = {});

}  // namespace jumpldp
