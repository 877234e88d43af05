#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "jumpldp/expr.hpp"

namespace jumpldp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Counts = std::vector<std::int64_t>;

struct MassAction {
    double k = 0.0;
};

struct ExpressionLaw {
    std::string formula;
    ExprPtr ast;
};

using RateLaw = std::variant<MassAction, ExpressionLaw>;

struct Reaction {
    std::vector<int> gamma_in;
    std::vector<int> gamma_out;
    std::vector<int> gamma;  // gamma_out - gamma_in
    RateLaw rate;
    bool placeholder = false;  // explicit zero jump (uniformizing reaction)
};

class ReactionNetwork {
public:
    ReactionNetwork(std::string name, std::vector<std::string> species,
                    std::vector<Reaction> reactions);

    const std::string& name() const { return name_; }
    const std::vector<std::string>& species() const { return species_; }
    const std::vector<Reaction>& reactions() const { return reactions_; }
    int dim() const { return static_cast<int>(species_.size()); }
    int num_reactions() const { return static_cast<int>(reactions_.size()); }
    // d x R matrix with columns gamma^r.
    const Mat& gamma_matrix() const { return gamma_; }
    Vec gamma(int r) const { return gamma_.col(r); }
    bool has_expression_laws() const;

private:
    std::string name_;
    std::vector<std::string> species_;
    std::vector<Reaction> reactions_;
    Mat gamma_;
};

struct ScaledState {
    std::int64_t v = 1;
    Counts counts;
    Vec x() const;
};

// Rounds v*x to the nearest lattice point.
ScaledState to_lattice(const Vec& x, std::int64_t v);

ReactionNetwork parse_model(const std::string& text);
ReactionNetwork load_model_file(const std::string& path);
// JSON document accepted by parse_model; expression formulas are printed in
// fully parenthesized form.
std::string print_model(const ReactionNetwork& net);

// lambda_r(x). Mass action: k prod x_i^{gamma_in_i} with 0^0 = 1.
double macro_rate(const ReactionNetwork& net, int r, const Vec& x);
Vec macro_rates(const ReactionNetwork& net, const Vec& x);
// log lambda_r(x), -inf where the rate vanishes; finite even where lambda_r
// underflows in double precision.
double log_macro_rate(const ReactionNetwork& net, int r, const Vec& x);
Vec log_macro_rates(const ReactionNetwork& net, const Vec& x);

// Lambda^v_r at lattice state s. Mass action uses exact falling factorials;
// expression laws use lambda_r(n / v).
double micro_rate(const ReactionNetwork& net, int r, const ScaledState& s);
double micro_rate(const ReactionNetwork& net, int r, const std::int64_t* counts, std::int64_t v);
// log of micro_rate, evaluated in the log domain for expression laws.
double log_micro_rate(const ReactionNetwork& net, int r, const std::int64_t* counts, std::int64_t v);

// Gradient of lambda_r (analytic for mass action, central differences otherwise).
Vec macro_rate_gradient(const ReactionNetwork& net, int r, const Vec& x);

Vec drift(const ReactionNetwork& net, const Vec& x);

class MacroPath;

// Classical RK4 with `steps` fixed steps; NumericError when |x| exceeds blowup.
MacroPath fluid_limit(const ReactionNetwork& net, const Vec& x0, double T, int steps,
                      double blowup = 1e12);

struct ConvergenceAudit {
    std::vector<std::int64_t> v;
    std::vector<double> sup_error;
    bool monotone_decrease = false;
};

// sup over grid of sum_r |Lambda^v_r - lambda_r|, each grid point rounded to
// the v-lattice.
ConvergenceAudit audit_rate_convergence(const ReactionNetwork& net,
                                        const std::vector<std::int64_t>& v_ladder,
                                        const std::vector<Vec>& grid);

// min over grid and reactions with Lambda^v_r > 0 of Lambda^v_r / lambda_r.
double audit_aleph(const ReactionNetwork& net, std::int64_t v, const std::vector<Vec>& grid);

}  // namespace jumpldp
