#pragma once

#include <string>
#include <vector>

#include "jumpldp/network.hpp"
#include "jumpldp/path.hpp"
#include "jumpldp/quadrature.hpp"

namespace jumpldp {

// H(mu | lam) = sum_r lam_r - mu_r + mu_r log(mu_r / lam_r), with 0 log 0 = 0
// and +inf when mu_r > 0 = lam_r.
double entropy(const Vec& mu, const Vec& lam);

// theta . y - sum_r exp(loglam_r) (exp(theta . gamma_r) - 1) and its gradient.
double theta_objective(const Mat& G, const Vec& loglam, const Vec& y, const Vec& theta);
Vec theta_gradient(const Mat& G, const Vec& loglam, const Vec& y, const Vec& theta);

struct FeasibilityResult {
    bool feasible = false;
    Vec mu;           // feasible nonnegative flux over all reactions
    Vec certificate;  // theta with theta . gamma_r <= 0 (active r) and theta . y > 0
};

// {mu >= 0, mu_r = 0 where loglam_r = -inf, G mu = y}.
FeasibilityResult flux_feasibility(const Mat& G, const Vec& loglam, const Vec& y);
FeasibilityResult feasibility(const ReactionNetwork& net, const Vec& x, const Vec& y);

struct LagrangianResult {
    double value = 0.0;
    Vec theta_star;
    Vec mu_star;
    bool feasible = false;
    int newton_iters = 0;
};

// l(x, y) from log-rates; the maximizer is sought over span{gamma_r}
// restricted to the reactions that can carry positive flux.
LagrangianResult lagrangian_core(const Mat& G, const Vec& loglam, const Vec& y, double tol = 1e-10);
LagrangianResult lagrangian(const ReactionNetwork& net, const Vec& x, const Vec& y,
                            double tol = 1e-10);

struct ActionReport {
    double value = 0.0;
    std::vector<double> per_segment;
    std::vector<std::string> flags;
    bool has_flag(const std::string& f) const;
};

// Integral of l(z(t), z'(t)) over [a, b] (defaults to the whole path).
ActionReport path_action(const ReactionNetwork& net, const MacroPath& z, const QuadOptions& q = {});
ActionReport path_action_window(const ReactionNetwork& net, const MacroPath& z, double a, double b,
                                const QuadOptions& q = {});

// Integral of H(w'(t) | lambda(z(t))); +inf when z' != G w' or w decreases.
ActionReport flux_action(const ReactionNetwork& net, const MacroPath& z, const MacroPath& w,
                         const QuadOptions& q = {});

// Flux path w(t) = int_0^t mu*(s) ds as a piecewise-linear path with `pieces`
// pieces per segment of z; each piece carries the average optimal flux.
MacroPath induced_flux(const ReactionNetwork& net, const MacroPath& z, int pieces, int quad_pts = 8);

// Brute-force minimum of H(mu | lam) over {mu >= 0, G mu = y} by nested grid
// zooming on a null-space parametrization. Needs at most 3 reactions.
double grid_entropy_min(const Mat& G, const Vec& lam, const Vec& y, int grid_n);

struct DualityReport {
    double lagrangian = 0.0;
    double grid_min = 0.0;
    double gap = 0.0;
};
DualityReport duality_check(const ReactionNetwork& net, const Vec& x, const Vec& y, int grid_n);

// kappa Phi(y(T)) - kappa Phi(y(t_eps)) - sum_r int lambda_r(y) exp(kappa gamma_r . grad Phi) dt
// over [t_eps, T], Phi(y) = log(n . (y - x0)), t_eps the first time n.(y - x0) reaches eps.
double potential_lower_bound(const ReactionNetwork& net, const MacroPath& y, const Vec& x0,
                             const Vec& n, double kappa, double eps);

}  // namespace jumpldp
