#include "jumpldp/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jumpldp/errors.hpp"
#include "jumpldp/quadrature.hpp"
#include "jumpldp/ratefn.hpp"
#include "jumpldp/simulator.hpp"

namespace jumpldp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec vec(std::initializer_list<double> v) {
    Vec out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

std::function<Counts(std::int64_t)> counts_rule(std::vector<std::int64_t> per_v, std::vector<double> per_unit) {
    return [per_v, per_unit](std::int64_t v) {
        Counts c(per_v.size());
        for (size_t i = 0; i < c.size(); ++i)
            c[i] = per_v[i] + static_cast<std::int64_t>(std::llround(per_unit[i] * static_cast<double>(v)));
        return c;
    };
}

const char* kCover1d = R"J({"eps": 0.05, "eps_prime": 0.1, "eps_dblprime": 0.5, "kappa_dblprime": 0.15,
 "regions": [
  {"halfspaces": [{"a": [-1], "b": 0}, {"a": [1], "b": 0.25}], "boundary": [0], "w": [1], "kappa": 0.5, "escape": [0]},
  {"halfspaces": [{"a": [-1], "b": -0.2}, {"a": [1], "b": 2}]}
 ]})J";

std::vector<BuiltinModel> make_builtins() {
    std::vector<BuiltinModel> m;
    m.push_back({"ex1_1", "autocatalysis A -> 2A with lambda(x) = x",
                 R"J({"name": "ex1_1", "species": ["A"],
  "reactions": [{"in": {"A": 1}, "out": {"A": 2}, "rate": {"type": "mass_action", "k": 1}}]})J",
                 kCover1d, vec({0.0}), counts_rule({1}, {0.0}), vec({0.0}), vec({1.9})});
    m.push_back({"ex2_1_dimer", "dimerization 2A <-> B (mass action)",
                 R"J({"name": "ex2_1_dimer", "species": ["A", "B"],
  "reactions": [{"in": {"A": 2}, "out": {"B": 1}, "rate": {"type": "mass_action", "k": 1}},
                {"in": {"B": 1}, "out": {"A": 2}, "rate": {"type": "mass_action", "k": 1}}]})J",
                 R"J({"eps": 0.05, "eps_prime": 0.1, "eps_dblprime": 0.5, "kappa_dblprime": 0.15,
 "regions": [
  {"halfspaces": [{"a": [-1, 0], "b": -0.1}, {"a": [1, 0], "b": 2}, {"a": [0, -1], "b": 0}, {"a": [0, 1], "b": 2}]}
 ]})J",
                 vec({1.0, 0.0}), counts_rule({0, 0}, {1.0, 0.0}), vec({0.1, 0.0}), vec({1.9, 1.9})});
    m.push_back({"ex2_2", "B <-> 2B, A <-> 2A + B (mass action)",
                 R"J({"name": "ex2_2", "species": ["A", "B"],
  "reactions": [{"in": {"B": 1}, "out": {"B": 2}, "rate": {"type": "mass_action", "k": 1}},
                {"in": {"B": 2}, "out": {"B": 1}, "rate": {"type": "mass_action", "k": 1}},
                {"in": {"A": 1}, "out": {"A": 2, "B": 1}, "rate": {"type": "mass_action", "k": 1}},
                {"in": {"A": 2, "B": 1}, "out": {"A": 1}, "rate": {"type": "mass_action", "k": 1}}]})J",
                 R"J({"eps": 0.05, "eps_prime": 0.1, "eps_dblprime": 0.5, "kappa_dblprime": 0.15,
 "regions": [
  {"halfspaces": [{"a": [-1, 0], "b": -0.1}, {"a": [1, 0], "b": 2}, {"a": [0, -1], "b": 0}, {"a": [0, 1], "b": 0.3}],
   "boundary": [2], "w": [0.7071067811865476, 0.7071067811865476], "kappa": 0.5, "escape": [2]},
  {"halfspaces": [{"a": [-1, 0], "b": -0.1}, {"a": [1, 0], "b": 2}, {"a": [0, -1], "b": -0.2}, {"a": [0, 1], "b": 2}]}
 ]})J",
                 vec({0.0, 0.0}), counts_rule({1, 0}, {0.0, 0.0}), vec({0.1, 0.0}), vec({1.9, 1.9})});
    m.push_back({"ex2_3", "isomerization A <-> B (mass action)",
                 R"J({"name": "ex2_3", "species": ["A", "B"],
  "reactions": [{"in": {"A": 1}, "out": {"B": 1}, "rate": {"type": "mass_action", "k": 1}},
                {"in": {"B": 1}, "out": {"A": 1}, "rate": {"type": "mass_action", "k": 1}}]})J",
                 R"J({"eps": 0.05, "eps_prime": 0.1, "eps_dblprime": 0.5, "kappa_dblprime": 0.15,
 "regions": [
  {"halfspaces": [{"a": [-1, 0], "b": 0}, {"a": [1, 0], "b": 0.3}, {"a": [0, -1], "b": 0}, {"a": [0, 1], "b": 1.2}],
   "boundary": [0], "w": [0.7071067811865476, -0.7071067811865476], "kappa": 0.5, "escape": [1]},
  {"halfspaces": [{"a": [-1, 0], "b": -0.2}, {"a": [1, 0], "b": 0.8}, {"a": [0, -1], "b": -0.2}, {"a": [0, 1], "b": 0.8}]},
  {"halfspaces": [{"a": [0, -1], "b": 0}, {"a": [0, 1], "b": 0.3}, {"a": [-1, 0], "b": 0}, {"a": [1, 0], "b": 1.2}],
   "boundary": [0], "w": [-0.7071067811865476, 0.7071067811865476], "kappa": 0.5, "escape": [0]}
 ]})J",
                 vec({1.0, 0.0}), counts_rule({0, 0}, {1.0, 0.0}), vec({0.0, 0.0}), vec({1.0, 1.0})});
    m.push_back({"ex2_4", "single jump +1 with rate exp(-1/x)",
                 R"J({"name": "ex2_4", "species": ["A"],
  "reactions": [{"in": {}, "out": {"A": 1}, "rate": {"type": "expr", "formula": "exp(-1/x[A])"}}]})J",
                 kCover1d, vec({0.0}), counts_rule({1}, {0.0}), vec({0.0}), vec({1.9})});
    m.push_back({"ex5_2", "indicator rate step(x1 - 1)(x1 - 1) for (0,1), unit rate for (1,0)",
                 R"J({"name": "ex5_2", "species": ["X1", "X2"],
  "reactions": [{"in": {}, "out": {"X2": 1}, "rate": {"type": "expr", "formula": "step(x[X1]-1)*(x[X1]-1)"}},
                {"in": {}, "out": {"X1": 1}, "rate": {"type": "mass_action", "k": 1}}]})J",
                 R"J({"eps": 0.05, "eps_prime": 0.1, "eps_dblprime": 0.5, "kappa_dblprime": 0.15,
 "regions": [
  {"halfspaces": [{"a": [-1, 0], "b": 0}, {"a": [1, 0], "b": 1}, {"a": [0, -1], "b": 0}, {"a": [0, 1], "b": 0.3}],
   "boundary": [2], "w": [0, 1], "kappa": 0.5, "escape": [0]},
  {"halfspaces": [{"a": [-1, 0], "b": 0}, {"a": [1, 0], "b": 2}, {"a": [0, -1], "b": -0.2}, {"a": [0, 1], "b": 2}]},
  {"halfspaces": [{"a": [-1, 0], "b": -0.9}, {"a": [1, 0], "b": 2}, {"a": [0, -1], "b": 0}, {"a": [0, 1], "b": 0.3}],
   "boundary": [2], "w": [0, 1], "kappa": 0.5, "escape": [0]}
 ]})J",
                 vec({0.0, 0.0}), counts_rule({0, 0}, {0.0, 0.0}), vec({0.0, 0.0}), vec({1.9, 1.9})});
    m.push_back({"ex5_3", "x1 exp(-1/x2) for (-1,1), unit rate for (1,1)",
                 R"J({"name": "ex5_3", "species": ["X1", "X2"],
  "reactions": [{"in": {"X1": 1}, "out": {"X2": 1}, "rate": {"type": "expr", "formula": "x[X1]*exp(-1/x[X2])"}},
                {"in": {}, "out": {"X1": 1, "X2": 1}, "rate": {"type": "mass_action", "k": 1}}]})J",
                 R"J({"eps": 0.05, "eps_prime": 0.1, "eps_dblprime": 0.5, "kappa_dblprime": 0.15,
 "regions": [
  {"halfspaces": [{"a": [-1, 0], "b": 0}, {"a": [1, 0], "b": 2}, {"a": [0, -1], "b": 0}, {"a": [0, 1], "b": 0.3}],
   "boundary": [2], "w": [0.7071067811865476, 0.7071067811865476], "kappa": 0.5, "escape": [1]},
  {"halfspaces": [{"a": [-1, 0], "b": 0}, {"a": [1, 0], "b": 2}, {"a": [0, -1], "b": -0.2}, {"a": [0, 1], "b": 2}]}
 ]})J",
                 vec({0.0, 0.0}), counts_rule({0, 0}, {0.0, 0.0}), vec({0.0, 0.0}), vec({1.9, 1.9})});
    return m;
}

}  // namespace

const std::vector<BuiltinModel>& builtin_models() {
    static const std::vector<BuiltinModel> models = make_builtins();
    return models;
}

const BuiltinModel& builtin(const std::string& id) {
    for (const auto& m : builtin_models())
        if (m.id == id) return m;
    throw ValidationError("unknown builtin model '" + id + "'");
}

ReactionNetwork builtin_network(const std::string& id) { return parse_model(builtin(id).model_json); }

Cover builtin_cover(const std::string& id) {
    auto net = builtin_network(id);
    return parse_cover(builtin(id).cover_json, &net);
}

MacroPath random_cover_path(const std::string& id, std::mt19937_64& rng, int segments, double T) {
    const auto& m = builtin(id);
    Cover cover = builtin_cover(id);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const Eigen::Index d = m.x0.size();
    auto draw = [&]() {
        Vec p(d);
        if (id == "ex2_3") {
            double a = m.path_lo[0] + (m.path_hi[0] - m.path_lo[0]) * U(rng);
            p << a, 1.0 - a;
            return p;
        }
        for (Eigen::Index i = 0; i < d; ++i) p[i] = m.path_lo[i] + (m.path_hi[i] - m.path_lo[i]) * U(rng);
        return p;
    };
    bool start_ok = false;
    for (const auto& r : cover.regions) start_ok = start_ok || r.contains(m.x0, 1e-12);
    std::vector<double> t{0.0};
    for (int k = 1; k < segments; ++k) t.push_back(T * U(rng));
    std::sort(t.begin() + 1, t.end());
    t.push_back(T);
    std::vector<Vec> z{start_ok ? m.x0 : draw()};
    for (int k = 0; k < segments; ++k) z.push_back(draw());
    return MacroPath(std::move(t), std::move(z));
}

nlohmann::json StudyResult::meta() const {
    nlohmann::json j;
    j["study"] = study;
    j["params"] = params;
    j["fits"] = fits;
    j["flags"] = flags;
    j["pass"] = pass < 0 ? nlohmann::json(nullptr) : nlohmann::json(pass == 1);
    return j;
}

nlohmann::json StudyResult::to_json() const { return csv_as_json(rows, meta()); }

namespace {

void add_flag(std::vector<std::string>& flags, const std::string& f) {
    if (std::find(flags.begin(), flags.end(), f) == flags.end()) flags.push_back(f);
}

// (1/v)-extrapolations: two-rung Richardson and least squares a = L + b / v.
void fit_inverse_v(StudyResult& s, const std::vector<std::int64_t>& v, const std::vector<double>& a) {
    std::vector<double> x, y;
    for (size_t i = 0; i < v.size(); ++i)
        if (std::isfinite(a[i])) {
            x.push_back(1.0 / static_cast<double>(v[i]));
            y.push_back(a[i]);
        }
    if (x.size() < 2) {
        add_flag(s.flags, "too_few_finite_rungs");
        return;
    }
    size_t n = x.size();
    double x1 = x[n - 2], x2 = x[n - 1];
    double rich = (y[n - 1] * x1 - y[n - 2] * x2) / (x1 - x2);
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i] / n;
        my += y[i] / n;
    }
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    double b = sxx > 0 ? sxy / sxx : 0.0;
    s.fits["richardson_limit"] = rich;
    s.fits["ls_limit"] = my - b * mx;
    s.fits["ls_slope"] = b;
}

}  // namespace

StudyResult ldp_marginal_study(const ReactionNetwork& net, const std::function<Counts(std::int64_t)>& x0_v,
                               const StatePredicate& event, double t, const std::vector<std::int64_t>& v_ladder,
                               const MarginalOptions& opt) {
    if (v_ladder.empty()) throw ValidationError("v ladder is empty");
    if (!(t > 0)) throw ValidationError("t must be positive");
    StudyResult s;
    s.study = "marginal";
    s.params = {{"model", net.name()}, {"t", t}, {"v", v_ladder},
                {"mode", opt.mode == StudyMode::Exact ? "exact" : "mc"}};
    if (opt.mode == StudyMode::Exact) {
        s.params["cap_factor"] = opt.cap_factor;
        s.params["tol"] = opt.tol;
        s.rows.header = {"v", "prob", "upper", "sink", "log_rate"};
    } else {
        s.params["trials"] = opt.trials;
        s.params["seed"] = opt.seed;
        s.rows.header = {"v", "hits", "trials", "prob", "lo", "hi", "log_rate"};
    }
    std::vector<double> rates;
    for (auto v : v_ladder) {
        Counts x0 = x0_v(v);
        double p;
        if (opt.mode == StudyMode::Exact) {
            auto cap = static_cast<std::int64_t>(std::ceil(opt.cap_factor * static_cast<double>(v)));
            auto chain = build_chain(net, v, x0, std::max<std::int64_t>(cap, 1));
            auto ev = event_probability(chain, t, event, opt.tol);
            p = ev.value;
            double lr = p > 0 ? std::log(p) / static_cast<double>(v) : -kInf;
            s.rows.rows.push_back({static_cast<double>(v), p, ev.upper, ev.sink, lr});
            rates.push_back(lr);
        } else {
            std::vector<char> hit(static_cast<size_t>(opt.trials), 0);
            parallel_for(static_cast<int>(opt.trials), opt.jobs, [&](int i) {
                Counts last = x0;
                ssa_run(net, v, x0, t, trial_seed(opt.seed + static_cast<std::uint64_t>(v), static_cast<std::uint64_t>(i)),
                        [&](double, int, const Counts& n) {
                            last = n;
                            return true;
                        });
                Vec x(net.dim());
                for (int k = 0; k < net.dim(); ++k) x[k] = static_cast<double>(last[static_cast<size_t>(k)]) / static_cast<double>(v);
                hit[static_cast<size_t>(i)] = event(x);
            });
            std::int64_t hits = 0;
            for (char h : hit) hits += h;
            p = static_cast<double>(hits) / static_cast<double>(opt.trials);
            auto [lo, hi] = wilson_interval(hits, opt.trials);
            double lr = hits > 0 ? std::log(p) / static_cast<double>(v) : -kInf;
            if (hits == 0) add_flag(s.flags, "zero_hits");
            s.rows.rows.push_back({static_cast<double>(v), static_cast<double>(hits), static_cast<double>(opt.trials), p,
                                   lo, hi, lr});
            rates.push_back(lr);
        }
        if (!(p > 0)) add_flag(s.flags, "zero_probability");
    }
    fit_inverse_v(s, v_ladder, rates);
    if (opt.has_expected) {
        s.fits["expected"] = opt.expected;
        s.pass = s.fits.contains("richardson_limit") &&
                         std::abs(s.fits["richardson_limit"].get<double>() - opt.expected) <= opt.expected_tol
                     ? 1
                     : 0;
    }
    return s;
}

namespace {

// Gradient of log lambda_r: analytic for mass action, central differences
// of the log-rate for expressions.
Vec log_rate_gradient(const ReactionNetwork& net, int r, const Vec& x) {
    const auto& rx = net.reactions()[static_cast<size_t>(r)];
    Vec g = Vec::Zero(net.dim());
    if (std::holds_alternative<MassAction>(rx.rate)) {
        for (int i = 0; i < net.dim(); ++i)
            if (rx.gamma_in[static_cast<size_t>(i)] > 0) g[i] = rx.gamma_in[static_cast<size_t>(i)] / x[i];
        return g;
    }
    for (int i = 0; i < net.dim(); ++i) {
        double h = 1e-6 * std::max(std::abs(x[i]), 1e-8);
        Vec a = x, b = x;
        a[i] += h;
        b[i] -= h;
        double la = log_macro_rate(net, r, a), lb = log_macro_rate(net, r, b);
        if (std::isinf(la) || std::isinf(lb)) {
            g[i] = 0.0;
            continue;
        }
        g[i] = (la - lb) / (2 * h);
    }
    return g;
}

struct Objective {
    const ReactionNetwork& net;
    Vec x0, target;
    int n = 0;
    double h = 0.0;
    const GaussRule& rule = gauss_legendre(16);

    Vec node(const Vec& vars, int i) const {
        const int d = static_cast<int>(x0.size());
        if (i == 0) return x0;
        if (i == n) return target;
        return vars.segment((i - 1) * d, d);
    }

    // Composite Gauss rule on every segment; +inf when any node is infeasible.
    double eval(const Vec& vars, Vec* grad) const {
        const int d = static_cast<int>(x0.size());
        double f = 0.0;
        if (grad) *grad = Vec::Zero(vars.size());
        for (int i = 0; i < n; ++i) {
            Vec za = node(vars, i), zb = node(vars, i + 1);
            Vec dz = zb - za, y = dz / h;
            for (size_t q = 0; q < rule.nodes.size(); ++q) {
                double u = 0.5 * (rule.nodes[q] + 1.0), wq = 0.5 * rule.weights[q];
                Vec x = za + u * dz;
                LagrangianResult lr;
                try {
                    lr = lagrangian(net, x, y);
                } catch (const NumericError&) {
                    return kInf;
                }
                if (!lr.feasible || !std::isfinite(lr.value)) return kInf;
                f += h * wq * lr.value;
                if (!grad) continue;
                Vec dx = Vec::Zero(d);
                Vec ll = log_macro_rates(net, x);
                for (int r = 0; r < net.num_reactions(); ++r) {
                    if (std::isinf(ll[r])) continue;
                    double lam = std::exp(ll[r]);
                    double coef = lr.mu_star[r] - lam;
                    if (coef == 0.0) continue;
                    dx -= coef * log_rate_gradient(net, r, x);
                }
                if (i > 0) grad->segment((i - 1) * d, d) += wq * (h * (1 - u) * dx - lr.theta_star);
                if (i + 1 < n) grad->segment(i * d, d) += wq * (h * u * dx + lr.theta_star);
            }
        }
        return f;
    }
};

}  // namespace

MinimizeResult minimize_endpoint_action(const ReactionNetwork& net, const Vec& x0, const Vec& target, double T,
                                        int grid_n, int max_iter) {
    if (grid_n < 8) throw ValidationError("grid_n must be at least 8");
    if (!(T > 0)) throw ValidationError("T must be positive");
    if (x0.size() != net.dim() || target.size() != net.dim()) throw ValidationError("endpoint dimension mismatch");
    const int d = net.dim();
    Objective obj{net, x0, target, grid_n, T / grid_n};
    // The action is finite only on x0 + span(Gamma); move nodes inside it.
    Eigen::JacobiSVD<Mat> svd(net.gamma_matrix(), Eigen::ComputeThinU);
    const Eigen::Index rank = (svd.singularValues().array() > 1e-12 * svd.singularValues()(0)).count();
    const Mat U = svd.matrixU().leftCols(rank);
    const Mat P = U * U.transpose();
    auto eval = [&](const Vec& x, Vec* grad) {
        double val = obj.eval(x, grad);
        for (int i = 0; i + 1 < grid_n; ++i) grad->segment(i * d, d) = P * grad->segment(i * d, d);
        return val;
    };
    Vec vars((grid_n - 1) * d);
    for (int i = 1; i < grid_n; ++i) vars.segment((i - 1) * d, d) = x0 + (static_cast<double>(i) / grid_n) * (target - x0);
    Vec g;
    double f = eval(vars, &g);
    if (!std::isfinite(f)) throw NumericError("initial straight path has infinite action");

    const int mem = 10;
    std::vector<Vec> S, Y;
    MinimizeResult res;
    int stall = 0;
    for (int it = 0; it < max_iter; ++it) {
        res.iterations = it + 1;
        if (g.lpNorm<Eigen::Infinity>() <= 1e-11 * (1 + std::abs(f))) {
            res.converged = true;
            break;
        }
        // Two-loop recursion.
        Vec q = g;
        std::vector<double> alpha(S.size());
        for (int k = static_cast<int>(S.size()) - 1; k >= 0; --k) {
            alpha[static_cast<size_t>(k)] = S[static_cast<size_t>(k)].dot(q) / Y[static_cast<size_t>(k)].dot(S[static_cast<size_t>(k)]);
            q -= alpha[static_cast<size_t>(k)] * Y[static_cast<size_t>(k)];
        }
        if (!S.empty()) q *= S.back().dot(Y.back()) / Y.back().dot(Y.back());
        for (size_t k = 0; k < S.size(); ++k) {
            double b = Y[k].dot(q) / Y[k].dot(S[k]);
            q += (alpha[k] - b) * S[k];
        }
        Vec p = -q;
        double slope = g.dot(p);
        if (!(slope < 0)) {
            S.clear();
            Y.clear();
            p = -g;
            slope = -g.dot(g);
        }
        if (S.empty()) {
            double scale = 0.1 / std::max(1e-300, p.lpNorm<Eigen::Infinity>());
            if (scale < 1) {
                p *= scale;
                slope *= scale;
            }
        }
        double step = 1.0, fn = kInf;
        Vec xn, gn;
        bool ok = false;
        for (int ls = 0; ls < 60; ++ls) {
            xn = vars + step * p;
            fn = eval(xn, &gn);
            if (std::isfinite(fn) && fn <= f + 1e-4 * step * slope) {
                ok = true;
                break;
            }
            step *= 0.5;
        }
        if (!ok) {
            if (S.empty()) {
                res.converged = g.lpNorm<Eigen::Infinity>() <= 1e-6 * (1 + std::abs(f));
                break;
            }
            S.clear();
            Y.clear();
            continue;
        }
        Vec s = xn - vars, y = gn - g;
        if (s.dot(y) > 1e-300) {
            S.push_back(s);
            Y.push_back(y);
            if (static_cast<int>(S.size()) > mem) {
                S.erase(S.begin());
                Y.erase(Y.begin());
            }
        }
        stall = (f - fn <= 1e-15 * (1 + std::abs(f))) ? stall + 1 : 0;
        vars = xn;
        f = fn;
        g = gn;
        if (stall >= 10) {
            res.converged = true;
            break;
        }
    }
    std::vector<double> t;
    std::vector<Vec> z;
    for (int i = 0; i <= grid_n; ++i) {
        t.push_back(i == grid_n ? T : obj.h * i);
        z.push_back(obj.node(vars, i));
    }
    res.path = MacroPath(std::move(t), std::move(z));
    auto rep = path_action(net, res.path);
    res.value = rep.value;
    res.flags = rep.flags;
    if (!res.converged) res.flags.push_back("iteration_cap");
    return res;
}

namespace {

// First time |z(t) - z(0)| >= eps, +inf if never.
double first_exit(const MacroPath& z, double eps) {
    const Vec& z0 = z.point(0);
    for (size_t i = 0; i + 1 < z.size(); ++i) {
        Vec a = z.point(i) - z0, b = z.point(i + 1) - z0;
        if (b.norm() < eps) continue;
        if (a.norm() >= eps) return z.time(i);
        // Solve |a + s (b - a)| = eps for the smallest s in [0, 1].
        Vec dlt = b - a;
        double A = dlt.squaredNorm(), B = 2 * a.dot(dlt), C = a.squaredNorm() - eps * eps;
        double s = (-B + std::sqrt(std::max(0.0, B * B - 4 * A * C))) / (2 * A);
        s = std::clamp(s, 0.0, 1.0);
        return z.time(i) + s * (z.time(i + 1) - z.time(i));
    }
    return kInf;
}

}  // namespace

StudyResult divergence_probe(const ReactionNetwork& net, const MacroPath& z, const std::vector<double>& eps_ladder,
                             double k_model) {
    if (eps_ladder.size() < 2) throw ValidationError("eps ladder needs at least two rungs");
    StudyResult s;
    s.study = "diverge";
    s.params = {{"model", net.name()}, {"eps", eps_ladder}, {"k", k_model}};
    s.rows.header = {"eps", "t_eps", "value"};
    std::vector<double> lx, ly;
    double vmin = kInf, vmax = -kInf;
    for (double eps : eps_ladder) {
        if (!(eps > 0)) throw ValidationError("eps must be positive");
        double te = first_exit(z, eps);
        double value = 0.0;
        if (te < z.T()) {
            // Dyadic sub-windows resolve the growth near t_eps.
            double a = te;
            while (a < z.T()) {
                double b = a > 0 ? std::min(2 * a, z.T()) : z.T();
                auto rep = path_action_window(net, z, a, b);
                value += rep.value;
                for (const auto& f : rep.flags) add_flag(s.flags, f);
                a = b;
            }
        } else {
            add_flag(s.flags, "empty_window");
        }
        s.rows.rows.push_back({eps, std::isinf(te) ? z.T() : te, value});
        if (std::isfinite(value)) {
            lx.push_back(std::log(1.0 / eps));
            ly.push_back(value);
            vmin = std::min(vmin, value);
            vmax = std::max(vmax, value);
        }
    }
    double slope = 0.0;
    if (lx.size() >= 2) {
        double mx = 0, my = 0;
        for (size_t i = 0; i < lx.size(); ++i) {
            mx += lx[i] / lx.size();
            my += ly[i] / ly.size();
        }
        double sxy = 0, sxx = 0;
        for (size_t i = 0; i < lx.size(); ++i) {
            sxy += (lx[i] - mx) * (ly[i] - my);
            sxx += (lx[i] - mx) * (lx[i] - mx);
        }
        slope = sxx > 0 ? sxy / sxx : 0.0;
    }
    s.fits["slope"] = slope;
    s.fits["spread"] = lx.empty() ? 0.0 : vmax - vmin;
    s.fits["verdict"] = slope >= 0.5 * k_model ? "divergent" : "convergent";
    return s;
}

StudyResult escape_event_study(const ReactionNetwork& net, const Cover& cover, int region,
                               const std::function<Counts(std::int64_t)>& x0_v, const Vec& x0,
                               const std::vector<std::int64_t>& v_ladder, double delta, const EscapeEventOptions& opt) {
    if (region < 0 || region >= static_cast<int>(cover.regions.size())) throw ValidationError("region index out of range");
    const auto& reg = cover.regions[static_cast<size_t>(region)];
    if (reg.escape.empty()) throw ValidationError("region has no escape sequence");
    if (!(delta > 0)) throw ValidationError("delta must be positive");
    const double td = delta;
    const double radius = 0.5 * td * cover.kappa_dblprime;
    const Vec centre = x0 + td * reg.w;
    const int nj = static_cast<int>(reg.escape.size());
    const int d = net.dim();

    StudyResult s;
    s.study = "escape-event";
    s.params = {{"model", net.name()}, {"region", region}, {"delta", delta}, {"t_delta", td},
                {"v", v_ladder}, {"trials", opt.trials}, {"seed", opt.seed}, {"aleph", opt.aleph}};
    s.rows.header = {"v", "n_plus", "exact_prob", "exact_log_rate", "mc_hits", "mc_trials", "mc_log_rate", "bound"};

    double bound = -kInf;
    try {
        bound = lemma32_bound(net, cover, region, x0, td, opt.aleph).value;
    } catch (const ValidationError&) {
        add_flag(s.flags, "bound_precondition_violated");
    }
    s.fits["bound"] = bound;

    bool all_ok = true;
    for (auto v : v_ladder) {
        const std::int64_t n_plus = static_cast<std::int64_t>(std::floor(static_cast<double>(v) * td / reg.alpha));
        const std::int64_t K = n_plus * nj;
        Counts start = x0_v(v);
        auto in_ball = [&](const Counts& n) {
            Vec x(d);
            for (int i = 0; i < d; ++i) x[i] = static_cast<double>(n[static_cast<size_t>(i)]) / static_cast<double>(v);
            return (x - centre).norm() <= radius;
        };
        // Stage chain: stage k advances with the k-th escape jump; any other
        // state-changing jump leaves to the sink.
        TruncatedChain chain;
        chain.v = v;
        chain.dim = d;
        Counts n = start;
        for (std::int64_t k = 0; k <= K; ++k) {
            chain.states.push_back(n);
            std::vector<Transition> tr;
            double total = 0.0;
            if (k < K) {
                int want = reg.escape[static_cast<size_t>(k % nj)];
                for (int r = 0; r < net.num_reactions(); ++r) {
                    if (net.gamma(r).norm() == 0) continue;
                    double rate = micro_rate(net, r, n.data(), v) * static_cast<double>(v);
                    if (rate <= 0) continue;
                    tr.push_back({r == want ? k + 1 : -1, rate});
                    total += rate;
                }
                const auto& g = net.reactions()[static_cast<size_t>(want)].gamma;
                for (int i = 0; i < d; ++i) n[static_cast<size_t>(i)] += g[static_cast<size_t>(i)];
            }
            chain.q = std::max(chain.q, total);
            chain.out.push_back(std::move(tr));
        }
        auto dist = transient_distribution(chain, td, 1e-300);
        double exact = 0.0;
        for (std::int64_t k = 0; k < K; ++k)
            if (in_ball(chain.states[static_cast<size_t>(k)])) exact += dist.prob[static_cast<size_t>(k)];
        double exact_lr = exact > 0 ? std::log(exact) / static_cast<double>(v) : -kInf;

        std::vector<char> hit(static_cast<size_t>(opt.trials), 0);
        parallel_for(static_cast<int>(opt.trials), opt.jobs, [&](int i) {
            std::int64_t k = 0;
            bool ok = true;
            Counts last = start;
            ssa_run(net, v, start, td, trial_seed(opt.seed + static_cast<std::uint64_t>(v), static_cast<std::uint64_t>(i)),
                    [&](double, int r, const Counts& now) {
                        last = now;
                        if (net.gamma(r).norm() == 0) return true;
                        if (k >= K || r != reg.escape[static_cast<size_t>(k % nj)]) {
                            ok = false;
                            return false;
                        }
                        ++k;
                        return true;
                    });
            hit[static_cast<size_t>(i)] = ok && k < K && in_ball(last);
        });
        std::int64_t hits = 0;
        for (char h : hit) hits += h;
        double mc_lr = hits > 0 ? std::log(static_cast<double>(hits) / static_cast<double>(opt.trials)) / static_cast<double>(v)
                                : -kInf;
        if (hits == 0) add_flag(s.flags, "zero_hits");
        if (exact_lr < bound) all_ok = false;
        s.rows.rows.push_back({static_cast<double>(v), static_cast<double>(n_plus), exact, exact_lr,
                               static_cast<double>(hits), static_cast<double>(opt.trials), mc_lr, bound});
    }
    s.pass = all_ok ? 1 : 0;
    return s;
}

}  // namespace jumpldp
