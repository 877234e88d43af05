#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "jumpldp/errors.hpp"
#include "jumpldp/experiments.hpp"
#include "jumpldp/format.hpp"
#include "jumpldp/network.hpp"
#include "jumpldp/ratefn.hpp"

using namespace jumpldp;
using Catch::Approx;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
    Vec x(2);
    x << a, b;
    return x;
}

ReactionNetwork birth_death(double kb, double kd) {
    return parse_model(R"J({"name": "bd", "species": ["A"], "reactions": [
      {"in": {}, "out": {"A": 1}, "rate": {"type": "mass_action", "k": )J" + fmt_double(kb) + R"J(}},
      {"in": {"A": 1}, "out": {}, "rate": {"type": "mass_action", "k": )J" + fmt_double(kd) + R"J(}}]})J");
}

// Closed form for jumps +1 (rate a) and -1 (rate b).
double bd_oracle(double a, double b, double y) {
    double th = std::log((y + std::sqrt(y * y + 4 * a * b)) / (2 * a));
    return th * y - a * (std::exp(th) - 1) - b * (std::exp(-th) - 1);
}

}  // namespace

TEST_CASE("entropy") {
    CHECK(entropy(v2(1, 2), v2(1, 2)) == 0.0);
    CHECK(entropy(v1(2), v1(1)) == Approx(1 - 2 + 2 * std::log(2.0)));
    CHECK(entropy(v1(1), v1(0)) == kInf);
    CHECK(entropy(v1(0), v1(3)) == Approx(3.0));
}

TEST_CASE("single jump closed form") {
    auto net = builtin_network("ex1_1");
    auto r = lagrangian(net, v1(0.5), v1(1.0));
    REQUIRE(r.feasible);
    CHECK(r.value == Approx(std::log(2.0) - 1 + 0.5).epsilon(1e-12));
    CHECK(r.theta_star[0] == Approx(std::log(2.0)).epsilon(1e-10));
    CHECK(r.mu_star[0] == Approx(1.0).epsilon(1e-10));
    auto bad = lagrangian(net, v1(0.5), v1(-0.3));
    CHECK_FALSE(bad.feasible);
    CHECK(bad.value == kInf);
    CHECK(bad.mu_star.size() == 0);
}

TEST_CASE("birth-death closed form") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.1, 3.0), Y(-3.0, 3.0);
    for (int i = 0; i < 50; ++i) {
        double a = U(rng), b = U(rng), x = U(rng), y = Y(rng);
        auto net = birth_death(a, b / x);
        auto r = lagrangian(net, v1(x), v1(y));
        CHECK(r.value == Approx(bd_oracle(a, b, y)).epsilon(1e-9).margin(1e-12));
    }
}

TEST_CASE("drift point has zero cost and theta* = 0") {
    for (const char* id : {"ex1_1", "ex2_2", "ex2_3", "ex2_1_dimer"}) {
        auto net = builtin_network(id);
        Vec x = Vec::Constant(net.dim(), 0.6);
        auto r = lagrangian(net, x, drift(net, x));
        CHECK(r.value == Approx(0.0).margin(1e-12));
        CHECK(r.theta_star.norm() < 1e-8);
    }
}

TEST_CASE("feasibility on the vanishing-rate example") {
    auto net = builtin_network("ex5_3");
    auto f = feasibility(net, v2(0.5, 0.0), v2(1, 1));
    REQUIRE(f.feasible);
    CHECK(f.mu[0] == 0.0);
    CHECK(f.mu[1] == Approx(1.0));
    auto g = feasibility(net, v2(0.5, 0.0), v2(-1, 1));
    REQUIRE_FALSE(g.feasible);
    CHECK(g.certificate.dot(net.gamma(1)) <= 1e-12);
    CHECK(g.certificate.dot(v2(-1, 1)) > 0);
    auto z = feasibility(net, v2(0.5, 0.0), v2(0, 0));
    CHECK(z.feasible);
}

TEST_CASE("optimal flux satisfies the constraint and the entropy identity") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> U(0.05, 1.5);
    for (const char* id : {"ex2_2", "ex2_1_dimer", "ex5_3", "ex2_3"}) {
        auto net = builtin_network(id);
        for (int i = 0; i < 40; ++i) {
            Vec x = v2(U(rng), U(rng));
            Vec mu(net.num_reactions());
            for (int r = 0; r < mu.size(); ++r) mu[r] = U(rng);
            Vec y = net.gamma_matrix() * mu;
            auto res = lagrangian(net, x, y);
            REQUIRE(res.feasible);
            CHECK((net.gamma_matrix() * res.mu_star - y).norm() <= 1e-8 * (1 + y.norm()));
            double h = entropy(res.mu_star, macro_rates(net, x));
            CHECK(res.value == Approx(h).epsilon(1e-8).margin(1e-8));
            CHECK(res.value <= entropy(mu, macro_rates(net, x)) + 1e-9);
        }
    }
}

TEST_CASE("nonnegativity, zero only at the drift, convexity in y") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> U(0.05, 1.5), Y(-1.0, 1.0);
    auto net = builtin_network("ex2_2");
    for (int i = 0; i < 100; ++i) {
        Vec x = v2(U(rng), U(rng));
        Vec a = v2(Y(rng), Y(rng)), b = v2(Y(rng), Y(rng));
        auto la = lagrangian(net, x, a), lb = lagrangian(net, x, b), lm = lagrangian(net, x, 0.5 * (a + b));
        CHECK(la.value >= 0.0);
        if (la.value < 1e-10) CHECK((a - drift(net, x)).norm() < 1e-5);
        CHECK(lm.value <= 0.5 * (la.value + lb.value) + 1e-10);
    }
}

TEST_CASE("theta gradient matches central differences") {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> U(0.1, 3.0), T(-1.0, 1.0);
    auto net = builtin_network("ex2_2");
    for (int i = 0; i < 100; ++i) {
        Vec x = v2(U(rng), U(rng)), y = v2(T(rng), T(rng)), th = v2(T(rng), T(rng));
        Vec ll = log_macro_rates(net, x);
        Vec g = theta_gradient(net.gamma_matrix(), ll, y, th);
        for (int k = 0; k < 2; ++k) {
            Vec a = th, b = th;
            a[k] += 1e-6;
            b[k] -= 1e-6;
            double fd = (theta_objective(net.gamma_matrix(), ll, y, a) - theta_objective(net.gamma_matrix(), ll, y, b)) / 2e-6;
            CHECK(std::abs(fd - g[k]) <= 1e-5 * std::max(1.0, std::abs(g[k])));
        }
    }
}

TEST_CASE("duality check against the grid minimum") {
    auto net = builtin_network("ex1_1");
    auto d = duality_check(net, v1(0.5), v1(1.0), 10000);
    CHECK(d.gap < 1e-4);
    auto z = duality_check(net, v1(0.5), v1(0.5), 10000);
    CHECK(z.lagrangian == Approx(0.0).margin(1e-12));
    CHECK(z.grid_min == Approx(0.0).margin(1e-10));
    auto inf = duality_check(net, v1(0.5), v1(-1.0), 10000);
    CHECK(inf.lagrangian == kInf);
    CHECK(inf.grid_min == kInf);
}

TEST_CASE("path action along fluid paths and rest points") {
    auto iso = builtin_network("ex2_3");
    auto fl = fluid_limit(iso, v2(1.0, 0.0), 1.0, 400);
    CHECK(path_action(iso, fl).value < 1e-6);
    MacroPath rest({0.0, 2.0}, {v2(0.5, 0.5), v2(0.5, 0.5)});
    CHECK(path_action(iso, rest).value == Approx(0.0).margin(1e-14));
}

TEST_CASE("path action is invariant under time translation") {
    auto net = builtin_network("ex2_2");
    MacroPath z({0.0, 0.4, 1.0}, {v2(0.5, 0.5), v2(0.8, 0.3), v2(0.6, 0.9)});
    CHECK(path_action(net, z).value == path_action(net, z.shifted(3.25)).value);
}

TEST_CASE("path action of the linear escape on the autocatalytic model") {
    auto net = builtin_network("ex1_1");
    // z(t) = t on [0, 1]: int_0^1 (log(1/t) - 1 + t) dt = 1/2; the log
    // singularity at t = 0 is resolved to the dyadic depth cap.
    MacroPath z({0.0, 1.0}, {v1(0.0), v1(1.0)});
    CHECK(path_action(net, z).value == Approx(0.5).epsilon(1e-5));
}

TEST_CASE("flux action") {
    auto iso = builtin_network("ex2_3");
    auto fl = fluid_limit(iso, v2(1.0, 0.0), 1.0, 2000);
    // w' = lambda(z) along the fluid path, split symmetrically so that
    // z' = G w' holds exactly on every segment.
    std::vector<Vec> w{Vec::Zero(2)};
    for (size_t i = 1; i < fl.size(); ++i) {
        double dt = fl.time(i) - fl.time(i - 1);
        Vec mid = 0.5 * (fl.point(i - 1) + fl.point(i));
        Vec lam = macro_rates(iso, mid);
        double zb = (fl.point(i)[1] - fl.point(i - 1)[1]) / dt;
        double d = zb - (lam[0] - lam[1]);
        w.push_back(w.back() + dt * v2(lam[0] + 0.5 * d, lam[1] - 0.5 * d));
    }
    MacroPath W(fl.times(), w);
    auto rep = flux_action(iso, fl, W);
    CHECK(rep.value < 1e-6);

    MacroPath z({0.0, 1.0}, {v2(0.5, 0.5), v2(0.3, 0.7)});
    MacroPath bad({0.0, 1.0}, {v2(0, 0), v2(0.1, 0.1)});
    auto r2 = flux_action(iso, z, bad);
    CHECK(r2.value == kInf);
    CHECK(r2.has_flag("constraint_violated"));
    MacroPath dec({0.0, 1.0}, {v2(0.5, 0.5), v2(0.3, 0.5)});
    auto r3 = flux_action(iso, z, dec);
    CHECK(r3.value == kInf);
    CHECK(r3.has_flag("flux_decreasing"));
}

TEST_CASE("induced flux reproduces the path action") {
    auto net = builtin_network("ex2_2");
    MacroPath z({0.0, 0.5, 1.0}, {v2(0.5, 0.5), v2(0.8, 0.3), v2(0.6, 0.9)});
    double a = path_action(net, z).value;
    double b = flux_action(net, z, induced_flux(net, z, 1000)).value;
    CHECK(b == Approx(a).epsilon(1e-6));
}

TEST_CASE("infeasible paths have infinite action") {
    auto net = builtin_network("ex1_1");
    MacroPath down({0.0, 1.0}, {v1(1.0), v1(0.5)});
    auto rep = path_action(net, down);
    CHECK(rep.value == kInf);
    CHECK(rep.has_flag("infeasible"));
}

TEST_CASE("potential lower bound") {
    auto net = builtin_network("ex2_4");
    MacroPath y({0.0, 1.0}, {v1(0.0), v1(1.0)});
    double kappa = 0.5;
    double prev = potential_lower_bound(net, y, v1(0.0), v1(1.0), kappa, 0.0625);
    for (double eps = 0.03125; eps > 1e-4; eps *= 0.5) {
        double b = potential_lower_bound(net, y, v1(0.0), v1(1.0), kappa, eps);
        CHECK(b - prev == Approx(kappa * std::log(2.0)).epsilon(0.05));
        prev = b;
    }
    MacroPath flat({0.0, 1.0}, {v1(0.0), v1(0.0)});
    CHECK(potential_lower_bound(net, flat, v1(0.0), v1(1.0), kappa, 0.1) == 0.0);

    auto e53 = builtin_network("ex5_3");
    MacroPath esc({0.0, 1.0}, {v2(0.0, 0.0), v2(0.5, 0.5)});
    Vec n = v2(0.0, 1.0);
    double b1 = potential_lower_bound(e53, esc, v2(0, 0), n, kappa, 1e-2);
    double b2 = potential_lower_bound(e53, esc, v2(0, 0), n, kappa, 1e-4);
    CHECK(std::isfinite(b1));
    CHECK(b2 - b1 < kappa * std::log(100.0));
}

TEST_CASE("minimized action stays above the potential bound") {
    auto net = builtin_network("ex1_1");
    auto m = minimize_endpoint_action(net, v1(0.0), v1(0.5), 1.0, 40);
    for (double eps : {0.1, 0.01, 0.001})
        CHECK(m.value >= potential_lower_bound(net, m.path, v1(0.0), v1(1.0), 0.5, eps) - 1e-9);
}
