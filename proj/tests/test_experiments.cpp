#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "jumpldp/errors.hpp"
#include "jumpldp/experiments.hpp"
#include "jumpldp/ratefn.hpp"
#include "jumpldp/simulator.hpp"

using namespace jumpldp;
using Catch::Approx;

namespace {

Vec v2(double a, double b) {
    Vec x(2);
    x << a, b;
    return x;
}

double col(const CsvTable& t, size_t row, const std::string& name) {
    for (size_t j = 0; j < t.header.size(); ++j)
        if (t.header[j] == name) return t.rows[row][j];
    FAIL("missing column " << name);
    return 0.0;
}

}  // namespace

TEST_CASE("builtin registry") {
    const auto& all = builtin_models();
    REQUIRE(all.size() == 7);
    for (const auto& b : all) {
        auto net = builtin_network(b.id);
        auto c = builtin_cover(b.id);
        CHECK(c.dim() == net.dim());
        CHECK(b.x0.size() == net.dim());
        CHECK(static_cast<int>(b.x0_v(10).size()) == net.dim());
        CHECK(builtin(b.id).id == b.id);
    }
    CHECK_THROWS_AS(builtin("nope"), ValidationError);
}

TEST_CASE("random builtin paths stay in the cover") {
    std::mt19937_64 rng(3);
    for (const auto& b : builtin_models()) {
        Cover c = builtin_cover(b.id);
        for (int k = 0; k < 5; ++k) {
            auto z = random_cover_path(b.id, rng, 4, 2.0);
            CHECK(z.T() == 2.0);
            CHECK(z.size() == 5);
            for (size_t i = 1; i < z.size(); ++i) CHECK(z.time(i) >= z.time(i - 1));
            for (const auto& x : z.points()) {
                bool inside = false;
                for (const auto& r : c.regions) inside = inside || r.contains(x, 1e-9);
                CHECK(inside);
                if (b.id == "ex2_3") CHECK(x.sum() == Approx(1.0));
            }
        }
    }
}

TEST_CASE("marginal study matches the geometric tail of the Yule process") {
    // Started from one individual at unit rate per individual, X(t) is
    // geometric: P(X(t) >= k) = (1 - e^{-t})^{k-1}.
    const double t = 0.7, a = 0.5;
    MarginalOptions opt;
    opt.cap_factor = 40;
    auto s = ldp_marginal_study(builtin_network("ex1_1"), builtin("ex1_1").x0_v,
                                [a](const Vec& x) { return x[0] >= a - 1e-12; }, t, {10, 20, 40, 80}, opt);
    const double q = 1 - std::exp(-t);
    for (size_t i = 0; i < s.rows.rows.size(); ++i) {
        double v = col(s.rows, i, "v");
        double expect = std::pow(q, a * v - 1);
        CHECK(col(s.rows, i, "prob") == Approx(expect).epsilon(1e-8));
        CHECK(col(s.rows, i, "log_rate") == Approx(std::log(col(s.rows, i, "prob")) / v));
        CHECK(col(s.rows, i, "upper") >= col(s.rows, i, "prob"));
    }
    // (1/v) log P = a log q - log(q)/v is linear in 1/v, so both fits are exact.
    CHECK(s.fits["richardson_limit"].get<double>() == Approx(a * std::log(q)).epsilon(1e-6));
    CHECK(s.fits["ls_limit"].get<double>() == Approx(a * std::log(q)).epsilon(1e-6));
    CHECK(s.pass == -1);
    CHECK(s.to_json()["pass"].is_null());
}

TEST_CASE("whole-space event has zero rate") {
    MarginalOptions opt;
    opt.has_expected = true;
    opt.expected = 0.0;
    auto s = ldp_marginal_study(builtin_network("ex2_3"), builtin("ex2_3").x0_v, [](const Vec&) { return true; }, 1.0,
                                {5, 10, 20}, opt);
    for (size_t i = 0; i < s.rows.rows.size(); ++i) {
        CHECK(col(s.rows, i, "prob") == Approx(1.0).epsilon(1e-12));
        CHECK(col(s.rows, i, "log_rate") == Approx(0.0).margin(1e-12));
    }
    CHECK(s.pass == 1);
}

TEST_CASE("law of large numbers for isomerization") {
    const double t = 1.0;
    const double fluid = 0.5 + 0.5 * std::exp(-2 * t);
    MarginalOptions opt;
    auto s = ldp_marginal_study(builtin_network("ex2_3"), builtin("ex2_3").x0_v,
                                [fluid](const Vec& x) { return std::abs(x[0] - fluid) <= 0.1; }, t, {10, 40, 160},
                                opt);
    double prev = 0.0;
    for (size_t i = 0; i < s.rows.rows.size(); ++i) {
        double p = col(s.rows, i, "prob");
        CHECK(p > prev);
        prev = p;
    }
    CHECK(prev > 0.98);
}

TEST_CASE("Monte Carlo marginal study is reproducible and matches exact") {
    MarginalOptions mc;
    mc.mode = StudyMode::MonteCarlo;
    mc.trials = 4000;
    mc.seed = 9;
    auto ev = [](const Vec& x) { return x[0] <= 0.5; };
    auto net = builtin_network("ex2_3");
    auto a = ldp_marginal_study(net, builtin("ex2_3").x0_v, ev, 0.5, {10, 20}, mc);
    mc.jobs = 3;
    auto b = ldp_marginal_study(net, builtin("ex2_3").x0_v, ev, 0.5, {10, 20}, mc);
    CHECK(a.rows.rows == b.rows.rows);
    auto e = ldp_marginal_study(net, builtin("ex2_3").x0_v, ev, 0.5, {10, 20}, MarginalOptions{});
    for (size_t i = 0; i < 2; ++i) {
        double p = col(e.rows, i, "prob");
        CHECK(col(a.rows, i, "lo") <= p);
        CHECK(p <= col(a.rows, i, "hi"));
    }
    mc.seed = 10;
    auto c = ldp_marginal_study(net, builtin("ex2_3").x0_v, ev, 0.5, {10, 20}, mc);
    CHECK(c.rows.rows != a.rows.rows);
}

TEST_CASE("marginal study flags empty events") {
    MarginalOptions mc;
    mc.mode = StudyMode::MonteCarlo;
    mc.trials = 50;
    auto s = ldp_marginal_study(builtin_network("ex2_3"), builtin("ex2_3").x0_v, [](const Vec&) { return false; }, 0.5,
                                {10}, mc);
    CHECK(std::find(s.flags.begin(), s.flags.end(), "zero_hits") != s.flags.end());
    CHECK(std::find(s.flags.begin(), s.flags.end(), "too_few_finite_rungs") != s.flags.end());
    CHECK_THROWS_AS(ldp_marginal_study(builtin_network("ex2_3"), builtin("ex2_3").x0_v, [](const Vec&) { return true; },
                                       0.5, {}, mc),
                    ValidationError);
}

TEST_CASE("endpoint minimizer") {
    auto net = builtin_network("ex2_3");
    const double T = 1.0;
    // Fluid endpoint: the minimum is zero up to the O(h^2) piecewise-linear error.
    const double a = 0.5 + 0.3 * std::exp(-2 * T);
    std::vector<double> vals;
    for (int n : {8, 16, 32}) {
        auto fl = minimize_endpoint_action(net, v2(0.8, 0.2), v2(a, 1 - a), T, n);
        CHECK(fl.converged);
        CHECK(fl.value >= 0);
        vals.push_back(fl.value);
    }
    CHECK(vals[2] < 2e-5);
    CHECK(vals[0] / vals[1] == Approx(4.0).epsilon(0.05));
    CHECK(vals[1] / vals[2] == Approx(4.0).epsilon(0.05));

    Vec target = v2(0.9, 0.1);
    auto res = minimize_endpoint_action(net, v2(0.5, 0.5), target, T, 16);
    MacroPath straight({0.0, T}, {v2(0.5, 0.5), target});
    CHECK(res.value > 0);
    CHECK(res.value <= path_action(net, straight).value + 1e-12);
    CHECK((res.path.point(res.path.size() - 1) - target).norm() == 0.0);
    CHECK(res.path.point(0) == v2(0.5, 0.5));
}

TEST_CASE("divergence probe") {
    auto y = builtin_network("ex1_1");
    std::vector<double> eps{0.1, 0.03, 0.01, 0.003, 0.001};
    MacroPath interior({0.0, 1.0}, {Vec::Constant(1, 0.5), Vec::Constant(1, 1.0)});
    auto s = divergence_probe(y, interior, eps);
    CHECK(s.fits["verdict"] == "convergent");
    CHECK(s.fits["spread"].get<double>() < 0.1);
    MacroPath full({0.0, 1.0}, {Vec::Constant(1, 0.5), Vec::Constant(1, 1.0)});
    CHECK(col(s.rows, 4, "value") == Approx(path_action(y, full).value).epsilon(0.01));
    for (size_t i = 0; i < eps.size(); ++i) CHECK(col(s.rows, i, "t_eps") == Approx(2 * eps[i]));

    MacroPath up({0.0, 1.0}, {Vec::Constant(1, 0.0), Vec::Constant(1, 1.0)});
    auto d = divergence_probe(builtin_network("ex2_4"), up, eps);
    CHECK(d.fits["verdict"] == "divergent");
    CHECK(d.fits["slope"].get<double>() == Approx(1.0).margin(0.1));
    auto c = divergence_probe(y, up, eps);
    CHECK(c.fits["verdict"] == "convergent");
}

TEST_CASE("escape event study") {
    EscapeEventOptions opt;
    opt.trials = 4000;
    opt.seed = 4;
    auto s = escape_event_study(builtin_network("ex1_1"), builtin_cover("ex1_1"), 0, builtin("ex1_1").x0_v,
                                builtin("ex1_1").x0, {20, 40}, 0.1, opt);
    CHECK(s.pass == 1);
    CHECK(s.flags.empty());
    for (size_t i = 0; i < s.rows.rows.size(); ++i) {
        double v = col(s.rows, i, "v");
        CHECK(col(s.rows, i, "n_plus") == std::floor(v * 0.1));
        double p = col(s.rows, i, "exact_prob");
        CHECK(p > 0);
        CHECK(p <= 1);
        auto [lo, hi] = wilson_interval(static_cast<std::int64_t>(col(s.rows, i, "mc_hits")), opt.trials);
        CHECK(lo <= p);
        CHECK(p <= hi);
        CHECK(col(s.rows, i, "exact_log_rate") >= col(s.rows, i, "bound"));
    }
    auto again = escape_event_study(builtin_network("ex1_1"), builtin_cover("ex1_1"), 0, builtin("ex1_1").x0_v,
                                    builtin("ex1_1").x0, {20, 40}, 0.1, opt);
    CHECK(again.rows.rows == s.rows.rows);

    auto big = escape_event_study(builtin_network("ex1_1"), builtin_cover("ex1_1"), 0, builtin("ex1_1").x0_v,
                                  builtin("ex1_1").x0, {20}, 0.6, opt);
    CHECK(std::find(big.flags.begin(), big.flags.end(), "bound_precondition_violated") != big.flags.end());
    CHECK_THROWS_AS(escape_event_study(builtin_network("ex1_1"), builtin_cover("ex1_1"), 1, builtin("ex1_1").x0_v,
                                       builtin("ex1_1").x0, {20}, 0.1, opt),
                    ValidationError);
}

TEST_CASE("study json layout") {
    StudyResult s;
    s.study = "x";
    s.rows.header = {"a"};
    s.rows.rows = {{1.0}};
    s.flags = {"f"};
    s.pass = 0;
    auto j = s.to_json();
    auto m = s.meta();
    CHECK(m["study"] == "x");
    CHECK(m["pass"] == false);
    CHECK(m["flags"][0] == "f");
    CHECK(j.dump().find("\"a\"") != std::string::npos);
}
