#include <catch_amalgamated.hpp>

#include <cmath>

#include "jumpldp/errors.hpp"
#include "jumpldp/exactdist.hpp"
#include "jumpldp/experiments.hpp"
#include "jumpldp/simulator.hpp"

using namespace jumpldp;
using Catch::Approx;

namespace {

double binom_pmf(int n, int k, double p) {
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * std::log(p) +
                    (n - k) * std::log1p(-p));
}

}  // namespace

TEST_CASE("chain construction") {
    auto net = builtin_network("ex1_1");
    auto c = build_chain(net, 10, {1}, 100);
    REQUIRE(c.states.size() == 100);
    CHECK(c.truncated);
    for (size_t i = 0; i + 1 < c.states.size(); ++i) {
        REQUIRE(c.out[i].size() == 1);
        CHECK(c.out[i][0].rate == Approx(static_cast<double>(c.states[i][0])));
    }
    auto frozen = build_chain(net, 10, {0}, 100);
    CHECK(frozen.states.size() == 1);
    CHECK(frozen.out[0].empty());
    auto iso = build_chain(builtin_network("ex2_3"), 2, {2, 0}, 100);
    CHECK(iso.states.size() == 3);
    CHECK_FALSE(iso.truncated);
    for (const auto& s : iso.states) CHECK(s[0] + s[1] == 2);
    for (size_t i = 0; i < iso.states.size(); ++i) {
        double tot = 0.0;
        for (const auto& tr : iso.out[i]) {
            CHECK(tr.rate >= 0.0);
            tot += tr.rate;
        }
        CHECK(tot <= iso.q + 1e-12);
    }
}

TEST_CASE("point mass at t = 0") {
    auto c = build_chain(builtin_network("ex2_3"), 5, {5, 0}, 100);
    auto d = transient_distribution(c, 0.0);
    CHECK(d.prob[0] == 1.0);
    for (size_t i = 1; i < d.prob.size(); ++i) CHECK(d.prob[i] == 0.0);
}

TEST_CASE("Yule distribution") {
    auto c = build_chain(builtin_network("ex1_1"), 1, {1}, 200);
    auto d = transient_distribution(c, 1.0, 1e-14);
    const double q = 1.0 - std::exp(-1.0);
    for (size_t i = 0; i < 40; ++i) {
        double n = static_cast<double>(c.states[i][0]);
        CHECK(d.prob[i] == Approx(std::exp(-1.0) * std::pow(q, n - 1)).margin(1e-12));
    }
}

TEST_CASE("two-state chain and binomial oracle") {
    auto net = builtin_network("ex2_3");
    auto c = build_chain(net, 1, {1, 0}, 10);
    for (double t : {0.1, 0.7, 2.0}) {
        auto d = transient_distribution(c, t, 1e-14);
        double pa = 0.5 * (1 + std::exp(-2 * t));
        for (size_t i = 0; i < c.states.size(); ++i)
            CHECK(d.prob[i] == Approx(c.states[i][0] == 1 ? pa : 1 - pa).margin(1e-12));
    }
    // Independent molecules: A-count at t is Binomial(n, (1 + e^{-2t}) / 2).
    auto big = build_chain(net, 20, {20, 0}, 100);
    auto d = transient_distribution(big, 0.4, 1e-14);
    double p = 0.5 * (1 + std::exp(-0.8));
    for (size_t i = 0; i < big.states.size(); ++i)
        CHECK(d.prob[i] == Approx(binom_pmf(20, static_cast<int>(big.states[i][0]), p)).margin(1e-12));
}

TEST_CASE("probability conservation") {
    for (std::int64_t cap : {5, 30, 400}) {
        auto c = build_chain(builtin_network("ex1_1"), 10, {1}, cap);
        for (double t : {0.2, 1.0, 3.0}) {
            auto d = transient_distribution(c, t, 1e-13);
            double live = 0.0;
            for (double p : d.prob) live += p;
            CHECK(live + d.sink == Approx(1.0).margin(1e-11));
        }
    }
}

TEST_CASE("event probabilities against the geometric tail") {
    auto net = builtin_network("ex1_1");
    auto c = build_chain(net, 200, {1}, 4000);
    auto ev = event_probability(c, 1.0, [](const Vec& x) { return x[0] >= 0.5; }, 1e-60);
    double oracle = std::pow(1 - std::exp(-1.0), 99);
    CHECK(ev.value == Approx(oracle).epsilon(1e-10));
    CHECK(ev.upper - ev.value < 10 * 1e-60 + 1e-300);
    auto all = event_probability(c, 1.0, [](const Vec&) { return true; });
    CHECK(all.value == Approx(1.0).margin(1e-11));
    // Tight cap: the bracket must contain the oracle.
    auto small = build_chain(net, 200, {1}, 120);
    auto br = event_probability(small, 1.0, [](const Vec& x) { return x[0] >= 0.5; }, 1e-60);
    CHECK(br.value <= oracle);
    CHECK(oracle <= br.upper * (1 + 1e-12));
    CHECK(br.sink > 0.0);
}

TEST_CASE("marginal event is nondecreasing in time for pure birth") {
    auto c = build_chain(builtin_network("ex1_1"), 20, {1}, 400);
    double prev = 0.0;
    for (double t = 0.1; t <= 2.0; t += 0.1) {
        double p = event_probability(c, t, [](const Vec& x) { return x[0] >= 0.5; }, 1e-30).value;
        CHECK(p >= prev);
        prev = p;
    }
}

TEST_CASE("yule tail") {
    CHECK(yule_tail(1.0, 1) == 1.0);
    CHECK(yule_tail(1.0, 100) == Approx(std::pow(0.6321205588285577, 99)).epsilon(1e-12));
    CHECK(yule_tail(60.0, 5) == Approx(1.0));
}

TEST_CASE("Monte Carlo Wilson intervals cover exact tube values") {
    auto net = builtin_network("ex1_1");
    int covered = 0, cases = 0;
    for (std::int64_t v : {10, 20}) {
        for (int ti = 0; ti < 10; ++ti) {
            double t = 0.3 + 0.15 * ti;
            for (double delta : {0.2, 0.3, 0.45, 0.6, 0.8}) {
                MacroPath zero({0.0, t}, {Vec::Zero(1), Vec::Zero(1)});
                auto est = tube_probability_mc(net, v, {1}, zero, delta, 2000,
                                               static_cast<std::uint64_t>(1000 + cases));
                auto c = build_chain(net, v, {1}, 50 * v);
                double exact =
                    event_probability(c, t, [delta](const Vec& x) { return x[0] <= delta + 1e-12; }, 1e-14).value;
                covered += (est.lo <= exact && exact <= est.hi) ? 1 : 0;
                ++cases;
            }
        }
    }
    CHECK(cases == 100);
    CHECK(covered >= 93);
}

TEST_CASE("distribution table layout") {
    auto c = build_chain(builtin_network("ex2_3"), 2, {2, 0}, 10);
    auto t = distribution_table(c, transient_distribution(c, 0.5));
    CHECK(t.header == std::vector<std::string>{"state_index", "x_1", "x_2", "prob"});
    CHECK(t.rows.size() == 3);
    CHECK(t.rows[0][1] == 1.0);
}

TEST_CASE("invalid chain input") {
    auto net = builtin_network("ex1_1");
    CHECK_THROWS_AS(build_chain(net, 0, {1}, 10), ValidationError);
    CHECK_THROWS_AS(build_chain(net, 10, {1}, 0), ValidationError);
    CHECK_THROWS_AS(transient_distribution(build_chain(net, 10, {1}, 10), -1.0), ValidationError);
}
