#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <stdexcept>

#include "jumpldp/errors.hpp"
#include "jumpldp/exactdist.hpp"
#include "jumpldp/experiments.hpp"
#include "jumpldp/simulator.hpp"

using namespace jumpldp;
using Catch::Approx;

namespace {
Vec v1(double a) { return Vec::Constant(1, a); }
}  // namespace

TEST_CASE("autocatalysis started at zero never moves") {
    auto net = builtin_network("ex1_1");
    for (std::uint64_t s = 1; s <= 10; ++s) CHECK(ssa_simulate(net, 10, {0}, 1.0, s).jump_times.empty());
}

TEST_CASE("autocatalysis paths are nondecreasing lattice paths that never hit zero") {
    auto net = builtin_network("ex1_1");
    for (std::uint64_t s = 1; s <= 20; ++s) {
        auto p = ssa_simulate(net, 10, {1}, 1.0, s);
        double prev = 0.0;
        for (size_t k = 0; k < p.jump_times.size(); ++k) {
            CHECK(p.jump_times[k] > prev);
            CHECK(p.jump_times[k] <= 1.0);
            prev = p.jump_times[k];
            CHECK(p.counts_at(net, prev)[0] == static_cast<std::int64_t>(k) + 2);
        }
        CHECK(p.counts_at(net, 1.0)[0] >= 1);
    }
}

TEST_CASE("simulation is deterministic per seed") {
    auto net = builtin_network("ex2_3");
    auto a = ssa_simulate(net, 100, {100, 0}, 5.0, 7), b = ssa_simulate(net, 100, {100, 0}, 5.0, 7);
    CHECK(a.jump_times == b.jump_times);
    CHECK(a.jump_reactions == b.jump_reactions);
    auto c = ssa_simulate(net, 100, {100, 0}, 5.0, 8);
    CHECK(a.jump_times != c.jump_times);
}

TEST_CASE("isomerization endpoint mean follows the fluid limit") {
    auto net = builtin_network("ex2_3");
    Vec mean = Vec::Zero(2);
    for (std::uint64_t s = 1; s <= 50; ++s) mean += ssa_simulate(net, 100, {100, 0}, 5.0, s).state_at(net, 5.0) / 50.0;
    CHECK(std::abs(mean[0] - 0.5) < 0.1);
    CHECK(std::abs(mean[1] - 0.5) < 0.1);
}

TEST_CASE("flux identity holds exactly") {
    auto net = builtin_network("ex2_2");
    auto f = simulate_with_flux(net, 50, {50, 10}, 1.0, 3);
    const auto& p = f.path;
    REQUIRE(!p.jump_times.empty());
    std::vector<std::int64_t> counts(static_cast<size_t>(net.num_reactions()), 0);
    for (size_t k = 0; k < p.jump_times.size(); ++k) {
        counts[static_cast<size_t>(p.jump_reactions[k])]++;
        Counts n = p.counts_at(net, p.jump_times[k]);
        Vec w = f.flux_at(p.jump_times[k]);
        for (int i = 0; i < 2; ++i) {
            std::int64_t expect = p.x0[static_cast<size_t>(i)];
            for (int r = 0; r < net.num_reactions(); ++r) {
                expect += counts[static_cast<size_t>(r)] * net.reactions()[static_cast<size_t>(r)].gamma[static_cast<size_t>(i)];
                CHECK(std::llround(w[r] * 50.0) == counts[static_cast<size_t>(r)]);
            }
            CHECK(n[static_cast<size_t>(i)] == expect);
        }
    }
    CHECK(counts == f.totals);
    auto y = simulate_with_flux(builtin_network("ex1_1"), 10, {1}, 1.0, 4);
    CHECK(y.flux_at(1.0)[0] == Approx(static_cast<double>(y.path.jump_times.size()) / 10.0));
    auto iso = simulate_with_flux(builtin_network("ex2_3"), 20, {20, 0}, 2.0, 5);
    Vec prev = Vec::Zero(2);
    for (double t : iso.path.jump_times) {
        Vec w = iso.flux_at(t);
        CHECK((w.array() >= prev.array()).all());
        prev = w;
    }
}

TEST_CASE("Poisson jump counts for a constant rate") {
    auto net = parse_model(R"J({"name": "src", "species": ["A"],
      "reactions": [{"in": {}, "out": {"A": 1}, "rate": {"type": "mass_action", "k": 1}}]})J");
    const int runs = 10000;
    // Bins 0..4 (merged), 5..15, >= 16: 13 bins, 12 degrees of freedom.
    std::vector<int> obs(13, 0);
    for (int i = 0; i < runs; ++i) {
        auto n = static_cast<int>(ssa_simulate(net, 10, {0}, 1.0, trial_seed(99, static_cast<std::uint64_t>(i))).jump_times.size());
        obs[static_cast<size_t>(n <= 4 ? 0 : n >= 16 ? 12 : n - 4)]++;
    }
    std::vector<double> p(13, 0.0);
    double pk = std::exp(-10.0), cum = 0.0;
    for (int k = 0; k <= 15; ++k) {
        p[static_cast<size_t>(k <= 4 ? 0 : k - 4)] += pk;
        cum += pk;
        pk *= 10.0 / (k + 1);
    }
    p[12] = 1.0 - cum;
    double chi2 = 0.0;
    for (size_t b = 0; b < 13; ++b) chi2 += std::pow(obs[b] - runs * p[b], 2) / (runs * p[b]);
    CHECK(chi2 < 32.91);  // chi-square(12) upper 0.001 quantile
}

TEST_CASE("reachable sets") {
    auto e22 = builtin_network("ex2_2");
    auto rs = reachable_set(e22, 10, {0, 1}, 200);
    for (const auto& s : rs.states) CHECK(s[0] == 0);
    auto y = reachable_set(builtin_network("ex1_1"), 10, {1}, 50);
    CHECK(y.states.size() == 50);
    CHECK(y.truncated);
    CHECK(y.states.back()[0] == 50);
    auto frozen = reachable_set(builtin_network("ex1_1"), 10, {0}, 50);
    CHECK(frozen.states.size() == 1);
    CHECK_FALSE(frozen.truncated);
}

TEST_CASE("Wilson interval") {
    auto [lo, hi] = wilson_interval(50, 100);
    CHECK(lo < 0.5);
    CHECK(hi > 0.5);
    auto [lo0, hi0] = wilson_interval(0, 100);
    CHECK(lo0 == 0.0);
    CHECK(hi0 > 0.0);
    auto [lo1, hi1] = wilson_interval(100, 100);
    CHECK(hi1 == Approx(1.0));
    CHECK(lo1 < 1.0);
}

TEST_CASE("trial seeds are distinct") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t t = 0; t < 10000; ++t) seen.insert(trial_seed(1, t));
    CHECK(seen.size() == 10000);
}

TEST_CASE("parallel_for covers every index and rethrows") {
    std::vector<int> hit(1000, 0);
    parallel_for(1000, 4, [&](int i) { hit[static_cast<size_t>(i)]++; });
    for (int h : hit) CHECK(h == 1);
    CHECK_THROWS_AS(parallel_for(100, 3, [](int i) {
                        if (i == 42) throw std::runtime_error("boom");
                    }),
                    std::runtime_error);
}

TEST_CASE("tube probabilities") {
    auto iso = builtin_network("ex2_3");
    Vec x0(2);
    x0 << 1.0, 0.0;
    auto fl = fluid_limit(iso, x0, 1.0, 200);
    auto wide = tube_probability_mc(iso, 50, {50, 0}, fl, 10.0, 200, 1);
    CHECK(wide.p_hat == 1.0);
    MacroPath off({0.0, 1.0}, {Vec::Constant(2, 0.3333), Vec::Constant(2, 0.3333)});
    auto none = tube_probability_mc(iso, 50, {50, 0}, off, 0.0, 200, 1);
    CHECK(none.p_hat == 0.0);
    CHECK(none.zero_hits);

    // Pure birth from 1/v: staying within 0.1 of zero means X(1) <= 0.1.
    auto net = builtin_network("ex1_1");
    MacroPath zero({0.0, 1.0}, {v1(0.0), v1(0.0)});
    auto est = tube_probability_mc(net, 50, {1}, zero, 0.1, 10000, 2);
    double exact = 1.0 - yule_tail(1.0, 6);
    CHECK(est.lo <= exact);
    CHECK(exact <= est.hi);
}

TEST_CASE("tube estimates do not depend on the worker count") {
    auto iso = builtin_network("ex2_3");
    Vec x0(2);
    x0 << 1.0, 0.0;
    auto fl = fluid_limit(iso, x0, 1.0, 200);
    auto a = tube_probability_mc(iso, 100, {100, 0}, fl, 0.08, 500, 3, 1);
    auto b = tube_probability_mc(iso, 100, {100, 0}, fl, 0.08, 500, 3, 4);
    CHECK(a.hits == b.hits);
}

TEST_CASE("sup distance is exact for piecewise-linear references") {
    auto net = builtin_network("ex1_1");
    // No jumps from zero: distance to z(t) = t is max_t t = 1.
    MacroPath z({0.0, 1.0}, {v1(0.0), v1(1.0)});
    CHECK(sup_distance(net, 10, {0}, z, 1) == Approx(1.0));
}

TEST_CASE("fluid gap") {
    auto net = builtin_network("ex1_1");
    auto frozen = fluid_gap(net, 100, {0}, 1.0, {1, 2, 3});
    for (double g : frozen.gaps) CHECK(g == 0.0);
    auto y = fluid_gap(net, 100, {1}, 1.0, {1, 2, 3, 4, 5});
    CHECK(y.median > 0.0);
}

TEST_CASE("trajectory tables") {
    auto net = builtin_network("ex2_3");
    auto p = ssa_simulate(net, 10, {10, 0}, 1.0, 1);
    auto t = trajectory_table(net, p);
    REQUIRE(t.header.size() == 4);
    CHECK(t.rows.front()[1] == -1.0);
    CHECK(t.rows.back()[1] == -1.0);
    CHECK(t.rows.back()[0] == 1.0);
    CHECK(t.rows.size() == p.jump_times.size() + 2);
    auto f = flux_table(net, simulate_with_flux(net, 10, {10, 0}, 1.0, 1));
    CHECK(f.header.size() == 6);
}

TEST_CASE("invalid simulation input") {
    auto net = builtin_network("ex2_3");
    CHECK_THROWS_AS(ssa_simulate(net, 0, {1, 0}, 1.0, 1), ValidationError);
    CHECK_THROWS_AS(ssa_simulate(net, 10, {1}, 1.0, 1), ValidationError);
    auto blow = parse_model(R"J({"species": ["A"], "reactions": [{"in": {"A": 2}, "out": {"A": 3},
      "rate": {"type": "mass_action", "k": 1}}]})J");
    CHECK_THROWS_AS(ssa_simulate(blow, 10, {20}, 5.0, 1, 10000), NumericError);
}
