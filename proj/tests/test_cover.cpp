#include <catch_amalgamated.hpp>

#include <cmath>
#include <string>

#include "jumpldp/cover.hpp"
#include "jumpldp/errors.hpp"
#include "jumpldp/experiments.hpp"

using namespace jumpldp;
using Catch::Approx;

namespace {

Vec v2(double a, double b) {
    Vec x(2);
    x << a, b;
    return x;
}

// Unit square with the bottom edge as the degenerate facet.
std::string square_cover(const std::string& w = "[0, 1]", double kappa = 0.5, double kdd = 0.15,
                         const std::string& escape = "[0]") {
    return R"J({"eps": 0.05, "eps_prime": 0.1, "eps_dblprime": 0.5, "kappa_dblprime": )J" + std::to_string(kdd) +
           R"J(, "regions": [{"halfspaces": [{"a": [-1, 0], "b": 0}, {"a": [1, 0], "b": 1},
                               {"a": [0, -1], "b": 0}, {"a": [0, 1], "b": 1}],
                "boundary": [2], "w": )J" + w + R"J(, "kappa": )J" + std::to_string(kappa) +
           R"J(, "escape": )J" + escape + "}]}";
}

ReactionNetwork up_right() {
    return parse_model(R"J({"species": ["X", "Y"], "reactions": [
        {"in": {}, "out": {"Y": 2}, "rate": {"type": "mass_action", "k": 1}},
        {"in": {}, "out": {"X": 1}, "rate": {"type": "mass_action", "k": 1}}]})J");
}

}  // namespace

TEST_CASE("contains, margin and boundary distance on the unit square") {
    Cover c = parse_cover(square_cover());
    const auto& r = c.regions[0];
    CHECK(r.contains(v2(0.5, 0.5)));
    CHECK(r.contains(v2(0.0, 0.0)));
    CHECK_FALSE(r.contains(v2(1.1, 0.5)));
    CHECK(r.margin(v2(0.5, 0.2)) == Approx(0.2));
    CHECK(r.margin(v2(1.5, 0.5)) == Approx(-0.5));
    CHECK(r.boundary_distance(v2(0.1, 0.7)) == Approx(0.7));
    CHECK(c.clearance(v2(0.1, 0.7)) == Approx(0.7));
    CHECK(c.kappa_minus() == 0.5);
    CHECK(r.exit_time(v2(0.5, 0.5), v2(1.0, 0.0), 10.0) == Approx(0.5));
    CHECK(r.exit_time(v2(0.5, 0.5), v2(0.0, 1.0), 0.2) == Approx(0.2));
}

TEST_CASE("interior regions have infinite boundary distance") {
    Cover c = parse_cover(R"J({"eps": 1, "eps_prime": 1, "eps_dblprime": 1, "kappa_dblprime": 0.1,
        "regions": [{"halfspaces": [{"a": [1], "b": 1}, {"a": [-1], "b": 0}]}]})J");
    CHECK(std::isinf(c.regions[0].boundary_distance(Vec::Constant(1, 0.5))));
    CHECK(c.kappa_minus() == 1.0);
    CHECK_FALSE(c.regions[0].is_boundary());
}

TEST_CASE("escape alpha derived from the network") {
    auto net = up_right();
    Cover c = parse_cover(square_cover(), &net);
    CHECK(c.regions[0].alpha == Approx(2.0));
    auto ex = builtin_cover("ex2_2");
    CHECK(ex.regions[0].alpha == Approx(std::sqrt(2.0)));
}

TEST_CASE("cover validation errors") {
    auto net = up_right();
    CHECK_THROWS_AS(parse_cover("{not json"), ValidationError);
    CHECK_THROWS_AS(parse_cover(square_cover("[0, 1]", 1.5)), ValidationError);
    CHECK_THROWS_AS(parse_cover(square_cover("[0, 1]", 0.0)), ValidationError);
    CHECK_THROWS_AS(parse_cover(square_cover("[0.6, 0.6]")), ValidationError);
    CHECK_THROWS_AS(parse_cover(square_cover("[0, 1]", 0.5, 0.2)), ValidationError);
    CHECK_THROWS_AS(parse_cover(square_cover("[0, 1]", 0.5, 0.15, "[1]"), &net), ValidationError);
    CHECK_THROWS_AS(parse_cover(square_cover("[0, 1]", 0.5, 0.15, "[7]"), &net), ValidationError);
    CHECK_THROWS_AS(parse_cover(square_cover("[0, 1, 0]")), ValidationError);
    CHECK_THROWS_AS(parse_cover(R"J({"eps": 1, "eps_prime": 1, "eps_dblprime": 1, "kappa_dblprime": 0.1,
        "regions": []})J"), ValidationError);
}

TEST_CASE("cover json round trip") {
    for (const auto& b : builtin_models()) {
        Cover c = builtin_cover(b.id);
        Cover again = parse_cover(cover_to_json(c).dump());
        REQUIRE(again.regions.size() == c.regions.size());
        for (size_t i = 0; i < c.regions.size(); ++i) {
            CHECK(again.regions[i].boundary == c.regions[i].boundary);
            CHECK(again.regions[i].kappa == c.regions[i].kappa);
        }
    }
}

TEST_CASE("radical inverse") {
    CHECK(radical_inverse(1, 2) == 0.5);
    CHECK(radical_inverse(3, 2) == 0.75);
    CHECK(radical_inverse(5, 3) == Approx(2.0 / 3 + 1.0 / 9));
    CHECK(radical_inverse(0, 5) == 0.0);
}

TEST_CASE("bounding box and samples stay in their region") {
    for (const auto& b : builtin_models()) {
        Cover c = builtin_cover(b.id);
        for (const auto& r : c.regions) {
            auto [lo, hi] = bounding_box(r);
            CHECK((hi.array() >= lo.array()).all());
            auto pts = sample_region(r, 64);
            CHECK(pts.size() == 64);
            for (const auto& x : pts) {
                CHECK(r.contains(x));
                CHECK((x.array() >= lo.array() - 1e-12).all());
                CHECK((x.array() <= hi.array() + 1e-12).all());
            }
            if (!r.is_boundary()) continue;
            auto near = sample_near_boundary(r, 0.01, 0.02, 32);
            CHECK(!near.empty());
            for (const auto& x : near) {
                CHECK(r.contains(x));
                double d = r.boundary_distance(x);
                CHECK(d >= 0.01);
                CHECK(d < 0.02);
            }
        }
    }
    CHECK_THROWS_AS(sample_near_boundary(builtin_cover("ex2_2").regions[1], 0.0, 0.1, 4), ValidationError);
}
