#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "jumpldp/errors.hpp"
#include "jumpldp/expr.hpp"

using namespace jumpldp;
using Catch::Approx;

namespace {
const std::vector<std::string> kSpecies{"A", "B"};

double eval(const std::string& s, double a = 0.0, double b = 0.0) {
    double x[2] = {a, b};
    return evaluate(*parse_expression(s, kSpecies), x);
}
}  // namespace

TEST_CASE("arithmetic precedence and associativity") {
    CHECK(eval("1+2*3") == 7.0);
    CHECK(eval("(1+2)*3") == 9.0);
    CHECK(eval("2^3^2") == 512.0);
    CHECK(eval("8/2/2") == 2.0);
    CHECK(eval("10-4-3") == 3.0);
    CHECK(eval("-2^2") == -4.0);
    CHECK(eval("2*-3") == -6.0);
}

TEST_CASE("species variables and functions") {
    CHECK(eval("x[A]*x[B]", 0.5, 4.0) == 2.0);
    CHECK(eval("exp(-2/x[A])", 0.5) == Approx(std::exp(-4.0)));
    CHECK(eval("log(x[B])", 0.0, std::exp(1.0)) == Approx(1.0));
    CHECK(eval("pow(x[A], 3)", 2.0) == 8.0);
    CHECK(eval("step(x[A]-1)", 1.0) == 1.0);
    CHECK(eval("step(x[A]-1)", 0.999) == 0.0);
    CHECK(eval("min(x[A], x[B])", 2.0, 3.0) == 2.0);
    CHECK(eval("max(x[A], x[B])", 2.0, 3.0) == 3.0);
}

TEST_CASE("parse errors carry positions") {
    try {
        parse_expression("x[A] + x[Q]", kSpecies);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 1);
        CHECK(e.column() > 1);
    }
    CHECK_THROWS_AS(parse_expression("1 +", kSpecies), ParseError);
    CHECK_THROWS_AS(parse_expression("foo(1)", kSpecies), ParseError);
    CHECK_THROWS_AS(parse_expression("exp(1, 2)", kSpecies), ParseError);
    CHECK_THROWS_AS(parse_expression("(1 + 2", kSpecies), ParseError);
}

TEST_CASE("domain errors are signalled, never NaN") {
    CHECK_THROWS_AS(eval("log(x[A])", -1.0), DomainError);
    CHECK_THROWS_AS(eval("0/0"), DomainError);
}

TEST_CASE("log-domain evaluation does not underflow") {
    double x[2] = {1e-3, 0.0};
    auto e = parse_expression("exp(-1/x[A])", kSpecies);
    CHECK(evaluate(*e, x) == 0.0);
    CHECK(evaluate_log(*e, x) == Approx(-1000.0));
    auto p = parse_expression("x[A]*exp(-1/x[B])", kSpecies);
    double y[2] = {2.0, 1e-3};
    CHECK(evaluate_log(*p, y) == Approx(std::log(2.0) - 1000.0));
}

TEST_CASE("print/parse round trip is bit-exact") {
    const char* exprs[] = {"x[A]*exp(-1/x[B])", "step(x[A]-1)*(x[A]-1)", "pow(x[A]+0.1, 2.5)/(1+x[B]^2)",
                           "min(x[A], 3*x[B]) - max(0.25, log(1+x[A]))", "-x[A]/-(x[B]+1)"};
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.0, 3.0);
    for (const char* s : exprs) {
        auto e = parse_expression(s, kSpecies);
        auto again = parse_expression(print_expression(*e, kSpecies), kSpecies);
        for (int i = 0; i < 100; ++i) {
            double x[2] = {U(rng), U(rng)};
            CHECK(evaluate(*e, x) == evaluate(*again, x));
        }
    }
}
