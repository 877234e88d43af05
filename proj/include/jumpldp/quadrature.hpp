#pragma once

#include <functional>
#include <vector>

namespace jumpldp {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

const GaussRule& gauss_legendre(int n);

// Plain n-point rule on [a, b].
double gauss_integrate(const std::function<double(double)>& f, double a, double b, int n);

struct QuadResult {
    double value = 0.0;
    bool infinite = false;  // integrand returned +inf at some node
    bool capped = false;    // a leaf hit the depth cap above tolerance
    bool growing = false;   // a capped leaf still changed materially: likely divergent
    int evaluations = 0;
    int max_depth_used = 0;
};

struct QuadOptions {
    int points = 8;
    int max_depth = 12;
    double abs_tol = 1e-12;
    double rel_tol = 1e-11;
    double growth_tol = 1e-4;
};

// Dyadic adaptive Gauss-Legendre: an interval is halved while the two-half
// estimate differs from the whole-interval estimate by more than tolerance.
QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              const QuadOptions& opt = {});

}  // namespace jumpldp
