#pragma once

#include "jumpldp/network.hpp"

namespace jumpldp {

struct Phase1Result {
    bool feasible = false;
    Vec x;            // x >= 0 with A x = b when feasible
    Vec certificate;  // u with u^T A <= 0 and u^T b > 0 when infeasible
    double residual = 0.0;
    int pivots = 0;
};

// Phase-1 simplex for {x >= 0 : A x = b} with Bland's anti-cycling rule.
Phase1Result lp_phase1(const Mat& A, const Vec& b, double tol = 1e-9);

}  // namespace jumpldp
