#include "jumpldp/lp.hpp"

#include <cmath>
#include <vector>

#include "jumpldp/errors.hpp"

namespace jumpldp {

Phase1Result lp_phase1(const Mat& A, const Vec& b, double tol) {
    const Eigen::Index m = A.rows(), n = A.cols();
    if (b.size() != m) throw ValidationError("lp_phase1: dimension mismatch");
    Phase1Result res;
    if (m == 0) {
        res.feasible = true;
        res.x = Vec::Zero(n);
        return res;
    }
    // Tableau [A' | I | b'] with rows flipped so that b' >= 0.
    Vec sign = Vec::Ones(m);
    Mat T = Mat::Zero(m, n + m + 1);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (b[i] < 0) sign[i] = -1.0;
        T.block(i, 0, 1, n) = sign[i] * A.row(i);
        T(i, n + i) = 1.0;
        T(i, n + m) = sign[i] * b[i];
    }
    std::vector<Eigen::Index> basis(static_cast<size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<size_t>(i)] = n + i;

    // Reduced costs for minimizing the sum of artificials.
    Vec cost = Vec::Zero(n + m);
    cost.tail(m).setOnes();
    auto reduced = [&]() {
        Vec r = cost;
        for (Eigen::Index i = 0; i < m; ++i) {
            double cb = cost[basis[static_cast<size_t>(i)]];
            if (cb != 0.0) r -= cb * T.row(i).head(n + m).transpose();
        }
        return r;
    };

    const int cap = 10000;
    for (;;) {
        Vec r = reduced();
        Eigen::Index enter = -1;
        for (Eigen::Index j = 0; j < n + m; ++j) {
            if (r[j] < -tol) {
                enter = j;
                break;
            }
        }
        if (enter < 0) break;
        Eigen::Index leave = -1;
        double best = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            double a = T(i, enter);
            if (a <= tol) continue;
            double ratio = T(i, n + m) / a;
            if (leave < 0 || ratio < best - tol ||
                (std::abs(ratio - best) <= tol &&
                 basis[static_cast<size_t>(i)] < basis[static_cast<size_t>(leave)])) {
                leave = i;
                best = ratio;
            }
        }
        if (leave < 0) break;  // unbounded direction cannot occur in phase 1
        T.row(leave) /= T(leave, enter);
        for (Eigen::Index i = 0; i < m; ++i) {
            if (i == leave) continue;
            double f = T(i, enter);
            if (f != 0.0) T.row(i) -= f * T.row(leave);
        }
        basis[static_cast<size_t>(leave)] = enter;
        if (++res.pivots > cap) throw NumericError("lp_phase1: pivot cap exceeded");
    }

    double obj = 0.0;
    for (Eigen::Index i = 0; i < m; ++i)
        if (basis[static_cast<size_t>(i)] >= n) obj += T(i, n + m);
    res.residual = obj;
    res.x = Vec::Zero(n);
    for (Eigen::Index i = 0; i < m; ++i) {
        Eigen::Index j = basis[static_cast<size_t>(i)];
        if (j < n) res.x[j] = std::max(0.0, T(i, n + m));
    }
    double scale = 1.0 + b.lpNorm<1>();
    res.feasible = obj <= tol * scale;
    if (!res.feasible) {
        Vec r = reduced();
        Vec pi(m);
        for (Eigen::Index i = 0; i < m; ++i) pi[i] = (1.0 - r[n + i]) * sign[i];
        res.certificate = pi;
    }
    return res;
}

}  // namespace jumpldp
