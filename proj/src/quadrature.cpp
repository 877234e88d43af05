#include "jumpldp/quadrature.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "jumpldp/errors.hpp"

namespace jumpldp {

const GaussRule& gauss_legendre(int n) {
    static std::map<int, GaussRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    if (n < 1 || n > 64) throw ValidationError("Gauss-Legendre order must be in [1, 64]");
    GaussRule rule;
    rule.nodes.resize(static_cast<size_t>(n));
    rule.weights.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        if (n == 1) p0 = 1.0;
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        // ascending order
        rule.nodes[static_cast<size_t>(n - 1 - i)] = x;
        rule.weights[static_cast<size_t>(n - 1 - i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

double gauss_integrate(const std::function<double(double)>& f, double a, double b, int n) {
    const auto& g = gauss_legendre(n);
    double half = 0.5 * (b - a), mid = 0.5 * (a + b), s = 0.0;
    for (size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * f(mid + half * g.nodes[i]);
    return s * half;
}

namespace {

struct Adaptive {
    const std::function<double(double)>& f;
    const QuadOptions& opt;
    const GaussRule& rule;
    double length;
    QuadResult res;

    double rule_on(double a, double b) {
        double half = 0.5 * (b - a), mid = 0.5 * (a + b), s = 0.0;
        for (size_t i = 0; i < rule.nodes.size(); ++i) {
            double v = f(mid + half * rule.nodes[i]);
            ++res.evaluations;
            if (std::isinf(v) && v > 0) {
                res.infinite = true;
                return std::numeric_limits<double>::infinity();
            }
            s += rule.weights[i] * v;
        }
        return s * half;
    }

    double run(double a, double b, double whole, int depth) {
        if (res.infinite) return whole;
        res.max_depth_used = std::max(res.max_depth_used, depth);
        double m = 0.5 * (a + b);
        double left = rule_on(a, m);
        if (res.infinite) return left;
        double right = rule_on(m, b);
        if (res.infinite) return right;
        double both = left + right;
        double err = std::abs(both - whole);
        double tol = opt.abs_tol * (b - a) / length + opt.rel_tol * std::abs(both);
        if (err <= tol) return both;
        if (depth + 1 >= opt.max_depth) {
            res.capped = true;
            if (err > opt.growth_tol) res.growing = true;
            return both;
        }
        return run(a, m, left, depth + 1) + run(m, b, right, depth + 1);
    }
};

}  // namespace

QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              const QuadOptions& opt) {
    QuadResult empty;
    if (!(b > a)) return empty;
    Adaptive ad{f, opt, gauss_legendre(opt.points), b - a, {}};
    double whole = ad.rule_on(a, b);
    double v = ad.res.infinite ? whole : ad.run(a, b, whole, 0);
    ad.res.value = ad.res.infinite ? std::numeric_limits<double>::infinity() : v;
    return ad.res;
}

}  // namespace jumpldp
