#include "jumpldp/ratefn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jumpldp/errors.hpp"
#include "jumpldp/lp.hpp"

namespace jumpldp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// H contribution of one reaction with log-rate l.
double entropy_term(double mu, double l) {
    if (mu == 0.0) return std::exp(l);
    if (l == -kInf) return kInf;
    return std::exp(l) - mu + mu * (std::log(mu) - l);
}

bool zero_column(const Mat& G, Eigen::Index r) { return G.col(r).cwiseAbs().maxCoeff() == 0.0; }

// exp(l + a) - exp(l) without cancellation near a = 0.
double exp_shift_minus(double l, double a) {
    double el = std::exp(l);
    if (el > 0 && std::isfinite(el)) {
        double e = el * std::expm1(a);
        if (std::isfinite(e)) return e;
    }
    return std::exp(l + a) - el;
}

}  // namespace

double entropy(const Vec& mu, const Vec& lam) {
    if (mu.size() != lam.size()) throw ValidationError("entropy: length mismatch");
    double s = 0.0;
    for (Eigen::Index r = 0; r < mu.size(); ++r) {
        if (mu[r] < 0 || lam[r] < 0) throw ValidationError("entropy: negative entry");
        if (mu[r] == 0.0) {
            s += lam[r];
        } else if (lam[r] == 0.0) {
            return kInf;
        } else {
            s += lam[r] - mu[r] + mu[r] * std::log(mu[r] / lam[r]);
        }
    }
    return s;
}

double theta_objective(const Mat& G, const Vec& loglam, const Vec& y, const Vec& theta) {
    double f = theta.dot(y);
    for (Eigen::Index r = 0; r < G.cols(); ++r) {
        if (loglam[r] == -kInf) continue;
        f -= exp_shift_minus(loglam[r], theta.dot(G.col(r)));
    }
    return f;
}

Vec theta_gradient(const Mat& G, const Vec& loglam, const Vec& y, const Vec& theta) {
    Vec g = y;
    for (Eigen::Index r = 0; r < G.cols(); ++r) {
        if (loglam[r] == -kInf) continue;
        g -= std::exp(loglam[r] + theta.dot(G.col(r))) * G.col(r);
    }
    return g;
}

FeasibilityResult flux_feasibility(const Mat& G, const Vec& loglam, const Vec& y) {
    std::vector<Eigen::Index> act;
    for (Eigen::Index r = 0; r < G.cols(); ++r)
        if (loglam[r] > -kInf && !zero_column(G, r)) act.push_back(r);
    Mat GA(G.rows(), static_cast<Eigen::Index>(act.size()));
    for (size_t i = 0; i < act.size(); ++i) GA.col(static_cast<Eigen::Index>(i)) = G.col(act[i]);
    auto lp = lp_phase1(GA, y);
    FeasibilityResult out;
    out.feasible = lp.feasible;
    if (lp.feasible) {
        out.mu = Vec::Zero(G.cols());
        for (size_t i = 0; i < act.size(); ++i) out.mu[act[i]] = lp.x[static_cast<Eigen::Index>(i)];
    } else {
        out.certificate = lp.certificate;
    }
    return out;
}

FeasibilityResult feasibility(const ReactionNetwork& net, const Vec& x, const Vec& y) {
    if (x.size() != net.dim() || y.size() != net.dim())
        throw ValidationError("feasibility: dimension mismatch");
    return flux_feasibility(net.gamma_matrix(), log_macro_rates(net, x), y);
}

LagrangianResult lagrangian_core(const Mat& G, const Vec& loglam, const Vec& y, double tol) {
    const Eigen::Index d = G.rows(), R = G.cols();
    LagrangianResult res;
    res.theta_star = Vec::Zero(d);
    res.mu_star = Vec::Zero(R);

    std::vector<Eigen::Index> act;
    for (Eigen::Index r = 0; r < R; ++r) {
        if (loglam[r] == -kInf) continue;
        if (zero_column(G, r)) {
            res.mu_star[r] = std::exp(loglam[r]);  // placeholder jump: mu* = lambda, cost 0
            continue;
        }
        act.push_back(r);
    }
    const Eigen::Index na = static_cast<Eigen::Index>(act.size());
    Mat GA(d, na);
    for (Eigen::Index i = 0; i < na; ++i) GA.col(i) = G.col(act[static_cast<size_t>(i)]);
    auto lp = lp_phase1(GA, y);
    if (!lp.feasible) {
        res.value = kInf;
        res.feasible = false;
        res.mu_star = Vec();
        return res;
    }
    res.feasible = true;

    // Reactions able to carry positive flux, and a flux positive on all of them.
    const double ytol = 1e-9 * (1.0 + y.norm());
    std::vector<char> support(static_cast<size_t>(na), 0);
    Vec muhat = lp.x;
    for (Eigen::Index i = 0; i < na; ++i) {
        if (lp.x[i] > ytol) {
            support[static_cast<size_t>(i)] = 1;
            continue;
        }
        Mat M = Mat::Zero(d + 1, na + 1);
        M.block(0, 0, d, na) = GA;
        M.block(0, na, d, 1) = -y;
        M(d, i) = 1.0;
        Vec b = Vec::Zero(d + 1);
        b[d] = 1.0;
        auto h = lp_phase1(M, b);
        if (!h.feasible) continue;
        support[static_cast<size_t>(i)] = 1;
        double s = h.x[na];
        if (s > 1e-12) {
            muhat = 0.5 * (muhat + h.x.head(na) / s);
        } else {
            muhat += h.x.head(na);
        }
    }
    std::vector<Eigen::Index> P;
    double dropped = 0.0;
    for (Eigen::Index i = 0; i < na; ++i) {
        if (support[static_cast<size_t>(i)]) {
            P.push_back(i);
        } else {
            dropped += std::exp(loglam[act[static_cast<size_t>(i)]]);
        }
    }
    if (P.empty()) {
        res.value = dropped;
        return res;
    }

    const Eigen::Index np = static_cast<Eigen::Index>(P.size());
    Mat GP(d, np);
    Vec lP(np);
    for (Eigen::Index i = 0; i < np; ++i) {
        GP.col(i) = GA.col(P[static_cast<size_t>(i)]);
        lP[i] = loglam[act[static_cast<size_t>(P[static_cast<size_t>(i)])]];
    }
    Eigen::JacobiSVD<Mat> svd(GP, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > 1e-12 * std::max(1.0, sv[0])) ++k;
    Mat U = svd.matrixU().leftCols(k);
    Mat C = U.transpose() * GP;  // k x np
    Vec yy = U.transpose() * y;

    auto f = [&](const Vec& phi) { return theta_objective(C, lP, yy, phi); };
    auto grad = [&](const Vec& phi) { return theta_gradient(C, lP, yy, phi); };

    // Start at theta = 0, or at the log-ratio point of a positive feasible
    // flux when that point has a larger objective value.
    Vec phi = Vec::Zero(k);
    {
        Vec target(np);
        for (Eigen::Index i = 0; i < np; ++i)
            target[i] = std::log(std::max(muhat[P[static_cast<size_t>(i)]], 1e-300)) - lP[i];
        Vec warm = C.transpose().colPivHouseholderQr().solve(target);
        double fw = f(warm), f0 = f(phi);
        if (warm.allFinite() && std::isfinite(fw) && fw > f0) phi = warm;
    }

    const double gtol = tol * (1.0 + y.norm());
    double fphi = f(phi);
    Vec g = grad(phi);
    int it = 0;
    while (g.norm() > gtol) {
        if (it >= 200) throw NumericError("lagrangian: Newton did not converge in 200 iterations");
        ++it;
        Mat Hn = Mat::Zero(k, k);
        for (Eigen::Index i = 0; i < np; ++i) {
            double e = std::exp(lP[i] + phi.dot(C.col(i)));
            Hn += e * C.col(i) * C.col(i).transpose();
        }
        Vec p = Hn.ldlt().solve(g);
        if (!p.allFinite()) p = g;
        double slope = g.dot(p);
        if (slope <= 0) {
            p = g;
            slope = g.dot(g);
        }
        double alpha = 1.0;
        bool accepted = false;
        // Predicted gain below objective resolution: judge by the gradient.
        if (0.5 * slope <= 1e-12 * (1.0 + std::abs(fphi))) {
            Vec cand = phi + p;
            Vec gc = grad(cand);
            if (gc.allFinite() && gc.norm() < g.norm()) {
                phi = cand;
                fphi = f(cand);
                g = gc;
                continue;
            }
        }
        for (int ls = 0; ls < 80; ++ls) {
            Vec cand = phi + alpha * p;
            if (cand == phi) break;
            double fc = f(cand);
            if (std::isfinite(fc) && fc >= fphi + 1e-4 * alpha * slope) {
                phi = cand;
                fphi = fc;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            // Objective differences are below rounding; accept the full step
            // if it still shrinks the gradient.
            Vec cand = phi + p;
            Vec gc = grad(cand);
            if (gc.allFinite() && gc.norm() < g.norm()) {
                phi = cand;
                fphi = f(cand);
            } else {
                throw NumericError("lagrangian: line search failed (near-boundary ill-conditioning)");
            }
        }
        g = grad(phi);
    }
    res.newton_iters = it;
    res.theta_star = U * phi;
    for (Eigen::Index i = 0; i < np; ++i) {
        Eigen::Index r = act[static_cast<size_t>(P[static_cast<size_t>(i)])];
        res.mu_star[r] = std::exp(loglam[r] + res.theta_star.dot(G.col(r)));
    }
    res.value = fphi + dropped;
    return res;
}

LagrangianResult lagrangian(const ReactionNetwork& net, const Vec& x, const Vec& y, double tol) {
    if (x.size() != net.dim() || y.size() != net.dim())
        throw ValidationError("lagrangian: dimension mismatch");
    if (!(tol > 0)) throw ValidationError("lagrangian: tol must be positive");
    return lagrangian_core(net.gamma_matrix(), log_macro_rates(net, x), y, tol);
}

bool ActionReport::has_flag(const std::string& f) const {
    return std::find(flags.begin(), flags.end(), f) != flags.end();
}

namespace {

void add_flag(ActionReport& rep, const std::string& f) {
    if (!rep.has_flag(f)) rep.flags.push_back(f);
}

void merge_quad_flags(ActionReport& rep, const QuadResult& q) {
    if (q.capped) add_flag(rep, "refinement_capped");
    if (q.growing) add_flag(rep, "divergent");
}

}  // namespace

ActionReport path_action_window(const ReactionNetwork& net, const MacroPath& z, double a, double b,
                                const QuadOptions& q) {
    if (z.dim() != net.dim()) throw ValidationError("path dimension does not match the network");
    ActionReport rep;
    const size_t nseg = z.size() > 1 ? z.size() - 1 : 0;
    rep.per_segment.assign(nseg, 0.0);
    for (size_t i = 0; i < nseg; ++i) {
        double ti = z.time(i), tj = z.time(i + 1);
        double s0 = std::max(ti, a), s1 = std::min(tj, b);
        Vec dz = z.point(i + 1) - z.point(i);
        double h = tj - ti;
        if (h <= 0) {
            if (dz.norm() > 0 && ti >= a && ti <= b) {
                rep.per_segment[i] = kInf;
                add_flag(rep, "discontinuous");
            }
            continue;
        }
        if (!(s1 > s0)) continue;
        Vec zdot = dz / h;
        const Vec& zi = z.point(i);
        auto integrand = [&](double u) {
            Vec x = zi + (u / h) * dz;
            return lagrangian(net, x, zdot).value;
        };
        // Local time u = t - t_i keeps the value independent of time shifts.
        double u0 = s0 == ti ? 0.0 : s0 - ti;
        double u1 = s1 == tj ? h : s1 - ti;
        auto qr = integrate_adaptive(integrand, u0, u1, q);
        merge_quad_flags(rep, qr);
        if (qr.infinite) add_flag(rep, "infeasible");
        rep.per_segment[i] = qr.value;
    }
    rep.value = 0.0;
    for (double v : rep.per_segment) rep.value += v;
    return rep;
}

ActionReport path_action(const ReactionNetwork& net, const MacroPath& z, const QuadOptions& q) {
    return path_action_window(net, z, z.t0(), z.T(), q);
}

ActionReport flux_action(const ReactionNetwork& net, const MacroPath& z, const MacroPath& w,
                         const QuadOptions& q) {
    if (z.dim() != net.dim()) throw ValidationError("path dimension does not match the network");
    if (w.dim() != net.num_reactions())
        throw ValidationError("flux path dimension does not match the number of reactions");
    ActionReport rep;
    const size_t nseg = z.size() > 1 ? z.size() - 1 : 0;
    rep.per_segment.assign(nseg, 0.0);
    const Mat& G = net.gamma_matrix();
    auto times = merged_times(z, w);
    for (size_t k = 0; k + 1 < times.size(); ++k) {
        double s0 = times[k], s1 = times[k + 1];
        if (s0 < z.t0() || s1 > z.T() || !(s1 > s0)) continue;
        double mid = 0.5 * (s0 + s1);
        size_t zi = z.segment(mid), wi = w.segment(mid);
        Vec zdot = z.slope(zi);
        Vec wdot = w.slope(wi);
        if (wdot.minCoeff() < -1e-12) {
            rep.per_segment[zi] = kInf;
            add_flag(rep, "flux_decreasing");
            continue;
        }
        wdot = wdot.cwiseMax(0.0);
        if ((zdot - G * wdot).norm() > 1e-8 * (1.0 + zdot.norm())) {
            rep.per_segment[zi] = kInf;
            add_flag(rep, "constraint_violated");
            continue;
        }
        double h = z.time(zi + 1) - z.time(zi);
        Vec dz = z.point(zi + 1) - z.point(zi);
        const Vec& zp = z.point(zi);
        double tz = z.time(zi);
        auto integrand = [&](double u) {
            Vec x = zp + (u / h) * dz;
            Vec l = log_macro_rates(net, x);
            double s = 0.0;
            for (Eigen::Index r = 0; r < l.size(); ++r) s += entropy_term(wdot[r], l[r]);
            return s;
        };
        auto qr = integrate_adaptive(integrand, s0 - tz, s1 - tz, q);
        merge_quad_flags(rep, qr);
        if (qr.infinite) add_flag(rep, "infeasible");
        rep.per_segment[zi] += qr.value;
    }
    rep.value = 0.0;
    for (double v : rep.per_segment) rep.value += v;
    return rep;
}

MacroPath induced_flux(const ReactionNetwork& net, const MacroPath& z, int pieces, int quad_pts) {
    if (pieces < 1) throw ValidationError("induced_flux: pieces must be positive");
    const int R = net.num_reactions();
    std::vector<double> t{z.t0()};
    std::vector<Vec> w{Vec::Zero(R)};
    const auto& rule = gauss_legendre(quad_pts);
    for (size_t i = 0; i + 1 < z.size(); ++i) {
        double ti = z.time(i), h = z.time(i + 1) - ti;
        if (h <= 0) continue;
        Vec dz = z.point(i + 1) - z.point(i);
        Vec zdot = dz / h;
        for (int p = 0; p < pieces; ++p) {
            double u0 = h * p / pieces, u1 = h * (p + 1) / pieces;
            double half = 0.5 * (u1 - u0), mid = 0.5 * (u0 + u1);
            Vec avg = Vec::Zero(R);
            for (size_t q = 0; q < rule.nodes.size(); ++q) {
                double u = mid + half * rule.nodes[q];
                auto lr = lagrangian(net, z.point(i) + (u / h) * dz, zdot);
                if (!lr.feasible) throw NumericError("induced_flux: path is infeasible");
                avg += 0.5 * rule.weights[q] * lr.mu_star;
            }
            t.push_back(p + 1 == pieces ? z.time(i + 1) : ti + u1);
            w.push_back(w.back() + (u1 - u0) * avg);
        }
    }
    return MacroPath(std::move(t), std::move(w));
}

double grid_entropy_min(const Mat& G, const Vec& lam, const Vec& y, int grid_n) {
    const Eigen::Index R = G.cols();
    if (R > 3) throw ValidationError("grid_entropy_min supports at most 3 reactions");
    if (grid_n < 4) throw ValidationError("grid_entropy_min needs grid_n >= 4");
    std::vector<Eigen::Index> act;
    for (Eigen::Index r = 0; r < R; ++r)
        if (lam[r] > 0 && !zero_column(G, r)) act.push_back(r);
    const Eigen::Index na = static_cast<Eigen::Index>(act.size());
    Mat GA(G.rows(), na);
    Vec lA(na);
    for (Eigen::Index i = 0; i < na; ++i) {
        GA.col(i) = G.col(act[static_cast<size_t>(i)]);
        lA[i] = lam[act[static_cast<size_t>(i)]];
    }
    auto lp = lp_phase1(GA, y);
    if (!lp.feasible) return kInf;
    Vec mu0 = lp.x;
    // Zero-rate reactions must carry zero flux; zero jumps take mu = lam at no cost.
    auto H = [&](const Vec& mu) { return entropy(mu, lA); };

    Eigen::FullPivLU<Mat> lu(GA);
    Mat N = lu.kernel();
    if (N.cols() == 1 && N.norm() == 0) N.resize(na, 0);
    if (N.cols() > 0) N = Eigen::HouseholderQR<Mat>(N).householderQ() * Mat::Identity(na, N.cols());
    const Eigen::Index k = N.cols();
    if (k == 0) return H(mu0);

    // Any mu with H(mu) <= H(mu0) has each term below H(mu0).
    double H0 = H(mu0);
    double bound = 0.0;
    for (Eigen::Index i = 0; i < na; ++i) {
        double lo = lA[i], hi = std::max(2.0 * lA[i], 1.0);
        auto term = [&](double m) { return lA[i] - m + m * std::log(m / lA[i]); };
        while (term(hi) <= H0) hi *= 2.0;
        for (int it = 0; it < 200; ++it) {
            double m = 0.5 * (lo + hi);
            (term(m) <= H0 ? lo : hi) = m;
        }
        bound += hi * hi;
    }
    double width = std::sqrt(bound) + mu0.norm();

    const int per_dim = std::max(5, static_cast<int>(std::floor(std::pow(grid_n, 1.0 / k) + 1e-9)));
    Vec center = Vec::Zero(k);
    double best = H0;
    Vec best_s = Vec::Zero(k);
    for (int level = 0; level < 200 && width > 1e-14; ++level) {
        const double step = 2.0 * width / (per_dim - 1);
        std::vector<int> idx(static_cast<size_t>(k), 0);
        for (;;) {
            Vec s(k);
            for (Eigen::Index j = 0; j < k; ++j) s[j] = center[j] - width + step * idx[static_cast<size_t>(j)];
            Vec mu = mu0 + N * s;
            if (mu.minCoeff() >= -1e-14) {
                double v = H(mu.cwiseMax(0.0));
                if (v < best) {
                    best = v;
                    best_s = s;
                }
            }
            Eigen::Index j = 0;
            while (j < k && ++idx[static_cast<size_t>(j)] == per_dim) idx[static_cast<size_t>(j++)] = 0;
            if (j == k) break;
        }
        center = best_s;
        width = 4.0 * step;
    }
    return best;
}

DualityReport duality_check(const ReactionNetwork& net, const Vec& x, const Vec& y, int grid_n) {
    DualityReport rep;
    rep.lagrangian = lagrangian(net, x, y).value;
    rep.grid_min = grid_entropy_min(net.gamma_matrix(), macro_rates(net, x), y, grid_n);
    if (std::isinf(rep.lagrangian) && std::isinf(rep.grid_min)) {
        rep.gap = 0.0;
    } else {
        rep.gap = std::abs(rep.lagrangian - rep.grid_min);
    }
    return rep;
}

double potential_lower_bound(const ReactionNetwork& net, const MacroPath& y, const Vec& x0,
                             const Vec& n, double kappa, double eps) {
    if (!(eps > 0)) throw ValidationError("potential_lower_bound: eps must be positive");
    if (y.dim() != net.dim() || x0.size() != net.dim() || n.size() != net.dim())
        throw ValidationError("potential_lower_bound: dimension mismatch");
    auto height = [&](const Vec& p) { return n.dot(p - x0); };
    // First time the height reaches eps.
    double t_eps = kInf;
    for (size_t i = 0; i < y.size(); ++i) {
        double hi = height(y.point(i));
        if (hi >= eps) {
            if (i == 0) {
                t_eps = y.time(0);
            } else {
                double hp = height(y.point(i - 1));
                double frac = (eps - hp) / (hi - hp);
                t_eps = y.time(i - 1) + frac * (y.time(i) - y.time(i - 1));
            }
            break;
        }
    }
    const double T = y.T();
    if (!(t_eps < T)) return 0.0;
    auto Phi = [&](double t) {
        double h = height(y(t));
        if (!(h > 0)) throw ValidationError("potential_lower_bound: path leaves the open half-space");
        return std::log(h);
    };
    const Mat& G = net.gamma_matrix();
    auto integrand = [&](double t) {
        Vec p = y(t);
        double h = height(p);
        if (!(h > 0)) throw ValidationError("potential_lower_bound: path leaves the open half-space");
        Vec l = log_macro_rates(net, p);
        double s = 0.0;
        for (Eigen::Index r = 0; r < l.size(); ++r) {
            if (l[r] == -kInf) continue;
            s += std::exp(l[r] + kappa * G.col(r).dot(n) / h);
        }
        return s;
    };
    double integral = 0.0;
    std::vector<double> cuts{t_eps};
    for (size_t i = 0; i < y.size(); ++i)
        if (y.time(i) > t_eps && y.time(i) < T) cuts.push_back(y.time(i));
    cuts.push_back(T);
    for (size_t i = 0; i + 1 < cuts.size(); ++i)
        integral += integrate_adaptive(integrand, cuts[i], cuts[i + 1]).value;
    return kappa * (Phi(T) - Phi(t_eps)) - integral;
}

}  // namespace jumpldp
