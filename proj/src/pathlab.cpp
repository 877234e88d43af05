#include "jumpldp/pathlab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jumpldp/errors.hpp"
#include "jumpldp/format.hpp"
#include "jumpldp/lp.hpp"

namespace jumpldp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInsideTol = 1e-9;
constexpr int kBases[] = {2, 3, 5};

std::vector<double> to_std(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    if (n < 2) return 0.0;
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0 ? sxy / sxx : 0.0;
}

double safe_log_rate(const ReactionNetwork& net, int r, const Vec& x) {
    try {
        return log_macro_rate(net, r, x);
    } catch (const DomainError&) {
        return -kInf;
    }
}

// Extremum of f over nested low-discrepancy point sets of doubling size.
SampledExtremum sampled_extremum(const std::function<std::vector<Vec>(int)>& points,
                                 const std::function<double(const Vec&)>& f, bool minimize) {
    SampledExtremum out;
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (int n = 16; n <= 16384; n *= 2) {
        auto pts = points(n);
        if (pts.empty()) continue;
        double ext = minimize ? kInf : -kInf;
        for (const auto& p : pts) {
            double v = f(p);
            ext = minimize ? std::min(ext, v) : std::max(ext, v);
        }
        out.value = ext;
        out.samples = static_cast<int>(pts.size());
        if (!std::isnan(prev)) {
            if (std::isinf(ext) && ext == prev) break;
            if (std::isfinite(ext) && std::isfinite(prev) && std::abs(ext - prev) <= 0.01 * std::abs(prev)) break;
        }
        prev = ext;
        if (static_cast<int>(pts.size()) < n / 2) break;  // sampler exhausted
    }
    if (out.samples == 0) throw ValidationError("no sample points fall in the requested set");
    return out;
}

int containing_region(const Cover& cover, const Vec& x) {
    for (const auto& r : cover.regions)
        if (r.contains(x, kInsideTol)) return r.id;
    return -1;
}

}  // namespace

double modulus(const MacroPath& z, double h) {
    if (h <= 0) return 0.0;
    double best = 0.0;
    const size_t m = z.size();
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = i + 1; j < m && z.time(j) - z.time(i) <= h; ++j)
            best = std::max(best, (z.point(j) - z.point(i)).norm());
        double ti = z.time(i);
        if (ti + h <= z.T()) best = std::max(best, (z(ti + h) - z.point(i)).norm());
        if (ti - h >= z.t0()) best = std::max(best, (z(ti - h) - z.point(i)).norm());
    }
    return best;
}

double modulus_inverse(const MacroPath& z, double delta) {
    double L = z.T() - z.t0();
    if (modulus(z, L) <= delta) return L;
    double lo = 0.0, hi = L;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * L; ++it) {
        double mid = 0.5 * (lo + hi);
        (modulus(z, mid) <= delta ? lo : hi) = mid;
    }
    return lo;
}

ModulusTable modulus_of_continuity(const MacroPath& z, int resolution) {
    if (resolution < 1) throw ValidationError("resolution must be positive");
    ModulusTable t;
    double L = z.T() - z.t0();
    for (int k = 1; k <= resolution; ++k) {
        double h = L * k / resolution;
        t.h.push_back(h);
        t.omega.push_back(modulus(z, h));
    }
    return t;
}

namespace {

// Largest t >= s with z([s, t]) inside region r.
double path_exit_time(const MacroPath& z, const CoverRegion& r, double s) {
    const double T = z.T();
    size_t i = z.segment(s);
    for (; i + 1 < z.size(); ++i) {
        double ta = std::max(s, z.time(i)), tb = z.time(i + 1);
        if (tb < s) continue;
        if (tb <= ta) {
            if (!r.contains(z.point(i + 1), kInsideTol)) return ta;
            continue;
        }
        Vec x = z(ta);
        Vec d = z.slope(i);
        double e = r.exit_time(x, d, tb - ta, kInsideTol);
        if (e < tb - ta) return ta + e;
    }
    return T;
}

}  // namespace

Segmentation segment_path(const MacroPath& z, const Cover& cover) {
    if (z.dim() != cover.dim()) throw ValidationError("path dimension does not match the cover");
    Segmentation seg;
    double s = z.t0();
    const double T = z.T();
    for (;;) {
        Vec x = z(s);
        int best = -1;
        double best_exit = -kInf;
        for (const auto& r : cover.regions) {
            if (!r.contains(x, kInsideTol)) continue;
            double e = path_exit_time(z, r, s);
            if (e > best_exit) {
                best_exit = e;
                best = r.id;
            }
        }
        if (best < 0) throw ValidationError("path point at t = " + fmt_double(s) + " is outside every region");
        seg.tau.push_back(s);
        seg.regions.push_back(best);
        if (best_exit >= T) break;
        if (!(best_exit > s)) throw ValidationError("path leaves the covered set at t = " + fmt_double(s));
        s = best_exit;
    }
    seg.tau.push_back(T);
    return seg;
}

ShiftPlan make_shift_plan(const MacroPath& z, const Cover& cover, double delta) {
    if (!(delta > 0)) throw ValidationError("delta must be positive");
    auto seg = segment_path(z, cover);
    ShiftPlan p;
    p.delta = delta;
    p.J = static_cast<int>(seg.regions.size());
    p.transition_times = seg.tau;
    p.region_ids = seg.regions;
    const double kpp = cover.kappa_dblprime;
    p.kappa_minus = cover.kappa_minus();
    p.beta = 3.0 / kpp;
    p.xi = std::min({1.0, std::pow(kpp / 3.0, p.J + 1) / 3.0, cover.eps});
    p.t_delta = p.xi * std::min(delta, modulus_inverse(z, delta)) / 6.0;
    p.cumulative.push_back(0.0);
    double pw = 1.0;
    for (int k = 0; k < p.J; ++k) {
        p.cumulative.push_back(p.cumulative.back() + pw * p.t_delta);
        pw *= p.beta;
    }
    p.delta_prime = p.kappa_minus * p.t_delta / 3.0;
    p.delta_dblprime = p.t_delta * kpp;
    return p;
}

ShiftedPath build_shifted_path(const MacroPath& z, const Cover& cover, double delta) {
    ShiftPlan p = make_shift_plan(z, cover, delta);
    const auto& tau = p.transition_times;
    const double td = p.t_delta;
    auto w_of = [&](int k) { return cover.regions[static_cast<size_t>(p.region_ids[static_cast<size_t>(k)])].w; };
    std::vector<double> t;
    std::vector<Vec> x;
    auto push = [&](double time, const Vec& pt) {
        t.push_back(time);
        x.push_back(pt);
    };
    const Vec x0 = z.point(0);
    push(z.t0(), x0);
    Vec offset = td * w_of(0);
    push(z.t0() + td, x0 + offset);
    for (int k = 0; k < p.J; ++k) {
        const double shift_end = p.cumulative[static_cast<size_t>(k + 1)];
        if (k > 0) {
            offset += (shift_end - p.cumulative[static_cast<size_t>(k)]) * w_of(k);
            push(tau[static_cast<size_t>(k)] + shift_end, z(tau[static_cast<size_t>(k)]) + offset);
        }
        for (size_t i = 0; i < z.size(); ++i)
            if (z.time(i) > tau[static_cast<size_t>(k)] && z.time(i) < tau[static_cast<size_t>(k + 1)])
                push(z.time(i) + shift_end, z.point(i) + offset);
        push(tau[static_cast<size_t>(k + 1)] + shift_end, z(tau[static_cast<size_t>(k + 1)]) + offset);
    }
    for (size_t i = 0; i < t.size(); ++i)
        if (containing_region(cover, x[i]) < 0)
            throw NumericError("shifted path leaves every region at t = " + fmt_double(t[i]) + "; reduce delta");
    MacroPath full(std::move(t), std::move(x));
    ShiftedPath out;
    out.plan = p;
    if (full.T() > z.T()) {
        out.plan.truncated = true;
        out.path = full.restrict(z.t0(), z.T());
    } else {
        out.path = full;
    }
    return out;
}

nlohmann::json BreakupReport::to_json() const {
    nlohmann::json j;
    j["sup_distance"] = sup_distance;
    j["sup_ok"] = sup_ok;
    j["min_clearance"] = min_clearance;
    j["required_clearance"] = required_clearance;
    j["clearance_ok"] = clearance_ok;
    j["first_violation_time"] = first_violation_time;
    j["decomposition_margin"] = decomposition_margin;
    j["decomposition_ok"] = decomposition_ok;
    j["arithmetic_ok"] = arithmetic_ok;
    j["pass"] = all_ok();
    return j;
}

BreakupReport verify_breakup(const MacroPath& z, const ShiftedPath& s, const Cover& cover) {
    const auto& p = s.plan;
    const auto& zz = s.path;
    BreakupReport rep;
    for (double t : merged_times(z, zz))
        rep.sup_distance = std::max(rep.sup_distance, (z(t) - zz(t)).norm());
    rep.sup_ok = rep.sup_distance < 2.0 * p.delta / 3.0;

    rep.required_clearance = p.kappa_minus * p.t_delta;
    rep.min_clearance = kInf;
    std::vector<double> checks{p.t_delta};
    for (size_t i = 0; i < zz.size(); ++i)
        if (zz.time(i) >= p.t_delta) checks.push_back(zz.time(i));
    checks.push_back(zz.T());
    std::sort(checks.begin(), checks.end());
    for (double t : checks) {
        if (t > zz.T()) continue;
        double c = cover.clearance(zz(t));
        rep.min_clearance = std::min(rep.min_clearance, c);
        if (c < rep.required_clearance * (1 - 1e-12) && rep.first_violation_time < 0) rep.first_violation_time = t;
    }
    rep.clearance_ok = rep.first_violation_time < 0;

    // Offsets accumulated before each shift, from the untruncated recursion.
    const double kpp = cover.kappa_dblprime;
    rep.decomposition_ok = true;
    Vec offset = p.t_delta * cover.regions[static_cast<size_t>(p.region_ids[0])].w;
    for (int k = 1; k < p.J; ++k) {
        double len = p.cumulative[static_cast<size_t>(k + 1)] - p.cumulative[static_cast<size_t>(k)];
        double worst = (offset.norm() + p.t_delta * kpp / 2.0) / len;
        rep.decomposition_margin.push_back(kpp - worst);
        if (!(worst < kpp)) rep.decomposition_ok = false;
        offset += len * cover.regions[static_cast<size_t>(p.region_ids[static_cast<size_t>(k)])].w;
    }

    rep.arithmetic_ok = true;
    double pw = 1.0;
    for (int k = 0; k < p.J; ++k) {
        double diff = p.cumulative[static_cast<size_t>(k + 1)] - p.cumulative[static_cast<size_t>(k)];
        if (std::abs(diff - pw * p.t_delta) > 1e-12 * pw * p.t_delta) rep.arithmetic_ok = false;
        double bound = (kpp / 2.0) * std::pow(3.0 / kpp, k + 1) * p.t_delta;
        if (p.cumulative[static_cast<size_t>(k + 1)] > bound * (1 + 1e-12)) rep.arithmetic_ok = false;
        pw *= p.beta;
    }
    return rep;
}

ActionReport escape_cost(const ReactionNetwork& net, const Vec& x0, const Vec& w, double t_delta,
                         const QuadOptions& q) {
    if (!(t_delta > 0)) throw ValidationError("t_delta must be positive");
    MacroPath seg({0.0, t_delta}, {x0, x0 + t_delta * w});
    return path_action(net, seg, q);
}

nlohmann::json DecayReport::to_json() const {
    nlohmann::json j;
    j["reaction"] = reaction;
    j["rho"] = rho;
    j["inf_log"] = inf_log;
    j["samples"] = samples;
    j["exponent"] = exponent;
    j["minus_infinity"] = minus_infinity;
    j["conditions"] = nlohmann::json::array();
    for (size_t a = 0; a < alphas.size(); ++a)
        j["conditions"].push_back({{"alpha", alphas[a]}, {"holds", static_cast<bool>(holds[a])}, {"scaled", scaled[a]}});
    return j;
}

DecayReport decay_exponent(const ReactionNetwork& net, int r, const CoverRegion& region,
                           const std::vector<double>& rho_ladder, const std::vector<double>& alphas) {
    if (r < 0 || r >= net.num_reactions()) throw ValidationError("reaction index out of range");
    if (!region.is_boundary()) throw ValidationError("decay_exponent needs a boundary region");
    if (rho_ladder.size() < 2) throw ValidationError("rho ladder needs at least two rungs");
    DecayReport rep;
    rep.reaction = r;
    rep.alphas = alphas;
    for (double rho : rho_ladder) {
        if (!(rho > 0)) throw ValidationError("rho must be positive");
        auto ext = sampled_extremum([&](int n) { return sample_near_boundary(region, rho, 2 * rho, n); },
                                    [&](const Vec& x) { return safe_log_rate(net, r, x); }, true);
        rep.rho.push_back(rho);
        rep.inf_log.push_back(ext.value);
        rep.samples.push_back(ext.samples);
        if (ext.value == -kInf) rep.minus_infinity = true;
    }
    std::vector<double> lx, ly;
    bool all_zero = true;
    for (size_t i = 0; i < rep.rho.size(); ++i) {
        if (rep.inf_log[i] == 0.0 || std::isinf(rep.inf_log[i])) continue;
        all_zero = false;
        lx.push_back(std::log(rep.rho[i]));
        ly.push_back(std::log(std::abs(rep.inf_log[i])));
    }
    double slope = ls_slope(lx, ly);
    rep.exponent = std::max(0.0, -slope);
    for (double a : alphas) {
        std::vector<double> sc;
        for (size_t i = 0; i < rep.rho.size(); ++i) sc.push_back(std::pow(rep.rho[i], a) * rep.inf_log[i]);
        rep.scaled.push_back(sc);
        bool holds = !rep.minus_infinity && (all_zero || a + slope > 0);
        rep.holds.push_back(holds);
    }
    return rep;
}

std::vector<int> FastReport::fast_set() const {
    std::vector<int> out;
    for (const auto& e : entries)
        if (e.fast) out.push_back(e.reaction);
    return out;
}

nlohmann::json FastReport::to_json() const {
    nlohmann::json j;
    j["rho"] = rho;
    j["fast"] = fast_set();
    j["reactions"] = nlohmann::json::array();
    for (const auto& e : entries)
        j["reactions"].push_back({{"reaction", e.reaction}, {"values", e.values}, {"limit", e.limit},
                                  {"fast", e.fast}, {"vanishes", e.vanishes}});
    return j;
}

FastReport fast_set(const ReactionNetwork& net, const CoverRegion& region, const std::vector<double>& rho_ladder) {
    if (!region.is_boundary()) throw ValidationError("fast_set needs a boundary region");
    if (rho_ladder.size() < 3) throw ValidationError("rho ladder needs at least three rungs");
    FastReport rep;
    rep.rho = rho_ladder;
    for (int r = 0; r < net.num_reactions(); ++r) {
        FastEntry e;
        e.reaction = r;
        for (double rho : rho_ladder) {
            auto ext = sampled_extremum([&](int n) { return sample_near_boundary(region, 0.0, rho, n); },
                                        [&](const Vec& x) { return safe_log_rate(net, r, x); }, false);
            e.values.push_back(ext.value == -kInf ? -kInf : rho * ext.value);
        }
        e.limit = e.values.back();
        size_t n = e.values.size();
        if (e.values[n - 1] == -kInf && e.values[n - 2] == -kInf && e.values[n - 3] == -kInf) {
            e.vanishes = true;
            e.fast = true;
        } else {
            double lo = kInf, hi = -kInf, mean = 0;
            bool neg = true;
            for (size_t k = n - 3; k < n; ++k) {
                if (!(e.values[k] < -1e-3) || std::isinf(e.values[k])) neg = false;
                lo = std::min(lo, e.values[k]);
                hi = std::max(hi, e.values[k]);
                mean += e.values[k] / 3.0;
            }
            e.fast = neg && (hi - lo) <= 0.1 * std::abs(mean);
        }
        rep.entries.push_back(e);
    }
    return rep;
}

nlohmann::json ConeReport::to_json() const {
    nlohmann::json j;
    j["obstructed"] = obstructed;
    j["active_facets"] = active_facets;
    std::vector<bool> fo(facet_obstructed.begin(), facet_obstructed.end());
    j["facet_obstructed"] = fo;
    j["slow"] = slow;
    j["witness"] = to_std(witness);
    return j;
}

ConeReport cone_obstruction(const ReactionNetwork& net, const CoverRegion& region, const Vec& x,
                            const std::vector<int>& fast) {
    if (x.size() != net.dim()) throw ValidationError("point dimension does not match the network");
    ConeReport rep;
    std::vector<Vec> normals;
    for (int i : region.boundary) {
        const auto& h = region.halfspaces[static_cast<size_t>(i)];
        if (std::abs(h.b - h.a.dot(x)) / h.a.norm() <= 1e-9) {
            rep.active_facets.push_back(i);
            normals.push_back(-h.a / h.a.norm());
        }
    }
    if (normals.empty()) throw ValidationError("point is not on a boundary facet of the region");
    for (int r = 0; r < net.num_reactions(); ++r) {
        if (std::find(fast.begin(), fast.end(), r) != fast.end()) continue;
        if (net.gamma(r).norm() == 0) continue;
        rep.slow.push_back(r);
    }
    const Eigen::Index ns = static_cast<Eigen::Index>(rep.slow.size());
    auto solve = [&](const std::vector<size_t>& facets, Vec* mu) {
        if (ns == 0) return false;
        const Eigen::Index nf = static_cast<Eigen::Index>(facets.size());
        Mat A = Mat::Zero(nf + 1, ns + nf);
        Vec b = Vec::Zero(nf + 1);
        for (Eigen::Index f = 0; f < nf; ++f) {
            for (Eigen::Index k = 0; k < ns; ++k)
                A(f, k) = normals[facets[static_cast<size_t>(f)]].dot(net.gamma(rep.slow[static_cast<size_t>(k)]));
            A(f, ns + f) = -1.0;
        }
        for (Eigen::Index k = 0; k < ns; ++k) A(nf, k) = 1.0;
        b[nf] = 1.0;
        auto lp = lp_phase1(A, b);
        if (lp.feasible && mu) *mu = lp.x.head(ns);
        return lp.feasible;
    };
    std::vector<size_t> all;
    for (size_t f = 0; f < normals.size(); ++f) {
        all.push_back(f);
        rep.facet_obstructed.push_back(!solve({f}, nullptr));
    }
    Vec mu;
    rep.obstructed = !solve(all, &mu);
    if (!rep.obstructed) rep.witness = mu;
    return rep;
}

nlohmann::json EscapeAudit::to_json() const {
    nlohmann::json j;
    j["b"] = {{"v", v}, {"values", b_values}, {"slope", b_slope}, {"pass", b_pass}};
    j["c"] = {{"rho", rho}, {"values", c_values}, {"pass", c_pass}};
    j["d"] = {{"checked", d_checked}, {"violations", d_violations}, {"pass", d_pass}};
    return j;
}

EscapeAudit escape_sequence_audit(const ReactionNetwork& net, const Cover& cover, int region,
                                  const LatticeStart& x0_v, const std::vector<std::int64_t>& v_ladder,
                                  const std::vector<double>& rho_ladder) {
    if (region < 0 || region >= static_cast<int>(cover.regions.size())) throw ValidationError("region index out of range");
    const auto& reg = cover.regions[static_cast<size_t>(region)];
    if (reg.escape.empty()) throw ValidationError("region has no escape sequence");
    if (v_ladder.empty() || rho_ladder.empty()) throw ValidationError("ladders must be nonempty");
    EscapeAudit rep;
    const int d = net.dim();

    // (b) rates along the prefix states.
    std::vector<Vec> z0;  // prefix states at the largest v
    std::vector<double> lv, lb;
    bool b_finite = true, b_zero = true;
    for (auto v : v_ladder) {
        Counts n = x0_v(v);
        if (static_cast<int>(n.size()) != d) throw ValidationError("start state dimension mismatch");
        double worst = 0.0;
        std::vector<Vec> pref;
        for (int r : reg.escape) {
            Vec x(d);
            for (int i = 0; i < d; ++i) x[i] = static_cast<double>(n[static_cast<size_t>(i)]) / v;
            pref.push_back(x);
            double lr = log_micro_rate(net, r, n.data(), v);
            worst = std::max(worst, std::isfinite(lr) ? std::abs(lr) / v : kInf);
            const auto& g = net.reactions()[static_cast<size_t>(r)].gamma;
            for (int i = 0; i < d; ++i) n[static_cast<size_t>(i)] += g[static_cast<size_t>(i)];
        }
        if (v == v_ladder.back()) z0 = pref;
        rep.v.push_back(v);
        rep.b_values.push_back(worst);
        if (std::isinf(worst)) b_finite = false;
        if (worst != 0.0) b_zero = false;
        if (worst > 0 && std::isfinite(worst)) {
            lv.push_back(std::log(static_cast<double>(v)));
            lb.push_back(std::log(worst));
        }
    }
    rep.b_slope = ls_slope(lv, lb);
    rep.b_pass = b_finite && (b_zero || (lv.size() >= 2 && rep.b_slope < -0.5));

    // (c) log-integrals along w from sampled starting points.
    std::vector<Vec> starts = sample_region(reg, 64);
    if (reg.is_boundary()) {
        auto on_facet = sample_near_boundary(reg, 0.0, 1e-300, 16);
        starts.insert(starts.end(), on_facet.begin(), on_facet.end());
    }
    starts.insert(starts.end(), z0.begin(), z0.end());
    std::vector<double> lr, lc;
    bool c_finite = true, c_zero = true;
    for (double rho : rho_ladder) {
        double sup = 0.0;
        for (const auto& x : starts) {
            for (int r : reg.escape) {
                auto qr = integrate_adaptive(
                    [&](double s) {
                        double l = safe_log_rate(net, r, x + s * reg.w);
                        return std::isinf(l) ? kInf : std::abs(l);
                    },
                    0.0, rho);
                double val = (qr.infinite || qr.growing) ? kInf : qr.value;
                sup = std::max(sup, val);
            }
        }
        rep.rho.push_back(rho);
        rep.c_values.push_back(sup);
        if (std::isinf(sup)) c_finite = false;
        if (sup != 0.0) c_zero = false;
        if (sup > 0 && std::isfinite(sup)) {
            lr.push_back(std::log(rho));
            lc.push_back(std::log(sup));
        }
    }
    rep.c_pass = c_finite && (c_zero || (lr.size() >= 2 && ls_slope(lr, lc) > 0.5));

    // (d) monotonicity of small rates along perturbed escape directions.
    std::vector<Vec> base = sample_region(reg, 32);
    base.insert(base.end(), z0.begin(), z0.end());
    const int ndir = 8, nt = 16;
    for (const auto& x : base) {
        for (int r = 0; r < net.num_reactions(); ++r) {
            double l0 = safe_log_rate(net, r, x);
            if (!(std::exp(l0) < cover.eps_dblprime)) continue;
            for (int k = 0; k < ndir; ++k) {
                Vec y(d);
                for (int i = 0; i < d; ++i) y[i] = 2.0 * radical_inverse(static_cast<std::uint64_t>(k + 1), kBases[i]) - 1.0;
                if (y.norm() > 0) y *= 0.99 * cover.kappa_dblprime * radical_inverse(static_cast<std::uint64_t>(k + 1), 7) / y.norm();
                Vec dir = reg.w + y;
                ++rep.d_checked;
                double prev = l0;
                for (int m = 1; m <= nt; ++m) {
                    Vec p = x + (cover.eps * m / (nt + 1)) * dir;
                    if (p.minCoeff() < 0) break;
                    double l = safe_log_rate(net, r, p);
                    if (l < prev - 1e-12 * (1 + std::abs(prev)) && !(std::isinf(l) && std::isinf(prev))) {
                        ++rep.d_violations;
                        break;
                    }
                    prev = l;
                }
            }
        }
    }
    rep.d_pass = rep.d_violations == 0;
    return rep;
}

Lemma32Terms lemma32_bound(const ReactionNetwork& net, const Cover& cover, int region, const Vec& x0,
                           double t_delta, double aleph, const QuadOptions& q) {
    if (region < 0 || region >= static_cast<int>(cover.regions.size())) throw ValidationError("region index out of range");
    const auto& reg = cover.regions[static_cast<size_t>(region)];
    if (reg.escape.empty() || !(reg.alpha > 0)) throw ValidationError("region has no escape sequence");
    if (!(t_delta > 0)) throw ValidationError("t_delta must be positive");
    if (!(aleph > 0)) throw ValidationError("aleph must be positive");
    const int d = net.dim();
    const double n = static_cast<double>(reg.escape.size()), alpha = reg.alpha;

    double lip = 0.0;
    for (const auto& x : sample_region(reg, 256))
        for (int r = 0; r < net.num_reactions(); ++r) lip = std::max(lip, macro_rate_gradient(net, r, x).norm());
    Lemma32Terms out;
    out.t_delta = t_delta;
    out.t_bar = std::min(alpha / n, lip > 0 ? cover.eps_dblprime / lip : kInf);
    if (!(t_delta < out.t_bar))
        throw ValidationError("t_delta = " + fmt_double(t_delta) + " violates the precondition t_delta < " + fmt_double(out.t_bar));

    double sup_total = 0.0;
    auto total_rate = [&](const Vec& x) {
        double s = 0.0;
        for (int r = 0; r < net.num_reactions(); ++r) s += std::exp(safe_log_rate(net, r, x));
        return s;
    };
    sup_total = total_rate(x0);
    for (std::uint64_t i = 1; i <= 512; ++i) {
        Vec y(d);
        for (int k = 0; k < d; ++k) y[k] = 2.0 * radical_inverse(i, kBases[k]) - 1.0;
        if (y.norm() > 1) continue;
        Vec p = x0 + 2 * t_delta * y;
        if (p.minCoeff() < 0) continue;
        sup_total = std::max(sup_total, total_rate(p));
    }
    out.lambda_bar = std::max(1.0, sup_total);
    out.entropy_term = -t_delta * ((n / alpha) * std::log(n / (alpha * out.lambda_bar)) - n / alpha + out.lambda_bar);
    out.log_integral = 0.0;
    for (int r : reg.escape) {
        auto qr = integrate_adaptive([&](double s) { return -safe_log_rate(net, r, x0 + s * alpha * reg.w); }, 0.0,
                                     t_delta / alpha, q);
        if (qr.infinite || qr.growing) {
            out.log_integral = -kInf;
            break;
        }
        out.log_integral -= qr.value;
    }
    out.aleph_term = t_delta * (n / alpha) * std::log(aleph);
    out.value = out.entropy_term + out.log_integral + out.aleph_term;
    return out;
}

}  // namespace jumpldp
