#include "jumpldp/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include "jumpldp/errors.hpp"

namespace jumpldp {

void parallel_for(int n, int jobs, const std::function<void(int)>& f) {
    if (n <= 0) return;
    if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    jobs = std::min(jobs, n);
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) {
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform on (0, 1], never 0.
double unit_open(std::mt19937_64& g) { return (static_cast<double>(g() >> 11) + 1.0) * 0x1.0p-53; }

void check_start(const ReactionNetwork& net, std::int64_t v, const Counts& x0) {
    if (v < 1) throw ValidationError("v must be a positive integer");
    if (static_cast<int>(x0.size()) != net.dim()) throw ValidationError("x0 dimension does not match the network");
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t base, std::uint64_t trial) {
    return splitmix64(splitmix64(base) ^ splitmix64(trial + 0x632be59bd9b4e019ULL));
}

std::int64_t ssa_run(const ReactionNetwork& net, std::int64_t v, const Counts& x0, double T,
                     std::uint64_t stream_seed, const JumpVisitor& visit, std::int64_t jump_cap) {
    check_start(net, v, x0);
    if (!(T >= 0)) throw ValidationError("T must be nonnegative");
    std::mt19937_64 gen(stream_seed);
    const int R = net.num_reactions(), d = net.dim();
    Counts n = x0;
    std::vector<double> a(static_cast<size_t>(R));
    double t = 0.0;
    std::int64_t jumps = 0;
    for (;;) {
        double a0 = 0.0;
        for (int r = 0; r < R; ++r) {
            double rate = micro_rate(net, r, n.data(), v);
            if (!std::isfinite(rate)) throw NumericError("total jump rate is not finite");
            a[static_cast<size_t>(r)] = rate;
            a0 += rate;
        }
        if (a0 <= 0) break;
        a0 *= static_cast<double>(v);
        t += -std::log(unit_open(gen)) / a0;
        if (t > T) break;
        double u = unit_open(gen) * a0 / static_cast<double>(v);
        int pick = R - 1;
        double acc = 0.0;
        for (int r = 0; r < R; ++r) {
            acc += a[static_cast<size_t>(r)];
            if (u <= acc && a[static_cast<size_t>(r)] > 0) {
                pick = r;
                break;
            }
        }
        while (a[static_cast<size_t>(pick)] <= 0) --pick;
        const auto& g = net.reactions()[static_cast<size_t>(pick)].gamma;
        for (int i = 0; i < d; ++i) n[static_cast<size_t>(i)] += g[static_cast<size_t>(i)];
        if (++jumps > jump_cap) throw NumericError("jump cap exceeded (possible explosion)");
        if (!visit(t, pick, n)) break;
    }
    return jumps;
}

Counts JumpPath::counts_at(const ReactionNetwork& net, double t) const {
    Counts n = x0;
    for (size_t k = 0; k < jump_times.size() && jump_times[k] <= t; ++k) {
        const auto& g = net.reactions()[static_cast<size_t>(jump_reactions[k])].gamma;
        for (size_t i = 0; i < n.size(); ++i) n[i] += g[i];
    }
    return n;
}

Vec JumpPath::state_at(const ReactionNetwork& net, double t) const {
    Counts n = counts_at(net, t);
    Vec x(static_cast<Eigen::Index>(n.size()));
    for (size_t i = 0; i < n.size(); ++i) x[static_cast<Eigen::Index>(i)] = static_cast<double>(n[i]) / v;
    return x;
}

Vec FluxPath::flux_at(double t) const {
    Vec w = Vec::Zero(static_cast<Eigen::Index>(totals.size()));
    for (size_t k = 0; k < path.jump_times.size() && path.jump_times[k] <= t; ++k)
        w[path.jump_reactions[k]] += 1.0;
    return w / static_cast<double>(path.v);
}

JumpPath ssa_simulate(const ReactionNetwork& net, std::int64_t v, const Counts& x0, double T,
                      std::uint64_t seed, std::int64_t jump_cap) {
    JumpPath p;
    p.v = v;
    p.x0 = x0;
    p.T = T;
    ssa_run(net, v, x0, T, trial_seed(seed, 0),
            [&](double t, int r, const Counts&) {
                p.jump_times.push_back(t);
                p.jump_reactions.push_back(r);
                return true;
            },
            jump_cap);
    return p;
}

FluxPath simulate_with_flux(const ReactionNetwork& net, std::int64_t v, const Counts& x0, double T,
                            std::uint64_t seed, std::int64_t jump_cap) {
    FluxPath f;
    f.path = ssa_simulate(net, v, x0, T, seed, jump_cap);
    f.totals.assign(static_cast<size_t>(net.num_reactions()), 0);
    for (int r : f.path.jump_reactions) ++f.totals[static_cast<size_t>(r)];
    return f;
}

ReachableSet reachable_set(const ReactionNetwork& net, std::int64_t v, const Counts& x0,
                           std::int64_t state_cap) {
    check_start(net, v, x0);
    if (state_cap < 1) throw ValidationError("state cap must be at least 1");
    ReachableSet out;
    std::map<Counts, std::int64_t> seen;
    seen[x0] = 0;
    out.states.push_back(x0);
    for (size_t head = 0; head < out.states.size(); ++head) {
        Counts cur = out.states[head];
        for (int r = 0; r < net.num_reactions(); ++r) {
            if (micro_rate(net, r, cur.data(), v) <= 0) continue;
            Counts nx = cur;
            const auto& g = net.reactions()[static_cast<size_t>(r)].gamma;
            for (size_t i = 0; i < nx.size(); ++i) nx[i] += g[i];
            if (seen.count(nx)) continue;
            if (static_cast<std::int64_t>(out.states.size()) >= state_cap) {
                out.truncated = true;
                continue;
            }
            seen[nx] = static_cast<std::int64_t>(out.states.size());
            out.states.push_back(nx);
        }
    }
    return out;
}

std::pair<double, double> wilson_interval(std::int64_t hits, std::int64_t trials) {
    if (trials <= 0) return {0.0, 1.0};
    const double z = 1.959963984540054;
    double n = static_cast<double>(trials), p = static_cast<double>(hits) / n;
    double denom = 1 + z * z / n;
    double center = (p + z * z / (2 * n)) / denom;
    double half = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom;
    double lo = hits == 0 ? 0.0 : std::max(0.0, center - half);
    double hi = hits == trials ? 1.0 : std::min(1.0, center + half);
    return {lo, hi};
}

double sup_distance(const ReactionNetwork& net, std::int64_t v, const Counts& x0, const MacroPath& z,
                    std::uint64_t stream_seed, double stop_above) {
    if (z.dim() != net.dim()) throw ValidationError("path dimension does not match the network");
    const double T = z.T();
    const double dv = static_cast<double>(v);
    auto to_x = [&](const Counts& n) {
        Vec x(static_cast<Eigen::Index>(n.size()));
        for (size_t i = 0; i < n.size(); ++i) x[static_cast<Eigen::Index>(i)] = static_cast<double>(n[i]) / dv;
        return x;
    };
    Vec cur = to_x(x0);
    double sup = (cur - z(0.0)).norm();
    size_t next_bp = 0;
    // The distance from a constant to a linear segment is convex in t, so
    // checking segment endpoints is exact.
    auto sweep_to = [&](double t) {
        while (next_bp < z.size() && z.time(next_bp) < t) {
            if (z.time(next_bp) > 0) sup = std::max(sup, (cur - z.point(next_bp)).norm());
            ++next_bp;
        }
        sup = std::max(sup, (cur - z(t)).norm());
    };
    ssa_run(net, v, x0, T, stream_seed, [&](double t, int, const Counts& n) {
        sweep_to(t);
        cur = to_x(n);
        sup = std::max(sup, (cur - z(t)).norm());
        return !(stop_above >= 0 && sup > stop_above);
    });
    if (!(stop_above >= 0 && sup > stop_above)) sweep_to(T);
    return sup;
}

TubeEstimate tube_probability_mc(const ReactionNetwork& net, std::int64_t v, const Counts& x0,
                                 const MacroPath& z, double delta, std::int64_t trials,
                                 std::uint64_t seed, int jobs) {
    check_start(net, v, x0);
    if (!(delta >= 0)) throw ValidationError("tube radius must be nonnegative");
    if (trials < 1) throw ValidationError("trials must be positive");
    std::vector<char> hit(static_cast<size_t>(trials), 0);
    parallel_for(static_cast<int>(trials), jobs, [&](int i) {
        // Relative slack so lattice points exactly on the tube boundary count as inside.
        const double edge = delta * (1 + 1e-12);
        double s = sup_distance(net, v, x0, z, trial_seed(seed, static_cast<std::uint64_t>(i)), edge);
        hit[static_cast<size_t>(i)] = s <= edge;
    });
    TubeEstimate e;
    e.v = v;
    e.trials = trials;
    for (char h : hit) e.hits += h;
    e.p_hat = static_cast<double>(e.hits) / static_cast<double>(trials);
    std::tie(e.lo, e.hi) = wilson_interval(e.hits, trials);
    e.zero_hits = e.hits == 0;
    e.log_estimate = e.zero_hits ? -std::numeric_limits<double>::infinity()
                                 : std::log(e.p_hat) / static_cast<double>(v);
    return e;
}

FluidGapResult fluid_gap(const ReactionNetwork& net, std::int64_t v, const Counts& x0, double T,
                         const std::vector<std::uint64_t>& seeds, int jobs, int rk_steps) {
    check_start(net, v, x0);
    if (seeds.empty()) throw ValidationError("fluid_gap needs at least one seed");
    Vec x(static_cast<Eigen::Index>(x0.size()));
    for (size_t i = 0; i < x0.size(); ++i) x[static_cast<Eigen::Index>(i)] = static_cast<double>(x0[i]) / v;
    MacroPath fl = fluid_limit(net, x, T, rk_steps);
    FluidGapResult out;
    out.gaps.assign(seeds.size(), 0.0);
    parallel_for(static_cast<int>(seeds.size()), jobs, [&](int i) {
        out.gaps[static_cast<size_t>(i)] = sup_distance(net, v, x0, fl, trial_seed(seeds[static_cast<size_t>(i)], 0));
    });
    std::vector<double> s = out.gaps;
    std::sort(s.begin(), s.end());
    size_t m = s.size() / 2;
    out.median = s.size() % 2 ? s[m] : 0.5 * (s[m - 1] + s[m]);
    return out;
}

namespace {

CsvTable path_table(const ReactionNetwork& net, const JumpPath& p, bool with_flux) {
    CsvTable t;
    t.header = {"t", "reaction"};
    const int d = net.dim(), R = net.num_reactions();
    for (int i = 0; i < d; ++i) t.header.push_back("x_" + std::to_string(i + 1));
    if (with_flux)
        for (int r = 0; r < R; ++r) t.header.push_back("w_" + std::to_string(r + 1));
    Counts n = p.x0;
    std::vector<std::int64_t> w(static_cast<size_t>(R), 0);
    auto row = [&](double time, int r) {
        std::vector<double> out{time, static_cast<double>(r)};
        for (auto c : n) out.push_back(static_cast<double>(c) / p.v);
        if (with_flux)
            for (auto c : w) out.push_back(static_cast<double>(c) / p.v);
        t.rows.push_back(std::move(out));
    };
    row(0.0, -1);
    for (size_t k = 0; k < p.jump_times.size(); ++k) {
        int r = p.jump_reactions[k];
        const auto& g = net.reactions()[static_cast<size_t>(r)].gamma;
        for (size_t i = 0; i < n.size(); ++i) n[i] += g[i];
        ++w[static_cast<size_t>(r)];
        row(p.jump_times[k], r);
    }
    row(p.T, -1);
    return t;
}

}  // namespace

CsvTable trajectory_table(const ReactionNetwork& net, const JumpPath& p) { return path_table(net, p, false); }
CsvTable flux_table(const ReactionNetwork& net, const FluxPath& p) { return path_table(net, p.path, true); }

}  // namespace jumpldp
