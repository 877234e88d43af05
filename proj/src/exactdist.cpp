#include "jumpldp/exactdist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "jumpldp/errors.hpp"

namespace jumpldp {

TruncatedChain build_chain(const ReactionNetwork& net, std::int64_t v, const Counts& x0,
                           std::int64_t state_cap) {
    if (v < 1) throw ValidationError("v must be a positive integer");
    if (static_cast<int>(x0.size()) != net.dim()) throw ValidationError("x0 dimension does not match the network");
    if (state_cap < 1) throw ValidationError("state cap must be at least 1");
    TruncatedChain c;
    c.v = v;
    c.dim = net.dim();
    std::map<Counts, std::int64_t> index;
    index[x0] = 0;
    c.states.push_back(x0);
    for (size_t head = 0; head < c.states.size(); ++head) {
        Counts cur = c.states[head];
        std::vector<Transition> tr;
        double total = 0.0;
        for (int r = 0; r < net.num_reactions(); ++r) {
            double rate = micro_rate(net, r, cur.data(), v) * static_cast<double>(v);
            const auto& g = net.reactions()[static_cast<size_t>(r)].gamma;
            bool zero_jump = std::all_of(g.begin(), g.end(), [](int k) { return k == 0; });
            if (rate <= 0 || zero_jump) continue;
            if (!std::isfinite(rate)) throw NumericError("jump rate is not finite");
            Counts nx = cur;
            for (size_t i = 0; i < nx.size(); ++i) nx[i] += g[i];
            std::int64_t target;
            auto it = index.find(nx);
            if (it != index.end()) {
                target = it->second;
            } else if (static_cast<std::int64_t>(c.states.size()) < state_cap) {
                target = static_cast<std::int64_t>(c.states.size());
                index[nx] = target;
                c.states.push_back(nx);
            } else {
                target = -1;
                c.truncated = true;
            }
            tr.push_back({target, rate});
            total += rate;
        }
        c.q = std::max(c.q, total);
        c.out.push_back(std::move(tr));
    }
    return c;
}

Distribution transient_distribution(const TruncatedChain& chain, double t, double tol) {
    if (!(t >= 0)) throw ValidationError("t must be nonnegative");
    if (!(tol > 0 && tol < 1)) throw ValidationError("tol must lie in (0, 1)");
    const size_t n = chain.states.size();
    Distribution d;
    d.prob.assign(n, 0.0);
    const double qt = chain.q * t;
    if (qt == 0.0) {
        d.prob[0] = 1.0;
        d.terms = 1;
        return d;
    }
    // p_k = p_0 P^k with P = I + Q/q, plus the sink as an extra absorbing slot.
    std::vector<double> p(n + 1, 0.0), next(n + 1, 0.0);
    p[0] = 1.0;
    std::vector<double> acc(n + 1, 0.0);
    const double log_qt = std::log(qt), log_tol = std::log(tol);
    const std::int64_t max_terms = 50000000;
    for (std::int64_t k = 0;; ++k) {
        double logw = -qt + static_cast<double>(k) * log_qt - std::lgamma(static_cast<double>(k) + 1.0);
        double w = std::exp(logw);
        if (w > 0)
            for (size_t i = 0; i <= n; ++i) acc[i] += w * p[i];
        // Tail bound sum_{j>k} w_j <= w_{k+1} / (1 - qt/(k+2)) once k+2 > qt.
        double kk = static_cast<double>(k);
        if (kk + 2 > qt) {
            double logw1 = logw + log_qt - std::log(kk + 1);
            if (logw1 - std::log1p(-qt / (kk + 2)) < log_tol) {
                d.terms = k + 1;
                break;
            }
        }
        if (k >= max_terms) throw NumericError("uniformization needs too many Poisson terms (q t too large)");
        std::fill(next.begin(), next.end(), 0.0);
        next[n] = p[n];
        for (size_t i = 0; i < n; ++i) {
            if (p[i] == 0.0) continue;
            double stay = 1.0;
            for (const auto& tr : chain.out[i]) {
                double f = tr.rate / chain.q;
                stay -= f;
                next[tr.target < 0 ? n : static_cast<size_t>(tr.target)] += p[i] * f;
            }
            next[i] += p[i] * std::max(stay, 0.0);
        }
        p.swap(next);
    }
    for (size_t i = 0; i < n; ++i) d.prob[i] = acc[i];
    d.sink = acc[n];
    return d;
}

EventProbability event_probability(const TruncatedChain& chain, const Distribution& dist,
                                   const StatePredicate& pred) {
    EventProbability e;
    Vec x(chain.dim);
    for (size_t i = 0; i < chain.states.size(); ++i) {
        for (int j = 0; j < chain.dim; ++j)
            x[j] = static_cast<double>(chain.states[i][static_cast<size_t>(j)]) / static_cast<double>(chain.v);
        if (pred(x)) e.value += dist.prob[i];
    }
    e.sink = dist.sink;
    e.upper = e.value + dist.sink;
    return e;
}

EventProbability event_probability(const TruncatedChain& chain, double t, const StatePredicate& pred,
                                   double tol) {
    return event_probability(chain, transient_distribution(chain, t, tol), pred);
}

double yule_tail(double t, std::int64_t k) {
    if (k < 1) throw ValidationError("yule_tail needs k >= 1");
    if (!(t > 0)) throw ValidationError("yule_tail needs t > 0");
    return std::pow(-std::expm1(-t), static_cast<double>(k - 1));
}

CsvTable distribution_table(const TruncatedChain& chain, const Distribution& dist) {
    CsvTable t;
    t.header = {"state_index"};
    for (int i = 0; i < chain.dim; ++i) t.header.push_back("x_" + std::to_string(i + 1));
    t.header.push_back("prob");
    for (size_t i = 0; i < chain.states.size(); ++i) {
        std::vector<double> row{static_cast<double>(i)};
        for (auto c : chain.states[i]) row.push_back(static_cast<double>(c) / static_cast<double>(chain.v));
        row.push_back(dist.prob[i]);
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace jumpldp
