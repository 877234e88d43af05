#include "jumpldp/network.hpp"

#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

#include "jumpldp/errors.hpp"
#include "jumpldp/format.hpp"
#include "jumpldp/path.hpp"

namespace jumpldp {

using nlohmann::json;

ReactionNetwork::ReactionNetwork(std::string name, std::vector<std::string> species,
                                 std::vector<Reaction> reactions)
    : name_(std::move(name)), species_(std::move(species)), reactions_(std::move(reactions)) {
    if (species_.empty()) throw ValidationError("network needs at least one species");
    if (reactions_.empty()) throw ValidationError("network needs at least one reaction");
    std::set<std::string> seen;
    for (const auto& s : species_)
        if (!seen.insert(s).second) throw ValidationError("duplicate species '" + s + "'");
    const int d = dim();
    gamma_ = Mat::Zero(d, num_reactions());
    for (int r = 0; r < num_reactions(); ++r) {
        auto& rx = reactions_[static_cast<size_t>(r)];
        if (static_cast<int>(rx.gamma_in.size()) != d || static_cast<int>(rx.gamma_out.size()) != d)
            throw ValidationError("reaction " + std::to_string(r) + " has wrong stoichiometry length");
        rx.gamma.assign(static_cast<size_t>(d), 0);
        bool nonzero = false;
        for (int i = 0; i < d; ++i) {
            if (rx.gamma_in[i] < 0 || rx.gamma_out[i] < 0)
                throw ValidationError("negative stoichiometric coefficient in reaction " +
                                      std::to_string(r));
            rx.gamma[i] = rx.gamma_out[i] - rx.gamma_in[i];
            gamma_(i, r) = rx.gamma[i];
            nonzero = nonzero || rx.gamma[i] != 0;
        }
        if (!nonzero && !rx.placeholder)
            throw ValidationError("reaction " + std::to_string(r) +
                                  " has zero jump; mark it \"placeholder\": true");
        if (auto* ma = std::get_if<MassAction>(&rx.rate)) {
            if (!(ma->k >= 0) || !std::isfinite(ma->k))
                throw ValidationError("negative or non-finite rate constant in reaction " +
                                      std::to_string(r));
        }
    }
}

bool ReactionNetwork::has_expression_laws() const {
    for (const auto& rx : reactions_)
        if (std::holds_alternative<ExpressionLaw>(rx.rate)) return true;
    return false;
}

Vec ScaledState::x() const {
    Vec out(static_cast<Eigen::Index>(counts.size()));
    for (size_t i = 0; i < counts.size(); ++i)
        out[static_cast<Eigen::Index>(i)] = static_cast<double>(counts[i]) / static_cast<double>(v);
    return out;
}

ScaledState to_lattice(const Vec& x, std::int64_t v) {
    if (v < 1) throw ValidationError("v must be a positive integer");
    ScaledState s;
    s.v = v;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        s.counts.push_back(std::llround(x[i] * static_cast<double>(v)));
    return s;
}

namespace {

void line_col(const std::string& text, size_t offset, int& line, int& col) {
    line = 1;
    col = 1;
    for (size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
}

// Position of the first occurrence of `token` at or after `from`.
void locate(const std::string& text, const std::string& token, size_t from, int& line, int& col) {
    size_t p = text.find(token, from);
    if (p == std::string::npos) p = from;
    line_col(text, p, line, col);
}

std::vector<int> stoich(const json& j, const std::vector<std::string>& species,
                        const std::string& text, size_t from) {
    std::vector<int> out(species.size(), 0);
    if (j.is_null()) return out;
    if (!j.is_object()) {
        int l, c;
        locate(text, "\"reactions\"", from, l, c);
        throw ParseError("stoichiometry must be an object of species counts", l, c);
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        size_t idx = species.size();
        for (size_t i = 0; i < species.size(); ++i)
            if (species[i] == it.key()) idx = i;
        int l, c;
        if (idx == species.size()) {
            locate(text, json(it.key()).dump(), from, l, c);
            throw ParseError("unknown species '" + it.key() + "'", l, c);
        }
        if (!it.value().is_number_integer() || it.value().get<long long>() < 0) {
            locate(text, json(it.key()).dump(), from, l, c);
            throw ParseError("stoichiometric count must be a nonnegative integer", l, c);
        }
        out[idx] = it.value().get<int>();
    }
    return out;
}

}  // namespace

ReactionNetwork parse_model(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        int l, c;
        line_col(text, e.byte > 0 ? e.byte - 1 : 0, l, c);
        throw ParseError(std::string("malformed JSON: ") + e.what(), l, c);
    }
    if (!doc.is_object()) throw ParseError("model must be a JSON object", 1, 1);
    if (!doc.contains("species") || !doc["species"].is_array())
        throw ParseError("model needs a \"species\" array", 1, 1);
    std::vector<std::string> species;
    for (const auto& s : doc["species"]) {
        if (!s.is_string()) throw ParseError("species names must be strings", 1, 1);
        species.push_back(s.get<std::string>());
    }
    if (!doc.contains("reactions") || !doc["reactions"].is_array())
        throw ParseError("model needs a \"reactions\" array", 1, 1);
    size_t cursor = text.find("\"reactions\"");
    if (cursor == std::string::npos) cursor = 0;
    std::vector<Reaction> reactions;
    for (const auto& rj : doc["reactions"]) {
        size_t here = text.find('{', cursor);
        if (here == std::string::npos) here = cursor;
        int l, c;
        if (!rj.is_object()) {
            line_col(text, here, l, c);
            throw ParseError("reaction must be an object", l, c);
        }
        Reaction rx;
        rx.gamma_in = stoich(rj.value("in", json()), species, text, here);
        rx.gamma_out = stoich(rj.value("out", json()), species, text, here);
        rx.placeholder = rj.value("placeholder", false);
        if (!rj.contains("rate") || !rj["rate"].is_object()) {
            line_col(text, here, l, c);
            throw ParseError("reaction needs a \"rate\" object", l, c);
        }
        const auto& rate = rj["rate"];
        std::string type = rate.value("type", "");
        if (type == "mass_action") {
            if (!rate.contains("k") || !rate["k"].is_number()) {
                locate(text, "\"mass_action\"", here, l, c);
                throw ParseError("mass_action rate needs numeric \"k\"", l, c);
            }
            double k = rate["k"].get<double>();
            if (k < 0) {
                locate(text, "\"k\"", here, l, c);
                throw ParseError("negative rate constant", l, c);
            }
            rx.rate = MassAction{k};
        } else if (type == "expr") {
            if (!rate.contains("formula") || !rate["formula"].is_string()) {
                locate(text, "\"expr\"", here, l, c);
                throw ParseError("expr rate needs a \"formula\" string", l, c);
            }
            std::string f = rate["formula"].get<std::string>();
            // Report positions relative to the document: start just after the
            // opening quote of the formula literal.
            locate(text, json(f).dump(), here, l, c);
            rx.rate = ExpressionLaw{f, parse_expression(f, species, l, c + 1)};
        } else {
            locate(text, "\"type\"", here, l, c);
            throw ParseError("unknown rate type '" + type + "'", l, c);
        }
        reactions.push_back(std::move(rx));
        size_t next = text.find("\"rate\"", here);
        cursor = next == std::string::npos ? here + 1 : next + 1;
    }
    return ReactionNetwork(doc.value("name", std::string("model")), std::move(species),
                           std::move(reactions));
}

ReactionNetwork load_model_file(const std::string& path) { return parse_model(read_file(path)); }

std::string print_model(const ReactionNetwork& net) {
    json doc;
    doc["name"] = net.name();
    doc["species"] = net.species();
    json rs = json::array();
    for (const auto& rx : net.reactions()) {
        json in = json::object(), out = json::object();
        for (int i = 0; i < net.dim(); ++i) {
            if (rx.gamma_in[i]) in[net.species()[i]] = rx.gamma_in[i];
            if (rx.gamma_out[i]) out[net.species()[i]] = rx.gamma_out[i];
        }
        json r = {{"in", in}, {"out", out}};
        if (auto* ma = std::get_if<MassAction>(&rx.rate)) {
            r["rate"] = {{"type", "mass_action"}, {"k", ma->k}};
        } else {
            const auto& ex = std::get<ExpressionLaw>(rx.rate);
            r["rate"] = {{"type", "expr"}, {"formula", print_expression(*ex.ast, net.species())}};
        }
        if (rx.placeholder) r["placeholder"] = true;
        rs.push_back(r);
    }
    doc["reactions"] = rs;
    return dump_json(doc);
}

double macro_rate(const ReactionNetwork& net, int r, const Vec& x) {
    const auto& rx = net.reactions()[static_cast<size_t>(r)];
    if (auto* ma = std::get_if<MassAction>(&rx.rate)) {
        double p = ma->k;
        for (int i = 0; i < net.dim(); ++i) {
            int g = rx.gamma_in[i];
            if (g == 0) continue;
            if (x[i] < 0) throw DomainError("mass-action rate evaluated at negative concentration");
            for (int e = 0; e < g; ++e) p *= x[i];
        }
        return p;
    }
    const auto& ex = std::get<ExpressionLaw>(rx.rate);
    double v = evaluate(*ex.ast, x.data());
    if (!(v >= 0) || !std::isfinite(v))
        throw DomainError("rate of reaction " + std::to_string(r) + " is " +
                          (v < 0 ? "negative" : "not finite") + " at the given state");
    return v;
}

Vec macro_rates(const ReactionNetwork& net, const Vec& x) {
    Vec out(net.num_reactions());
    for (int r = 0; r < net.num_reactions(); ++r) out[r] = macro_rate(net, r, x);
    return out;
}

double log_macro_rate(const ReactionNetwork& net, int r, const Vec& x) {
    const auto& rx = net.reactions()[static_cast<size_t>(r)];
    if (auto* ma = std::get_if<MassAction>(&rx.rate)) {
        double s = std::log(ma->k);
        for (int i = 0; i < net.dim(); ++i) {
            int g = rx.gamma_in[i];
            if (g == 0) continue;
            if (x[i] < 0) throw DomainError("mass-action rate evaluated at negative concentration");
            s += g * std::log(x[i]);
        }
        return s;
    }
    const auto& ex = std::get<ExpressionLaw>(rx.rate);
    double v = evaluate_log(*ex.ast, x.data());
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
        throw DomainError("rate of reaction " + std::to_string(r) + " is not finite at the given state");
    return v;
}

Vec log_macro_rates(const ReactionNetwork& net, const Vec& x) {
    Vec out(net.num_reactions());
    for (int r = 0; r < net.num_reactions(); ++r) out[r] = log_macro_rate(net, r, x);
    return out;
}

double micro_rate(const ReactionNetwork& net, int r, const std::int64_t* counts, std::int64_t v) {
    const auto& rx = net.reactions()[static_cast<size_t>(r)];
    if (auto* ma = std::get_if<MassAction>(&rx.rate)) {
        // k v^{-m} prod_i n_i (n_i - 1) ... (n_i - g_i + 1)
        unsigned __int128 prod = 1;
        long double fallback = 1.0L;
        bool overflow = false;
        int m = 0;
        for (int i = 0; i < net.dim(); ++i) {
            int g = rx.gamma_in[i];
            m += g;
            for (int e = 0; e < g; ++e) {
                std::int64_t f = counts[i] - e;
                if (f <= 0) return 0.0;
                fallback *= static_cast<long double>(f);
                if (!overflow) {
                    unsigned __int128 next = prod * static_cast<unsigned __int128>(f);
                    if (next / static_cast<unsigned __int128>(f) != prod) overflow = true;
                    prod = next;
                }
            }
        }
        if (!overflow && prod < (static_cast<unsigned __int128>(1) << 53))
            return ma->k * static_cast<double>(prod) / std::pow(static_cast<double>(v), m);
        long double num = overflow ? fallback : static_cast<long double>(prod);
        return static_cast<double>(static_cast<long double>(ma->k) * num /
                                   std::pow(static_cast<long double>(v), m));
    }
    Vec x(net.dim());
    for (int i = 0; i < net.dim(); ++i)
        x[i] = static_cast<double>(counts[i]) / static_cast<double>(v);
    return macro_rate(net, r, x);
}

double log_micro_rate(const ReactionNetwork& net, int r, const std::int64_t* counts, std::int64_t v) {
    const auto& rx = net.reactions()[static_cast<size_t>(r)];
    if (std::holds_alternative<MassAction>(rx.rate)) {
        double m = micro_rate(net, r, counts, v);
        return m > 0 ? std::log(m) : -std::numeric_limits<double>::infinity();
    }
    Vec x(net.dim());
    for (int i = 0; i < net.dim(); ++i)
        x[i] = static_cast<double>(counts[i]) / static_cast<double>(v);
    return log_macro_rate(net, r, x);
}

double micro_rate(const ReactionNetwork& net, int r, const ScaledState& s) {
    if (static_cast<int>(s.counts.size()) != net.dim())
        throw ValidationError("state dimension does not match the network");
    return micro_rate(net, r, s.counts.data(), s.v);
}

Vec macro_rate_gradient(const ReactionNetwork& net, int r, const Vec& x) {
    const auto& rx = net.reactions()[static_cast<size_t>(r)];
    const int d = net.dim();
    Vec g = Vec::Zero(d);
    if (auto* ma = std::get_if<MassAction>(&rx.rate)) {
        for (int j = 0; j < d; ++j) {
            int gj = rx.gamma_in[j];
            if (gj == 0) continue;
            double p = ma->k * gj;
            for (int e = 0; e < gj - 1; ++e) p *= x[j];
            for (int i = 0; i < d; ++i) {
                if (i == j) continue;
                for (int e = 0; e < rx.gamma_in[i]; ++e) p *= x[i];
            }
            g[j] = p;
        }
        return g;
    }
    for (int j = 0; j < d; ++j) {
        double h = 1e-6 * std::max(1.0, std::abs(x[j]));
        Vec xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        if (xm[j] < 0) {
            xm[j] = x[j];
            g[j] = (macro_rate(net, r, xp) - macro_rate(net, r, xm)) / h;
        } else {
            g[j] = (macro_rate(net, r, xp) - macro_rate(net, r, xm)) / (2 * h);
        }
    }
    return g;
}

Vec drift(const ReactionNetwork& net, const Vec& x) {
    return net.gamma_matrix() * macro_rates(net, x);
}

MacroPath fluid_limit(const ReactionNetwork& net, const Vec& x0, double T, int steps,
                      double blowup) {
    if (steps < 1) throw ValidationError("fluid_limit needs at least one step");
    if (!(T >= 0)) throw ValidationError("fluid_limit needs T >= 0");
    if (x0.size() != net.dim()) throw ValidationError("x0 dimension does not match the network");
    const double h = T / steps;
    std::vector<double> t{0.0};
    std::vector<Vec> z{x0};
    Vec x = x0;
    for (int k = 0; k < steps; ++k) {
        Vec k1 = drift(net, x);
        Vec k2 = drift(net, x + 0.5 * h * k1);
        Vec k3 = drift(net, x + 0.5 * h * k2);
        Vec k4 = drift(net, x + h * k3);
        x += (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
        if (!x.allFinite() || x.norm() > blowup)
            throw NumericError("fluid limit blew up at t = " + fmt_double((k + 1) * h));
        t.push_back(k + 1 == steps ? T : (k + 1) * h);
        z.push_back(x);
    }
    return MacroPath(std::move(t), std::move(z));
}

ConvergenceAudit audit_rate_convergence(const ReactionNetwork& net,
                                        const std::vector<std::int64_t>& v_ladder,
                                        const std::vector<Vec>& grid) {
    if (grid.empty()) throw ValidationError("audit grid is empty");
    ConvergenceAudit out;
    for (auto v : v_ladder) {
        double sup = 0.0;
        for (const auto& g : grid) {
            ScaledState s = to_lattice(g, v);
            Vec x = s.x();
            double sum = 0.0;
            for (int r = 0; r < net.num_reactions(); ++r)
                sum += std::abs(micro_rate(net, r, s) - macro_rate(net, r, x));
            sup = std::max(sup, sum);
        }
        out.v.push_back(v);
        out.sup_error.push_back(sup);
    }
    out.monotone_decrease = true;
    for (size_t i = 1; i < out.sup_error.size(); ++i)
        if (!(out.sup_error[i] < out.sup_error[i - 1])) out.monotone_decrease = false;
    return out;
}

double audit_aleph(const ReactionNetwork& net, std::int64_t v, const std::vector<Vec>& grid) {
    if (grid.empty()) throw ValidationError("audit grid is empty");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& g : grid) {
        ScaledState s = to_lattice(g, v);
        Vec x = s.x();
        for (int r = 0; r < net.num_reactions(); ++r) {
            double big = micro_rate(net, r, s);
            if (big <= 0) continue;
            double lam = macro_rate(net, r, x);
            if (lam <= 0) continue;
            best = std::min(best, big / lam);
        }
    }
    return best;
}

}  // namespace jumpldp
