#include "jumpldp/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <optional>
#include <random>
#include <sstream>

#include "jumpldp/cover.hpp"
#include "jumpldp/errors.hpp"
#include "jumpldp/exactdist.hpp"
#include "jumpldp/experiments.hpp"
#include "jumpldp/format.hpp"
#include "jumpldp/network.hpp"
#include "jumpldp/path.hpp"
#include "jumpldp/pathlab.hpp"
#include "jumpldp/ratefn.hpp"
#include "jumpldp/simulator.hpp"

namespace jumpldp {

namespace {

struct Options {
    std::string model;
    std::string cover;
    std::string format = "csv";
    std::string out;
    int jobs = 0;
    std::uint64_t seed = 1;
    std::string v;
    std::string x0;
    double t_max = 1.0;
    double t = 1.0;
    double delta = 0.1;
    double cap = 20.0;
    double tol = 1e-12;
    std::string mode = "exact";
    std::string x;
    std::string y;
    std::string path;
    std::string flux;
    std::string target;
    std::string rho;
    std::string alpha;
    std::string eps;
    int reaction = 0;
    int region = -1;
    int coord = 0;
    int steps = 1000;
    int pieces = 200;
    int grid = 100;
    int max_iter = 3000;
    int segments = 4;
    std::int64_t trials = 10000;
    double aleph = 1.0;
    double k = 1.0;
    std::optional<double> expected;
};

std::vector<double> parse_list(const std::string& s, const char* flag) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            size_t used = 0;
            double d = std::stod(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(d);
        } catch (const std::exception&) {
            throw ValidationError(std::string("bad number '") + item + "' in " + flag);
        }
    }
    if (out.empty()) throw ValidationError(std::string(flag) + " is empty");
    return out;
}

std::vector<std::int64_t> parse_v(const std::string& s) {
    std::vector<std::int64_t> out;
    for (double d : parse_list(s, "--v")) {
        if (d < 1 || d != std::floor(d)) throw ValidationError("--v entries must be positive integers");
        out.push_back(static_cast<std::int64_t>(d));
    }
    return out;
}

Vec to_vec(const std::vector<double>& d) { return Eigen::Map<const Vec>(d.data(), static_cast<Eigen::Index>(d.size())); }

Vec parse_point(const std::string& s, const char* flag, int dim) {
    Vec x = to_vec(parse_list(s, flag));
    if (x.size() != dim) throw ValidationError(std::string(flag) + " must have " + std::to_string(dim) + " entries");
    return x;
}

std::vector<double> dyadic(int from, int to) {
    std::vector<double> r;
    for (int k = from; k <= to; ++k) r.push_back(std::ldexp(1.0, -k));
    return r;
}

struct Context {
    const Options& o;
    const BuiltinModel* bm = nullptr;
    ReactionNetwork net;

    explicit Context(const Options& opts) : o(opts), net(resolve(opts.model, bm)) {}

    static ReactionNetwork resolve(const std::string& model, const BuiltinModel*& bm) {
        if (model.empty()) throw ValidationError("--model is required");
        if (std::filesystem::exists(model)) return load_model_file(model);
        bm = &builtin(model);
        return parse_model(bm->model_json);
    }

    Counts lattice_x0(std::int64_t v) const {
        if (!o.x0.empty()) return to_lattice(parse_point(o.x0, "--x0", net.dim()), v).counts;
        if (bm) return bm->x0_v(v);
        throw ValidationError("--x0 is required for model files");
    }
    std::function<Counts(std::int64_t)> lattice_rule() const {
        return [this](std::int64_t v) { return lattice_x0(v); };
    }
    Vec macro_x0() const {
        if (!o.x0.empty()) return parse_point(o.x0, "--x0", net.dim());
        if (bm) return bm->x0;
        throw ValidationError("--x0 is required for model files");
    }
    Cover cover() const {
        if (!o.cover.empty()) return load_cover_file(o.cover, &net);
        if (bm) return parse_cover(bm->cover_json, &net);
        throw ValidationError("--cover is required for model files");
    }
    MacroPath path() const {
        if (!o.path.empty()) return read_path_csv(o.path);
        if (bm) {
            std::mt19937_64 rng(o.seed);
            return random_cover_path(bm->id, rng, o.segments, o.t_max);
        }
        throw ValidationError("--path is required for model files");
    }
    int region(const Cover& c, const Vec* at = nullptr) const {
        if (o.region >= 0) {
            if (o.region >= static_cast<int>(c.regions.size())) throw ValidationError("--region out of range");
            return o.region;
        }
        for (const auto& r : c.regions)
            if (r.is_boundary() && (!at || r.contains(*at, 1e-9))) return r.id;
        throw ValidationError("no boundary region available; pass --region");
    }
    std::int64_t single_v() const {
        auto v = parse_v(o.v.empty() ? "100" : o.v);
        if (v.size() != 1) throw ValidationError("--v takes a single value here");
        return v[0];
    }
};

CsvTable path_table(const ReactionNetwork& net, const MacroPath& z) {
    CsvTable t;
    t.header = {"t"};
    for (const auto& s : net.species()) t.header.push_back(s);
    for (size_t i = 0; i < z.size(); ++i) {
        std::vector<double> row{z.time(i)};
        for (int k = 0; k < z.dim(); ++k) row.push_back(z.point(i)[k]);
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable action_table(const MacroPath& z, const ActionReport& rep) {
    CsvTable t;
    t.header = {"segment", "t_start", "t_end", "action"};
    for (size_t i = 0; i < rep.per_segment.size(); ++i) {
        double a = i < z.size() ? z.time(i) : 0.0, b = i + 1 < z.size() ? z.time(i + 1) : z.T();
        t.rows.push_back({static_cast<double>(i), a, b, rep.per_segment[i]});
    }
    t.rows.push_back({-1.0, z.t0(), z.T(), rep.value});
    return t;
}

struct Output {
    std::string text;  // preformatted CSV, used when the payload is not numeric
    CsvTable table;
    nlohmann::json meta = nlohmann::json::object();
};

Output cmd_list_models() {
    Output r;
    r.table.header = {"index", "species", "reactions"};
    nlohmann::json ids = nlohmann::json::array();
    int i = 0;
    for (const auto& m : builtin_models()) {
        auto net = parse_model(m.model_json);
        r.table.rows.push_back({static_cast<double>(i++), static_cast<double>(net.dim()),
                                static_cast<double>(net.num_reactions())});
        ids.push_back({{"id", m.id}, {"description", m.description}});
        r.text += m.id + "," + std::to_string(net.dim()) + "," + std::to_string(net.num_reactions()) + "\n";
    }
    r.text = "id,species,reactions\n" + r.text;
    r.meta["models"] = ids;
    return r;
}

Output cmd_simulate(const Context& c, bool with_flux) {
    const auto v = c.single_v();
    Counts x0 = c.lattice_x0(v);
    Output r;
    r.meta = {{"model", c.net.name()}, {"v", v}, {"t_max", c.o.t_max}, {"seed", c.o.seed}};
    if (with_flux) {
        auto p = simulate_with_flux(c.net, v, x0, c.o.t_max, c.o.seed);
        r.table = flux_table(c.net, p);
        r.meta["jumps"] = p.path.jump_times.size();
    } else {
        auto p = ssa_simulate(c.net, v, x0, c.o.t_max, c.o.seed);
        r.table = trajectory_table(c.net, p);
        r.meta["jumps"] = p.jump_times.size();
    }
    return r;
}

Output cmd_exact(const Context& c) {
    const auto v = c.single_v();
    auto cap = static_cast<std::int64_t>(std::ceil(c.o.cap * static_cast<double>(v)));
    auto chain = build_chain(c.net, v, c.lattice_x0(v), std::max<std::int64_t>(cap, 1));
    auto dist = transient_distribution(chain, c.o.t, c.o.tol);
    Output r;
    r.table = distribution_table(chain, dist);
    r.meta = {{"model", c.net.name()}, {"v", v}, {"t", c.o.t}, {"states", chain.states.size()},
              {"truncated", chain.truncated}, {"sink", dist.sink}, {"terms", dist.terms}};
    return r;
}

Output cmd_rate(const Context& c) {
    if (c.o.x.empty() || c.o.y.empty()) throw ValidationError("rate needs --x and --y");
    Vec x = parse_point(c.o.x, "--x", c.net.dim()), y = parse_point(c.o.y, "--y", c.net.dim());
    auto lr = lagrangian(c.net, x, y);
    Output r;
    r.table.header = {"value", "feasible"};
    for (int i = 0; i < c.net.dim(); ++i) r.table.header.push_back("theta_" + std::to_string(i + 1));
    for (int k = 0; k < c.net.num_reactions(); ++k) r.table.header.push_back("mu_" + std::to_string(k + 1));
    std::vector<double> row{lr.value, lr.feasible ? 1.0 : 0.0};
    for (int i = 0; i < c.net.dim(); ++i) row.push_back(lr.feasible && lr.theta_star.size() ? lr.theta_star[i] : 0.0);
    for (int k = 0; k < c.net.num_reactions(); ++k) row.push_back(lr.feasible && lr.mu_star.size() ? lr.mu_star[k] : 0.0);
    r.table.rows.push_back(std::move(row));
    r.meta = {{"model", c.net.name()}};
    return r;
}

Output cmd_action(const Context& c) {
    if (c.o.path.empty()) throw ValidationError("action needs --path");
    auto z = read_path_csv(c.o.path);
    auto rep = path_action(c.net, z);
    Output r;
    r.table = action_table(z, rep);
    r.meta = {{"model", c.net.name()}, {"value", rep.value}, {"flags", rep.flags}};
    return r;
}

Output cmd_flux_action(const Context& c) {
    if (c.o.path.empty()) throw ValidationError("flux-action needs --path");
    auto z = read_path_csv(c.o.path);
    MacroPath w = c.o.flux.empty() ? induced_flux(c.net, z, c.o.pieces) : read_path_csv(c.o.flux);
    auto rep = flux_action(c.net, z, w);
    Output r;
    r.table.header = {"value"};
    r.table.rows.push_back({rep.value});
    r.meta = {{"model", c.net.name()}, {"value", rep.value}, {"flags", rep.flags},
              {"flux", c.o.flux.empty() ? "induced" : c.o.flux}};
    return r;
}

Output cmd_fluid(const Context& c) {
    auto z = fluid_limit(c.net, c.macro_x0(), c.o.t_max, c.o.steps);
    Output r;
    r.table = path_table(c.net, z);
    r.meta = {{"model", c.net.name()}, {"t_max", c.o.t_max}, {"steps", c.o.steps}};
    return r;
}

nlohmann::json plan_json(const ShiftPlan& p) {
    return {{"delta", p.delta}, {"xi", p.xi}, {"beta", p.beta}, {"t_delta", p.t_delta},
            {"kappa_minus", p.kappa_minus}, {"transition_times", p.transition_times},
            {"regions", p.region_ids}, {"cumulative", p.cumulative}, {"delta_prime", p.delta_prime},
            {"delta_dblprime", p.delta_dblprime}, {"J", p.J}, {"truncated", p.truncated}};
}

Output cmd_shift_path(const Context& c) {
    auto cover = c.cover();
    auto z = c.path();
    auto s = build_shifted_path(z, cover, c.o.delta);
    Output r;
    r.table = path_table(c.net, s.path);
    r.meta = {{"model", c.net.name()}, {"plan", plan_json(s.plan)}};
    return r;
}

Output cmd_verify_breakup(const Context& c) {
    auto cover = c.cover();
    auto z = c.path();
    auto s = build_shifted_path(z, cover, c.o.delta);
    auto rep = verify_breakup(z, s, cover);
    Output r;
    r.table.header = {"delta", "t_delta", "sup_distance", "sup_ok", "min_clearance", "required_clearance",
                      "clearance_ok", "decomposition_ok", "arithmetic_ok"};
    r.table.rows.push_back({c.o.delta, s.plan.t_delta, rep.sup_distance, rep.sup_ok ? 1.0 : 0.0, rep.min_clearance,
                            rep.required_clearance, rep.clearance_ok ? 1.0 : 0.0, rep.decomposition_ok ? 1.0 : 0.0,
                            rep.arithmetic_ok ? 1.0 : 0.0});
    r.meta = {{"model", c.net.name()}, {"report", rep.to_json()}, {"plan", plan_json(s.plan)}, {"pass", rep.all_ok()}};
    return r;
}

std::vector<Vec> cover_grid(const Cover& cover) {
    std::vector<Vec> grid;
    for (const auto& reg : cover.regions)
        for (auto& p : sample_region(reg, 32)) grid.push_back(p);
    return grid;
}

Output cmd_audit(const Context& c, const std::string& kind) {
    Output r;
    r.meta = {{"model", c.net.name()}, {"audit", kind}};
    const auto rho = c.o.rho.empty() ? dyadic(3, 12) : parse_list(c.o.rho, "--rho");
    if (kind == "convergence") {
        auto v = parse_v(c.o.v.empty() ? "10,100,1000,10000" : c.o.v);
        auto a = audit_rate_convergence(c.net, v, cover_grid(c.cover()));
        r.table.header = {"v", "sup_error"};
        for (size_t i = 0; i < a.v.size(); ++i) r.table.rows.push_back({static_cast<double>(a.v[i]), a.sup_error[i]});
        r.meta["monotone_decrease"] = a.monotone_decrease;
        r.meta["pass"] = a.monotone_decrease;
    } else if (kind == "aleph") {
        auto v = parse_v(c.o.v.empty() ? "10,100,1000" : c.o.v);
        auto grid = cover_grid(c.cover());
        r.table.header = {"v", "aleph"};
        for (auto vi : v) r.table.rows.push_back({static_cast<double>(vi), audit_aleph(c.net, vi, grid)});
    } else if (kind == "decay") {
        auto cover = c.cover();
        int reg = c.region(cover);
        if (c.o.reaction < 0 || c.o.reaction >= c.net.num_reactions()) throw ValidationError("--reaction out of range");
        auto alphas = c.o.alpha.empty() ? std::vector<double>{0.25, 0.5, 0.9} : parse_list(c.o.alpha, "--alpha");
        auto d = decay_exponent(c.net, c.o.reaction, cover.regions[static_cast<size_t>(reg)], rho, alphas);
        r.table.header = {"rho", "inf_log", "samples"};
        for (double a : alphas) r.table.header.push_back("scaled_" + fmt_double(a));
        for (size_t i = 0; i < d.rho.size(); ++i) {
            std::vector<double> row{d.rho[i], d.inf_log[i], static_cast<double>(d.samples[i])};
            for (size_t a = 0; a < alphas.size(); ++a) row.push_back(d.scaled[a][i]);
            r.table.rows.push_back(std::move(row));
        }
        r.meta["report"] = d.to_json();
    } else if (kind == "fast") {
        auto cover = c.cover();
        int reg = c.region(cover);
        auto f = fast_set(c.net, cover.regions[static_cast<size_t>(reg)], rho);
        r.table.header = {"reaction", "limit", "fast", "vanishes"};
        for (const auto& e : f.entries)
            r.table.rows.push_back({static_cast<double>(e.reaction), e.limit, e.fast ? 1.0 : 0.0, e.vanishes ? 1.0 : 0.0});
        r.meta["report"] = f.to_json();
    } else if (kind == "cone") {
        auto cover = c.cover();
        Vec x = c.o.x.empty() ? c.macro_x0() : parse_point(c.o.x, "--x", c.net.dim());
        int reg = c.region(cover, &x);
        const auto& region = cover.regions[static_cast<size_t>(reg)];
        auto f = fast_set(c.net, region, rho);
        auto cone = cone_obstruction(c.net, region, x, f.fast_set());
        r.table.header = {"region", "obstructed", "active_facets", "slow_reactions"};
        r.table.rows.push_back({static_cast<double>(reg), cone.obstructed ? 1.0 : 0.0,
                                static_cast<double>(cone.active_facets.size()), static_cast<double>(cone.slow.size())});
        r.meta["report"] = cone.to_json();
        r.meta["fast"] = f.to_json();
    } else if (kind == "escape-seq") {
        auto cover = c.cover();
        int reg = c.region(cover);
        auto v = parse_v(c.o.v.empty() ? "10,100,1000,10000" : c.o.v);
        auto a = escape_sequence_audit(c.net, cover, reg, c.lattice_rule(), v, rho);
        r.table.header = {"part", "key", "value"};
        for (size_t i = 0; i < a.v.size(); ++i) r.table.rows.push_back({0.0, static_cast<double>(a.v[i]), a.b_values[i]});
        for (size_t i = 0; i < a.rho.size(); ++i) r.table.rows.push_back({1.0, a.rho[i], a.c_values[i]});
        r.table.rows.push_back({2.0, static_cast<double>(a.d_checked), static_cast<double>(a.d_violations)});
        r.meta["report"] = a.to_json();
    } else {
        throw ValidationError("unknown audit '" + kind + "'");
    }
    return r;
}

Output from_study(const StudyResult& s) {
    Output r;
    r.table = s.rows;
    r.meta = s.meta();
    return r;
}

Output cmd_study(const Context& c, const std::string& kind) {
    if (kind == "marginal") {
        MarginalOptions opt;
        if (c.o.mode == "exact") opt.mode = StudyMode::Exact;
        else if (c.o.mode == "mc") opt.mode = StudyMode::MonteCarlo;
        else throw ValidationError("--mode must be exact or mc");
        opt.cap_factor = c.o.cap;
        opt.tol = c.o.tol;
        opt.trials = c.o.trials;
        opt.seed = c.o.seed;
        opt.jobs = c.o.jobs;
        if (c.o.expected) {
            opt.has_expected = true;
            opt.expected = *c.o.expected;
        }
        if (c.o.coord < 0 || c.o.coord >= c.net.dim()) throw ValidationError("--coord out of range");
        const int k = c.o.coord;
        const double thr = c.o.delta;
        auto v = parse_v(c.o.v.empty() ? "50,100,200,400" : c.o.v);
        auto s = ldp_marginal_study(c.net, c.lattice_rule(), [k, thr](const Vec& x) { return x[k] >= thr - 1e-12; },
                                    c.o.t, v, opt);
        s.params["coord"] = k;
        s.params["threshold"] = thr;
        return from_study(s);
    }
    if (kind == "minimize") {
        if (c.o.target.empty()) throw ValidationError("study minimize needs --target");
        Vec target = parse_point(c.o.target, "--target", c.net.dim());
        auto m = minimize_endpoint_action(c.net, c.macro_x0(), target, c.o.t_max, c.o.grid, c.o.max_iter);
        Output r;
        r.table = path_table(c.net, m.path);
        r.meta = {{"study", "minimize"}, {"model", c.net.name()}, {"value", m.value}, {"iterations", m.iterations},
                  {"converged", m.converged}, {"flags", m.flags}, {"grid", c.o.grid}, {"t_max", c.o.t_max}};
        return r;
    }
    if (kind == "diverge") {
        MacroPath z;
        if (!c.o.path.empty()) {
            z = read_path_csv(c.o.path);
        } else {
            Vec x0 = c.macro_x0();
            Vec end = c.o.target.empty() ? Vec(x0 + Vec::Ones(c.net.dim()) * c.o.t_max)
                                         : parse_point(c.o.target, "--target", c.net.dim());
            z = MacroPath({0.0, c.o.t_max}, {x0, end});
        }
        auto eps = c.o.eps.empty() ? dyadic(4, 12) : parse_list(c.o.eps, "--eps");
        return from_study(divergence_probe(c.net, z, eps, c.o.k));
    }
    if (kind == "escape-event") {
        auto cover = c.cover();
        int reg = c.region(cover);
        EscapeEventOptions opt;
        opt.trials = c.o.trials;
        opt.seed = c.o.seed;
        opt.jobs = c.o.jobs;
        opt.aleph = c.o.aleph;
        auto v = parse_v(c.o.v.empty() ? "20,50,100" : c.o.v);
        return from_study(escape_event_study(c.net, cover, reg, c.lattice_rule(), c.macro_x0(), v, c.o.delta, opt));
    }
    throw ValidationError("unknown study '" + kind + "'");
}

void emit(const Output& r, const Options& o, std::ostream& out) {
    std::string text = o.format == "json" ? dump_json(csv_as_json(r.table, r.meta)) + "\n"
                       : r.text.empty()   ? csv_to_string(r.table)
                                          : r.text;
    if (o.out.empty()) out << text;
    else write_file(o.out, text);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Large-deviation toolkit for density-scaled jump processes", "jumpldp"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    auto common = [&o](CLI::App* s) {
        s->add_option("--model", o.model, "Model JSON file or builtin id (see list-models)");
        s->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
        s->add_option("--out", o.out, "Output file (default stdout)");
        s->add_option("--jobs", o.jobs, "Worker threads, 0 = logical CPUs")->capture_default_str();
        s->add_option("--seed", o.seed, "Base random seed")->capture_default_str();
        s->add_option("--cover", o.cover, "Cover JSON file (default: builtin cover)");
    };
    auto sub = [&](const char* name, const char* help) {
        auto* s = app.add_subcommand(name, help);
        common(s);
        return s;
    };

    auto* list = app.add_subcommand("list-models", "List builtin models");
    list->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    list->add_option("--out", o.out, "Output file");

    auto* simulate = sub("simulate", "Exact stochastic simulation; trajectory CSV");
    auto* flux_sim = sub("flux-simulate", "Simulation with per-reaction flux columns");
    for (auto* s : {simulate, flux_sim}) {
        s->add_option("--v", o.v, "Volume scale")->default_str("100");
        s->add_option("--x0", o.x0, "Macroscopic start, comma separated (rounded to the lattice)");
        s->add_option("--t-max", o.t_max, "Horizon")->capture_default_str();
    }
    auto* exact = sub("exact", "Transient distribution by uniformization");
    exact->add_option("--v", o.v, "Volume scale")->default_str("100");
    exact->add_option("--x0", o.x0, "Macroscopic start");
    exact->add_option("--t", o.t, "Time")->capture_default_str();
    exact->add_option("--cap", o.cap, "State cap as a multiple of v")->capture_default_str();
    exact->add_option("--tol", o.tol, "Poisson tail tolerance")->capture_default_str();

    auto* rate = sub("rate", "Lagrangian at a point and velocity");
    rate->add_option("--x", o.x, "State")->required();
    rate->add_option("--y", o.y, "Velocity")->required();

    auto* action = sub("action", "Action of a piecewise-linear path CSV");
    action->add_option("--path", o.path, "Path CSV (t,x_1..x_d)")->required();
    auto* flux_action_cmd = sub("flux-action", "Flux action of a path and a flux path");
    flux_action_cmd->add_option("--path", o.path, "Path CSV")->required();
    flux_action_cmd->add_option("--flux", o.flux, "Flux CSV (t,w_1..w_R); default: induced optimal flux");
    flux_action_cmd->add_option("--pieces", o.pieces, "Pieces per segment for the induced flux")->capture_default_str();

    auto* fluid = sub("fluid", "Fluid-limit ODE path");
    fluid->add_option("--x0", o.x0, "Macroscopic start");
    fluid->add_option("--t-max", o.t_max, "Horizon")->capture_default_str();
    fluid->add_option("--steps", o.steps, "RK4 steps")->capture_default_str();

    auto* shift = sub("shift-path", "Boundary-clearing shifted path");
    auto* breakup = sub("verify-breakup", "Check the shifted-path geometry");
    for (auto* s : {shift, breakup}) {
        s->add_option("--path", o.path, "Path CSV (default: random path of the builtin)");
        s->add_option("--delta", o.delta, "Tube radius")->capture_default_str();
        s->add_option("--t-max", o.t_max, "Horizon of the random path")->capture_default_str();
        s->add_option("--segments", o.segments, "Segments of the random path")->capture_default_str();
    }

    std::string audit_kind, study_kind;
    auto* audit = sub("audit", "Assumption audits");
    audit->add_option("kind", audit_kind, "convergence|aleph|decay|fast|cone|escape-seq")
        ->required()
        ->check(CLI::IsMember({"convergence", "aleph", "decay", "fast", "cone", "escape-seq"}));
    audit->add_option("--v", o.v, "Volume ladder");
    audit->add_option("--x0", o.x0, "Macroscopic start");
    audit->add_option("--x", o.x, "Boundary point (cone)");
    audit->add_option("--rho", o.rho, "Distance ladder")->default_str("2^-3..2^-12");
    audit->add_option("--alpha", o.alpha, "Decay exponents")->default_str("0.25,0.5,0.9");
    audit->add_option("--reaction", o.reaction, "Reaction index (decay)")->capture_default_str();
    audit->add_option("--region", o.region, "Cover region (default: first boundary region)");

    auto* study = sub("study", "End-to-end studies");
    study->add_option("kind", study_kind, "marginal|minimize|diverge|escape-event")
        ->required()
        ->check(CLI::IsMember({"marginal", "minimize", "diverge", "escape-event"}));
    study->add_option("--v", o.v, "Volume ladder");
    study->add_option("--x0", o.x0, "Macroscopic start");
    study->add_option("--t", o.t, "Event time (marginal)")->capture_default_str();
    study->add_option("--t-max", o.t_max, "Horizon (minimize, diverge)")->capture_default_str();
    study->add_option("--delta", o.delta, "Event threshold (marginal) or tube radius (escape-event)")
        ->capture_default_str();
    study->add_option("--coord", o.coord, "Coordinate of the marginal event x_coord >= delta")->capture_default_str();
    study->add_option("--mode", o.mode, "exact or mc")->check(CLI::IsMember({"exact", "mc"}))->capture_default_str();
    study->add_option("--cap", o.cap, "State cap as a multiple of v")->capture_default_str();
    study->add_option("--tol", o.tol, "Poisson tail tolerance")->default_str("1e-60");
    study->add_option("--trials", o.trials, "Monte Carlo trials")->capture_default_str();
    study->add_option("--expected", o.expected, "Expected limit (marginal)");
    study->add_option("--target", o.target, "Endpoint (minimize, diverge)");
    study->add_option("--grid", o.grid, "Grid segments (minimize)")->capture_default_str();
    study->add_option("--max-iter", o.max_iter, "Iteration cap (minimize)")->capture_default_str();
    study->add_option("--path", o.path, "Path CSV (diverge)");
    study->add_option("--eps", o.eps, "Epsilon ladder (diverge)")->default_str("2^-4..2^-12");
    study->add_option("--k", o.k, "Model constant for the divergence verdict")->capture_default_str();
    study->add_option("--region", o.region, "Cover region (escape-event)");
    study->add_option("--aleph", o.aleph, "Rate-ratio constant (escape-event)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (study->parsed() && o.tol == 1e-12) o.tol = 1e-60;
        Output r;
        if (list->parsed()) {
            r = cmd_list_models();
        } else {
            Context c(o);
            if (simulate->parsed()) r = cmd_simulate(c, false);
            else if (flux_sim->parsed()) r = cmd_simulate(c, true);
            else if (exact->parsed()) r = cmd_exact(c);
            else if (rate->parsed()) r = cmd_rate(c);
            else if (action->parsed()) r = cmd_action(c);
            else if (flux_action_cmd->parsed()) r = cmd_flux_action(c);
            else if (fluid->parsed()) r = cmd_fluid(c);
            else if (shift->parsed()) r = cmd_shift_path(c);
            else if (breakup->parsed()) r = cmd_verify_breakup(c);
            else if (audit->parsed()) r = cmd_audit(c, audit_kind);
            else r = cmd_study(c, study_kind);
        }
        emit(r, o, out);
        return 0;
    } catch (const ValidationError& e) {
        err << "jumpldp: invalid input: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        err << "jumpldp: numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "jumpldp: numeric failure: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace jumpldp
