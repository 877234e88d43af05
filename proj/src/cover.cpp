#include "jumpldp/cover.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jumpldp/errors.hpp"
#include "jumpldp/format.hpp"

namespace jumpldp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19};
}  // namespace

bool CoverRegion::contains(const Vec& x, double tol) const {
    for (const auto& h : halfspaces)
        if (h.a.dot(x) > h.b + tol * (1.0 + std::abs(h.b))) return false;
    return true;
}

double CoverRegion::margin(const Vec& x) const {
    double m = kInf;
    for (const auto& h : halfspaces) m = std::min(m, (h.b - h.a.dot(x)) / h.a.norm());
    return m;
}

double CoverRegion::boundary_distance(const Vec& x) const {
    double m = kInf;
    for (int i : boundary) {
        const auto& h = halfspaces[static_cast<size_t>(i)];
        m = std::min(m, (h.b - h.a.dot(x)) / h.a.norm());
    }
    return m;
}

double CoverRegion::exit_time(const Vec& x, const Vec& d, double tmax, double tol) const {
    double t = tmax;
    for (const auto& h : halfspaces) {
        double rate = h.a.dot(d);
        if (rate <= 0) continue;
        double slack = h.b + tol * (1.0 + std::abs(h.b)) - h.a.dot(x);
        t = std::min(t, std::max(0.0, slack / rate));
    }
    return t;
}

int Cover::dim() const { return regions.empty() ? 0 : static_cast<int>(regions[0].halfspaces[0].a.size()); }

double Cover::kappa_minus() const {
    double k = kInf;
    for (const auto& r : regions)
        if (r.is_boundary()) k = std::min(k, r.kappa);
    return std::isinf(k) ? 1.0 : k;
}

double Cover::clearance(const Vec& x) const {
    double m = kInf;
    for (const auto& r : regions) m = std::min(m, r.boundary_distance(x));
    return m;
}

namespace {

Vec json_vec(const nlohmann::json& j, const char* what) {
    if (!j.is_array() || j.empty()) throw ValidationError(std::string("cover: ") + what + " must be a nonempty array");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ValidationError(std::string("cover: ") + what + " must hold numbers");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

double json_num(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number()) throw ValidationError(std::string("cover: missing number '") + key + "'");
    return j[key].get<double>();
}

}  // namespace

Cover parse_cover(const std::string& text, const ReactionNetwork* net) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("cover: ") + e.what());
    }
    if (!j.is_object() || !j.contains("regions") || !j["regions"].is_array() || j["regions"].empty())
        throw ValidationError("cover: 'regions' must be a nonempty array");
    Cover c;
    c.eps = json_num(j, "eps");
    c.eps_prime = json_num(j, "eps_prime");
    c.eps_dblprime = json_num(j, "eps_dblprime");
    c.kappa_dblprime = json_num(j, "kappa_dblprime");
    if (!(c.eps > 0 && c.eps_prime > 0 && c.eps_dblprime > 0 && c.kappa_dblprime > 0))
        throw ValidationError("cover: eps, eps_prime, eps_dblprime and kappa_dblprime must be positive");
    int d = -1;
    for (size_t k = 0; k < j["regions"].size(); ++k) {
        const auto& jr = j["regions"][k];
        CoverRegion r;
        r.id = static_cast<int>(k);
        if (!jr.contains("halfspaces") || !jr["halfspaces"].is_array() || jr["halfspaces"].empty())
            throw ValidationError("cover: region needs halfspaces");
        for (const auto& jh : jr["halfspaces"]) {
            Halfspace h{json_vec(jh.at("a"), "a"), json_num(jh, "b")};
            if (d < 0) d = static_cast<int>(h.a.size());
            if (h.a.size() != d) throw ValidationError("cover: halfspace dimension mismatch");
            if (h.a.norm() == 0) throw ValidationError("cover: zero halfspace normal");
            r.halfspaces.push_back(h);
        }
        if (jr.contains("boundary"))
            for (const auto& b : jr["boundary"]) {
                int i = b.get<int>();
                if (i < 0 || i >= static_cast<int>(r.halfspaces.size()))
                    throw ValidationError("cover: boundary index out of range");
                r.boundary.push_back(i);
            }
        r.w = jr.contains("w") ? json_vec(jr["w"], "w") : Vec::Zero(d);
        if (r.w.size() != d) throw ValidationError("cover: w dimension mismatch");
        double wn = r.w.norm();
        if (wn != 0 && std::abs(wn - 1) > 1e-12) throw ValidationError("cover: w must be a unit vector or zero");
        r.kappa = jr.value("kappa", 0.0);
        if (r.is_boundary() && !(r.kappa > 0 && r.kappa < 1))
            throw ValidationError("cover: kappa must lie in (0, 1) for boundary regions");
        if (r.is_boundary() && wn == 0) throw ValidationError("cover: boundary region needs a unit w");
        if (jr.contains("escape"))
            for (const auto& e : jr["escape"]) r.escape.push_back(e.get<int>());
        if (net && !r.escape.empty()) {
            if (net->dim() != d) throw ValidationError("cover dimension does not match the network");
            Vec s = Vec::Zero(d);
            for (int e : r.escape) {
                if (e < 0 || e >= net->num_reactions()) throw ValidationError("cover: escape reaction out of range");
                s += net->gamma(e);
            }
            r.alpha = s.dot(r.w);
            if (!(r.alpha > 0) || (s - r.alpha * r.w).norm() > 1e-12 * (1 + s.norm()))
                throw ValidationError("cover: escape jumps must sum to a positive multiple of w");
        }
        c.regions.push_back(std::move(r));
    }
    if (!(c.kappa_dblprime < c.kappa_minus() / 3))
        throw ValidationError("cover: kappa_dblprime must be below kappa_minus / 3");
    return c;
}

Cover load_cover_file(const std::string& path, const ReactionNetwork* net) {
    return parse_cover(read_file(path), net);
}

nlohmann::json cover_to_json(const Cover& c) {
    nlohmann::json j;
    j["eps"] = c.eps;
    j["eps_prime"] = c.eps_prime;
    j["eps_dblprime"] = c.eps_dblprime;
    j["kappa_dblprime"] = c.kappa_dblprime;
    j["regions"] = nlohmann::json::array();
    for (const auto& r : c.regions) {
        nlohmann::json jr;
        jr["halfspaces"] = nlohmann::json::array();
        for (const auto& h : r.halfspaces)
            jr["halfspaces"].push_back({{"a", std::vector<double>(h.a.data(), h.a.data() + h.a.size())}, {"b", h.b}});
        jr["boundary"] = r.boundary;
        jr["w"] = std::vector<double>(r.w.data(), r.w.data() + r.w.size());
        jr["kappa"] = r.kappa;
        jr["escape"] = r.escape;
        j["regions"].push_back(jr);
    }
    return j;
}

double radical_inverse(std::uint64_t i, int base) {
    double f = 1.0 / base, r = 0.0, scale = f;
    while (i > 0) {
        r += static_cast<double>(i % static_cast<std::uint64_t>(base)) * scale;
        i /= static_cast<std::uint64_t>(base);
        scale *= f;
    }
    return r;
}

std::pair<Vec, Vec> bounding_box(const CoverRegion& r) {
    const int d = static_cast<int>(r.halfspaces[0].a.size());
    const int m = static_cast<int>(r.halfspaces.size());
    if (d > 3) throw ValidationError("bounding_box supports d <= 3");
    Vec lo = Vec::Constant(d, kInf), hi = Vec::Constant(d, -kInf);
    std::vector<int> pick(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) pick[static_cast<size_t>(i)] = i;
    bool any = false;
    while (m >= d) {
        Mat A(d, d);
        Vec b(d);
        for (int i = 0; i < d; ++i) {
            A.row(i) = r.halfspaces[static_cast<size_t>(pick[static_cast<size_t>(i)])].a.transpose();
            b[i] = r.halfspaces[static_cast<size_t>(pick[static_cast<size_t>(i)])].b;
        }
        Eigen::FullPivLU<Mat> lu(A);
        if (lu.rank() == d) {
            Vec x = lu.solve(b);
            if (r.contains(x, 1e-9)) {
                lo = lo.cwiseMin(x);
                hi = hi.cwiseMax(x);
                any = true;
            }
        }
        int k = d - 1;
        while (k >= 0 && pick[static_cast<size_t>(k)] == m - d + k) --k;
        if (k < 0) break;
        ++pick[static_cast<size_t>(k)];
        for (int i = k + 1; i < d; ++i) pick[static_cast<size_t>(i)] = pick[static_cast<size_t>(i - 1)] + 1;
    }
    if (!any) throw ValidationError("cover region is unbounded or empty");
    return {lo, hi};
}

std::vector<Vec> sample_region(const CoverRegion& r, int count) {
    auto [lo, hi] = bounding_box(r);
    const int d = static_cast<int>(lo.size());
    std::vector<Vec> out;
    for (std::uint64_t i = 1; static_cast<int>(out.size()) < count && i < static_cast<std::uint64_t>(count) * 64; ++i) {
        Vec x(d);
        for (int k = 0; k < d; ++k) x[k] = lo[k] + (hi[k] - lo[k]) * radical_inverse(i, kPrimes[k]);
        if (r.contains(x)) out.push_back(x);
    }
    return out;
}

std::vector<Vec> sample_near_boundary(const CoverRegion& r, double lo_d, double hi_d, int count) {
    if (!r.is_boundary()) throw ValidationError("region has no boundary facets");
    auto [lo, hi] = bounding_box(r);
    const int d = static_cast<int>(lo.size());
    const int nb = static_cast<int>(r.boundary.size());
    std::vector<Vec> out;
    for (std::uint64_t i = 1; static_cast<int>(out.size()) < count && i < static_cast<std::uint64_t>(count) * 64; ++i) {
        Vec x(d);
        for (int k = 0; k < d; ++k) x[k] = lo[k] + (hi[k] - lo[k]) * radical_inverse(i, kPrimes[k]);
        double s = lo_d + (hi_d - lo_d) * radical_inverse(i, kPrimes[d]);
        const auto& h = r.halfspaces[static_cast<size_t>(r.boundary[static_cast<size_t>(i % static_cast<std::uint64_t>(nb))])];
        double an = h.a.norm();
        x -= ((h.a.dot(x) - h.b) / (an * an)) * h.a;  // onto the facet hyperplane
        x -= (s / an) * h.a;                           // inward by s
        if (!r.contains(x)) continue;
        double bd = r.boundary_distance(x);
        if (bd >= lo_d && bd < hi_d) out.push_back(x);
    }
    return out;
}

}  // namespace jumpldp
