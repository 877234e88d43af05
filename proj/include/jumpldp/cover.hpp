#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "jumpldp/network.hpp"

namespace jumpldp {

struct Halfspace {
    Vec a;
    double b = 0.0;  // a . x <= b
};

struct CoverRegion {
    int id = 0;
    std::vector<Halfspace> halfspaces;
    std::vector<int> boundary;  // indices into halfspaces lying on the degenerate set
    Vec w;                      // unit escape direction, zero for interior regions
    double kappa = 0.0;
    std::vector<int> escape;    // reaction indices
    double alpha = 0.0;         // sum of escape jumps = alpha * w

    bool is_boundary() const { return !boundary.empty(); }
    bool contains(const Vec& x, double tol = 1e-12) const;
    // min over all facets of (b - a.x) / |a|; negative outside.
    double margin(const Vec& x) const;
    // min over boundary facets of (b - a.x) / |a|; +inf when there are none.
    double boundary_distance(const Vec& x) const;
    // Largest t in [0, tmax] with x + s d inside for all s <= t (x assumed inside).
    double exit_time(const Vec& x, const Vec& d, double tmax, double tol = 1e-12) const;
};

struct Cover {
    std::vector<CoverRegion> regions;
    double eps = 0.0;
    double eps_prime = 0.0;
    double eps_dblprime = 0.0;
    double kappa_dblprime = 0.0;

    int dim() const;
    // min of kappa over boundary regions; 1 when there are none.
    double kappa_minus() const;
    // Distance to the degenerate set measured through all boundary facets.
    double clearance(const Vec& x) const;
};

// Parses the cover JSON; when `net` is given, escape sequences are checked
// against it and alpha is derived.
Cover parse_cover(const std::string& text, const ReactionNetwork* net = nullptr);
Cover load_cover_file(const std::string& path, const ReactionNetwork* net = nullptr);
nlohmann::json cover_to_json(const Cover& c);

// Van der Corput radical inverse of i in the given base.
double radical_inverse(std::uint64_t i, int base);

// Axis-aligned bounding box of a region (vertex enumeration, d <= 3).
std::pair<Vec, Vec> bounding_box(const CoverRegion& r);

// Low-discrepancy points in the region whose boundary distance lies in
// [lo, hi) after moving inward from a boundary facet. Needs boundary facets.
std::vector<Vec> sample_near_boundary(const CoverRegion& r, double lo, double hi, int count);
// Low-discrepancy points inside the region.
std::vector<Vec> sample_region(const CoverRegion& r, int count);

}  // namespace jumpldp
