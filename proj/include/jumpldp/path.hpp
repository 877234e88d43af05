#pragma once

#include <string>
#include <vector>

#include "jumpldp/network.hpp"

namespace jumpldp {

// Piecewise-linear path through breakpoints (t_i, z_i), t nondecreasing.
class MacroPath {
public:
    MacroPath() = default;
    MacroPath(std::vector<double> t, std::vector<Vec> z);

    size_t size() const { return t_.size(); }
    int dim() const { return z_.empty() ? 0 : static_cast<int>(z_[0].size()); }
    double t0() const { return t_.front(); }
    double T() const { return t_.back(); }
    const std::vector<double>& times() const { return t_; }
    const std::vector<Vec>& points() const { return z_; }
    double time(size_t i) const { return t_[i]; }
    const Vec& point(size_t i) const { return z_[i]; }

    // Value at t, clamped to [t0, T]. Right-continuous at repeated times.
    Vec operator()(double t) const;
    // Index i of the segment [t_i, t_{i+1}] containing t.
    size_t segment(double t) const;
    // Constant derivative on segment i (zero for zero-length segments).
    Vec slope(size_t i) const;

    // Copy restricted to [a, b] with interpolated end breakpoints.
    MacroPath restrict(double a, double b) const;
    MacroPath shifted(double c) const;

private:
    std::vector<double> t_;
    std::vector<Vec> z_;
};

MacroPath read_path_csv(const std::string& path);
MacroPath parse_path_csv(const std::string& text);
std::string path_to_csv(const MacroPath& z);

// Sorted union of the breakpoint times of a and b.
std::vector<double> merged_times(const MacroPath& a, const MacroPath& b);

}  // namespace jumpldp
