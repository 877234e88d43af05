#include "jumpldp/path.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "jumpldp/errors.hpp"
#include "jumpldp/format.hpp"

namespace jumpldp {

MacroPath::MacroPath(std::vector<double> t, std::vector<Vec> z) : t_(std::move(t)), z_(std::move(z)) {
    if (t_.empty() || t_.size() != z_.size())
        throw ValidationError("path needs matching, nonempty time and point lists");
    for (size_t i = 0; i < t_.size(); ++i) {
        if (!std::isfinite(t_[i])) throw ValidationError("path time is not finite");
        if (i && t_[i] < t_[i - 1]) throw ValidationError("path times must be nondecreasing");
        if (z_[i].size() != z_[0].size()) throw ValidationError("path points differ in dimension");
        if (!z_[i].allFinite()) throw ValidationError("path point is not finite");
    }
}

size_t MacroPath::segment(double t) const {
    if (t_.size() < 2) return 0;
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    size_t i = static_cast<size_t>(it - t_.begin());
    if (i == 0) return 0;
    if (i >= t_.size()) return t_.size() - 2;
    return i - 1;
}

Vec MacroPath::operator()(double t) const {
    if (t <= t_.front()) return z_.front();
    if (t >= t_.back()) return z_.back();
    size_t i = segment(t);
    double h = t_[i + 1] - t_[i];
    if (h <= 0) return z_[i + 1];
    double s = (t - t_[i]) / h;
    return z_[i] + s * (z_[i + 1] - z_[i]);
}

Vec MacroPath::slope(size_t i) const {
    double h = t_[i + 1] - t_[i];
    if (h <= 0) return Vec::Zero(dim());
    return (z_[i + 1] - z_[i]) / h;
}

MacroPath MacroPath::restrict(double a, double b) const {
    a = std::max(a, t_.front());
    b = std::min(b, t_.back());
    if (b < a) throw ValidationError("empty restriction window");
    std::vector<double> t{a};
    std::vector<Vec> z{(*this)(a)};
    for (size_t i = 0; i < t_.size(); ++i) {
        if (t_[i] > a && t_[i] < b) {
            t.push_back(t_[i]);
            z.push_back(z_[i]);
        }
    }
    t.push_back(b);
    z.push_back((*this)(b));
    return MacroPath(std::move(t), std::move(z));
}

MacroPath MacroPath::shifted(double c) const {
    std::vector<double> t(t_);
    for (auto& s : t) s += c;
    return MacroPath(std::move(t), z_);
}

MacroPath parse_path_csv(const std::string& text) {
    auto table = parse_csv(text);
    if (table.header.empty() || table.header[0] != "t")
        throw ValidationError("path CSV must start with a 't' column");
    if (table.header.size() < 2) throw ValidationError("path CSV has no state columns");
    std::vector<double> t;
    std::vector<Vec> z;
    for (const auto& row : table.rows) {
        t.push_back(row[0]);
        Vec p(static_cast<Eigen::Index>(row.size() - 1));
        for (size_t j = 1; j < row.size(); ++j) p[static_cast<Eigen::Index>(j - 1)] = row[j];
        z.push_back(p);
    }
    return MacroPath(std::move(t), std::move(z));
}

MacroPath read_path_csv(const std::string& path) { return parse_path_csv(read_file(path)); }

std::string path_to_csv(const MacroPath& z) {
    std::ostringstream os;
    os << "t";
    for (int j = 0; j < z.dim(); ++j) os << ",x_" << (j + 1);
    os << "\n";
    for (size_t i = 0; i < z.size(); ++i) {
        os << fmt_double(z.time(i));
        for (int j = 0; j < z.dim(); ++j) os << "," << fmt_double(z.point(i)[j]);
        os << "\n";
    }
    return os.str();
}

std::vector<double> merged_times(const MacroPath& a, const MacroPath& b) {
    std::vector<double> t(a.times());
    t.insert(t.end(), b.times().begin(), b.times().end());
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

}  // namespace jumpldp
