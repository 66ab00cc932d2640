#include "specsched/space.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace specsched {

Spacing spacing_from_string(const std::string& s) {
    if (s == "linear") return Spacing::Linear;
    if (s == "geometric") return Spacing::Geometric;
    throw std::invalid_argument("unknown spacing '" + s + "' (expected linear|geometric)");
}

std::string to_string(Spacing s) {
    return s == Spacing::Linear ? "linear" : "geometric";
}

SpecificationSpace::SpecificationSpace(std::vector<Dimension> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw std::invalid_argument("SpecificationSpace: no dimensions");
    for (const auto& d : dims_) {
        if (!(d.lower < d.upper))
            throw std::invalid_argument("dimension '" + d.name + "': lower must be < upper");
        if (d.bins < 2)
            throw std::invalid_argument("dimension '" + d.name + "': bins must be >= 2");
        if (d.spacing == Spacing::Geometric && d.lower <= 0.0)
            throw std::invalid_argument("dimension '" + d.name +
                                        "': geometric spacing needs lower > 0");
    }
}

std::size_t SpecificationSpace::grid_size() const {
    std::size_t n = 1;
    for (const auto& d : dims_) n *= static_cast<std::size_t>(d.bins);
    return n;
}

double SpecificationSpace::grid_value(std::size_t dim, std::size_t bin) const {
    const Dimension& d = dims_.at(dim);
    if (bin >= static_cast<std::size_t>(d.bins))
        throw std::out_of_range("grid_value: bin out of range");
    const double t = static_cast<double>(bin) / static_cast<double>(d.bins - 1);
    if (d.spacing == Spacing::Linear) return d.lower + t * (d.upper - d.lower);
    return d.lower * std::pow(d.upper / d.lower, t);
}

std::vector<std::size_t> SpecificationSpace::bins_of(std::size_t index) const {
    if (index >= grid_size()) throw std::out_of_range("bins_of: index out of range");
    std::vector<std::size_t> bins(dims_.size());
    for (std::size_t d = dims_.size(); d-- > 0;) {
        const auto n = static_cast<std::size_t>(dims_[d].bins);
        bins[d] = index % n;
        index /= n;
    }
    return bins;
}

std::size_t SpecificationSpace::index_of(const std::vector<std::size_t>& bins) const {
    if (bins.size() != dims_.size()) throw std::invalid_argument("index_of: rank mismatch");
    std::size_t idx = 0;
    for (std::size_t d = 0; d < dims_.size(); ++d) {
        const auto n = static_cast<std::size_t>(dims_[d].bins);
        if (bins[d] >= n) throw std::out_of_range("index_of: bin out of range");
        idx = idx * n + bins[d];
    }
    return idx;
}

std::vector<double> SpecificationSpace::point(std::size_t index) const {
    const auto bins = bins_of(index);
    std::vector<double> coords(dims_.size());
    for (std::size_t d = 0; d < dims_.size(); ++d) coords[d] = grid_value(d, bins[d]);
    return coords;
}

Specification SpecificationSpace::spec_from_point(const std::vector<double>& coords) const {
    if (coords.size() != dims_.size())
        throw std::invalid_argument("spec_from_point: rank mismatch");
    Specification s;
    for (std::size_t d = 0; d < dims_.size(); ++d) {
        const std::string& name = dims_[d].name;
        if (name == "sigma") {
            s.sigma = coords[d];
            s.sigma_active = true;
        } else if (name == "alpha") {
            s.alpha = coords[d];
            s.alpha_active = true;
        } else if (name == "beta") {
            s.beta = coords[d];
            s.beta_active = true;
        } else {
            throw std::invalid_argument("dimension '" + name +
                                        "' does not map to a noise parameter");
        }
    }
    return s;
}

Specification SpecificationSpace::spec_at(std::size_t index) const {
    return spec_from_point(point(index));
}

std::vector<std::size_t> SpecificationSpace::corner_indices() const {
    const std::size_t n = dims_.size();
    std::vector<std::size_t> out;
    out.reserve(static_cast<std::size_t>(1) << n);
    for (std::size_t mask = 0; mask < (static_cast<std::size_t>(1) << n); ++mask) {
        std::vector<std::size_t> bins(n);
        for (std::size_t d = 0; d < n; ++d)
            bins[d] = (mask >> (n - 1 - d)) & 1 ? static_cast<std::size_t>(dims_[d].bins) - 1 : 0;
        out.push_back(index_of(bins));
    }
    std::sort(out.begin(), out.end());
    return out;
}

double SpecificationSpace::normalize(std::size_t dim, double value) const {
    const Dimension& d = dims_.at(dim);
    if (d.spacing == Spacing::Linear) return (value - d.lower) / (d.upper - d.lower);
    return (std::log(value) - std::log(d.lower)) / (std::log(d.upper) - std::log(d.lower));
}

}  // namespace specsched
