#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "specsched/noise.hpp"

namespace specsched {

enum class Spacing { Linear, Geometric };

Spacing spacing_from_string(const std::string& s);
std::string to_string(Spacing s);

struct Dimension {
    std::string name;  // "sigma", "alpha", "beta", or a free-form coordinate
    double lower = 0.0;
    double upper = 0.0;
    int bins = 2;
    Spacing spacing = Spacing::Geometric;
};

// A bounded box of noise parameters discretized into a finite grid.
// Grid indices are row-major with the last dimension fastest.
class SpecificationSpace {
public:
    explicit SpecificationSpace(std::vector<Dimension> dims);

    const std::vector<Dimension>& dims() const { return dims_; }
    std::size_t ndims() const { return dims_.size(); }
    std::size_t grid_size() const;

    // Value of grid point `bin` along dimension `dim`; endpoints included.
    double grid_value(std::size_t dim, std::size_t bin) const;

    std::vector<std::size_t> bins_of(std::size_t index) const;
    std::size_t index_of(const std::vector<std::size_t>& bins) const;

    // Raw coordinates of one grid point, in dimension order.
    std::vector<double> point(std::size_t index) const;

    // Grid point as a Specification; dimension names must be drawn from
    // {sigma, alpha, beta}. Unnamed dimensions stay inactive at their
    // no-noise values.
    Specification spec_at(std::size_t index) const;
    Specification spec_from_point(const std::vector<double>& coords) const;

    // Grid indices of the 2^n corner points, in ascending index order.
    std::vector<std::size_t> corner_indices() const;

    // Map a raw coordinate to [0,1] (log first for geometric dims).
    double normalize(std::size_t dim, double value) const;

private:
    std::vector<Dimension> dims_;
};

}  // namespace specsched
