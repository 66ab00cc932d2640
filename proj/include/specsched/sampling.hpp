#pragma once

#include <cstddef>
#include <vector>

namespace specsched {

// The dual variable lambda: nonnegative weights over the grid points of a
// SpecificationSpace, summing to 1.
struct SamplingDistribution {
    std::vector<double> weights;

    static SamplingDistribution uniform(std::size_t n);
    static SamplingDistribution point_mass(std::size_t n, std::size_t at);

    std::size_t size() const { return weights.size(); }
    void validate() const;  // throws if any weight < 0 or |sum - 1| > 1e-12
};

}  // namespace specsched
