#include "specsched/sampling.hpp"

#include <cmath>
#include <stdexcept>

namespace specsched {

SamplingDistribution SamplingDistribution::uniform(std::size_t n) {
    if (n == 0) throw std::invalid_argument("SamplingDistribution: empty grid");
    SamplingDistribution d;
    d.weights.assign(n, 1.0 / static_cast<double>(n));
    return d;
}

SamplingDistribution SamplingDistribution::point_mass(std::size_t n, std::size_t at) {
    if (at >= n) throw std::invalid_argument("SamplingDistribution: point mass out of range");
    SamplingDistribution d;
    d.weights.assign(n, 0.0);
    d.weights[at] = 1.0;
    return d;
}

void SamplingDistribution::validate() const {
    if (weights.empty()) throw std::invalid_argument("SamplingDistribution: empty");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("SamplingDistribution: negative weight");
        sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("SamplingDistribution: weights sum to " +
                                    std::to_string(sum) + ", expected 1");
}

}  // namespace specsched
