#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "specsched/rng.hpp"
#include "specsched/space.hpp"

namespace specsched {

struct LandscapeSample {
    Specification theta;
    double psnr_db = 0.0;
    int n_eval = 1;
    std::uint64_t seed = 0;
    std::string source = "ideal";  // ideal | current-model | external
};

// Smallest non-degenerate sample count that pins down a quadratic in n
// variables: (n+1)(n+2)/2 coefficients plus one.
int min_samples(int n);

// Number of monomials of total degree <= degree in n variables.
int n_coefficients(int n, int degree);

// Design = all 2^n grid corners plus n_random additional grid points drawn
// without replacement. Returns grid indices; throws if the total falls short
// of min_samples(n).
std::vector<std::size_t> sparse_design(const SpecificationSpace& space, int n_random,
                                       RandomStream& rng);

// Polynomial response-surface model on normalized coordinates. Degree <= 2
// is representable as P(s) = s^T A s + b^T s + c with A symmetric.
class QuadraticModel {
public:
    struct Prediction {
        double value = 0.0;
        bool extrapolated = false;
    };

    QuadraticModel() = default;
    QuadraticModel(std::vector<Dimension> dims, std::vector<double> A, std::vector<double> b,
                   double c, double ridge, int degree);

    const std::vector<Dimension>& dims() const { return dims_; }
    const std::vector<double>& A() const { return A_; }  // row-major n x n
    const std::vector<double>& b() const { return b_; }
    double c() const { return c_; }
    double ridge() const { return ridge_; }
    int degree() const { return degree_; }

    Prediction predict(const std::vector<double>& coords) const;
    Prediction predict(const Specification& theta) const;

    // L2 norm of (A, b), the penalized coefficient block.
    double coefficient_norm() const;

    std::string to_json() const;
    static QuadraticModel from_json(const std::string& text);
    void save(const std::string& path) const;
    static QuadraticModel load(const std::string& path);

private:
    std::vector<Dimension> dims_;
    std::vector<double> A_;
    std::vector<double> b_;
    double c_ = 0.0;
    double ridge_ = 0.0;
    int degree_ = 2;
};

inline constexpr double kDefaultRidge = 1e-5;

// Ridge least squares of a degree-1 or degree-2 polynomial on normalized
// coordinates. `points` are raw coordinates matching `dims`. The intercept
// is never penalized. With ridge 0 a relative condition number above 1e12
// raises an error instead of silently regularizing.
QuadraticModel fit_quadratic(const std::vector<Dimension>& dims,
                             const std::vector<std::vector<double>>& points,
                             const std::vector<double>& values, double ridge = kDefaultRidge,
                             int degree = 2);

QuadraticModel fit_quadratic(const SpecificationSpace& space,
                             const std::vector<LandscapeSample>& samples,
                             double ridge = kDefaultRidge, int degree = 2);

// Generic monomial-basis fit used internally and by cross-validation
// (degree up to 3). Returns coefficients in the order produced by
// monomial_exponents().
std::vector<double> fit_polynomial(const std::vector<std::vector<double>>& normalized_points,
                                   const std::vector<double>& values, int degree, double ridge);
std::vector<std::vector<int>> monomial_exponents(int n, int degree);
double eval_polynomial(const std::vector<double>& coeffs,
                       const std::vector<std::vector<int>>& exponents,
                       const std::vector<double>& point);

struct CrossValidationResult {
    int degree = 2;
    double ridge = 0.0;
    double mean_heldout_error = 0.0;
    // mean leave-one-out squared error per (degree, ridge) candidate
    std::vector<std::tuple<int, double, double>> table;
};

// Leave-one-out selection of (degree, ridge); ties break toward lower degree
// then larger ridge.
CrossValidationResult cross_validate(const std::vector<Dimension>& dims,
                                     const std::vector<std::vector<double>>& points,
                                     const std::vector<double>& values,
                                     const std::vector<int>& degrees,
                                     const std::vector<double>& ridges);

// Extract the raw coordinate vector of a sample along the space's dimensions.
std::vector<double> sample_coords(const SpecificationSpace& space, const LandscapeSample& s);

// Landscape CSV, columns exactly:
// sigma, alpha, beta, psnr_db, n_eval, seed, source
// Optional leading '# key=value' comment lines carry run metadata.
void write_landscape_csv(const std::string& path, const std::vector<LandscapeSample>& samples,
                         const std::vector<std::pair<std::string, std::string>>& metadata = {});
std::vector<LandscapeSample> read_landscape_csv(const std::string& path);
std::vector<std::pair<std::string, std::string>> read_csv_metadata(const std::string& path);

}  // namespace specsched
