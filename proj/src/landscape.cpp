#include "specsched/landscape.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace specsched {

namespace {

double normalize_coord(const Dimension& d, double value) {
    if (d.spacing == Spacing::Linear) return (value - d.lower) / (d.upper - d.lower);
    return (std::log(value) - std::log(d.lower)) / (std::log(d.upper) - std::log(d.lower));
}

std::vector<double> normalize_point(const std::vector<Dimension>& dims,
                                    const std::vector<double>& coords) {
    if (coords.size() != dims.size())
        throw std::invalid_argument("point rank does not match dimension count");
    std::vector<double> s(coords.size());
    for (std::size_t d = 0; d < dims.size(); ++d) s[d] = normalize_coord(dims[d], coords[d]);
    return s;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

int min_samples(int n) {
    if (n < 1) throw std::invalid_argument("min_samples: n must be >= 1");
    return (n + 1) * (n + 2) / 2 + 1;
}

int n_coefficients(int n, int degree) {
    // C(n + degree, degree)
    long long num = 1, den = 1;
    for (int i = 1; i <= degree; ++i) {
        num *= n + i;
        den *= i;
    }
    return static_cast<int>(num / den);
}

std::vector<std::size_t> sparse_design(const SpecificationSpace& space, int n_random,
                                       RandomStream& rng) {
    if (n_random < 0) throw std::invalid_argument("sparse_design: n_random must be >= 0");
    std::vector<std::size_t> design = space.corner_indices();
    const int needed = min_samples(static_cast<int>(space.ndims()));
    if (static_cast<int>(design.size()) + n_random < needed)
        throw std::invalid_argument("sparse_design: corners + n_random = " +
                                    std::to_string(design.size() + n_random) +
                                    " samples, need at least " + std::to_string(needed));

    // Draw from the non-corner grid points without replacement.
    std::vector<std::size_t> pool;
    pool.reserve(space.grid_size());
    for (std::size_t i = 0; i < space.grid_size(); ++i)
        if (!std::binary_search(design.begin(), design.end(), i)) pool.push_back(i);
    if (static_cast<std::size_t>(n_random) > pool.size())
        throw std::invalid_argument("sparse_design: grid too small for n_random draws");
    for (int k = 0; k < n_random; ++k) {
        const std::size_t j = k + rng.below(pool.size() - k);
        std::swap(pool[k], pool[j]);
        design.push_back(pool[k]);
    }
    return design;
}

std::vector<std::vector<int>> monomial_exponents(int n, int degree) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(n, 0);
    // Enumerate by total degree, lexicographic within each degree.
    auto rec = [&](auto&& self, int dim, int remaining) -> void {
        if (dim == n) {
            if (remaining == 0) out.push_back(cur);
            return;
        }
        for (int e = remaining; e >= 0; --e) {
            cur[dim] = e;
            self(self, dim + 1, remaining - e);
        }
        cur[dim] = 0;
    };
    for (int total = 0; total <= degree; ++total) rec(rec, 0, total);
    return out;
}

double eval_polynomial(const std::vector<double>& coeffs,
                       const std::vector<std::vector<int>>& exponents,
                       const std::vector<double>& point) {
    double acc = 0.0;
    for (std::size_t m = 0; m < exponents.size(); ++m) {
        double term = coeffs[m];
        for (std::size_t d = 0; d < point.size(); ++d)
            for (int e = 0; e < exponents[m][d]; ++e) term *= point[d];
        acc += term;
    }
    return acc;
}

std::vector<double> fit_polynomial(const std::vector<std::vector<double>>& normalized_points,
                                   const std::vector<double>& values, int degree, double ridge) {
    if (normalized_points.size() != values.size())
        throw std::invalid_argument("fit_polynomial: point/value count mismatch");
    if (normalized_points.empty()) throw std::invalid_argument("fit_polynomial: no samples");
    if (ridge < 0.0) throw std::invalid_argument("fit_polynomial: ridge must be >= 0");
    const int n = static_cast<int>(normalized_points.front().size());
    const auto exps = monomial_exponents(n, degree);
    const int p = static_cast<int>(exps.size());
    const int m = static_cast<int>(normalized_points.size());
    if (m < p)
        throw std::invalid_argument("fit_polynomial: " + std::to_string(m) + " samples for " +
                                    std::to_string(p) + " coefficients");

    Eigen::MatrixXd X(m, p);
    Eigen::VectorXd y(m);
    for (int i = 0; i < m; ++i) {
        y(i) = values[i];
        for (int j = 0; j < p; ++j) {
            double term = 1.0;
            for (int d = 0; d < n; ++d)
                for (int e = 0; e < exps[j][d]; ++e) term *= normalized_points[i][d];
            X(i, j) = term;
        }
    }

    if (ridge == 0.0) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        if (sv(sv.size() - 1) <= 0.0 || sv(0) / sv(sv.size() - 1) > 1e12)
            throw std::runtime_error(
                "fit_polynomial: design matrix is rank deficient (relative condition > 1e12) "
                "and ridge is 0");
        Eigen::VectorXd w = svd.solve(y);
        return std::vector<double>(w.data(), w.data() + p);
    }

    // Augment with sqrt(ridge) rows; the intercept stays unpenalized.
    Eigen::MatrixXd Xa = Eigen::MatrixXd::Zero(m + p - 1, p);
    Eigen::VectorXd ya = Eigen::VectorXd::Zero(m + p - 1);
    Xa.topRows(m) = X;
    ya.head(m) = y;
    int row = m;
    const double sr = std::sqrt(ridge);
    for (int j = 0; j < p; ++j) {
        const bool intercept =
            std::all_of(exps[j].begin(), exps[j].end(), [](int e) { return e == 0; });
        if (intercept) continue;
        Xa(row++, j) = sr;
    }
    Eigen::VectorXd w = Xa.colPivHouseholderQr().solve(ya);
    return std::vector<double>(w.data(), w.data() + p);
}

QuadraticModel::QuadraticModel(std::vector<Dimension> dims, std::vector<double> A,
                               std::vector<double> b, double c, double ridge, int degree)
    : dims_(std::move(dims)), A_(std::move(A)), b_(std::move(b)), c_(c), ridge_(ridge),
      degree_(degree) {
    const std::size_t n = dims_.size();
    if (A_.size() != n * n || b_.size() != n)
        throw std::invalid_argument("QuadraticModel: coefficient shape mismatch");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (std::fabs(A_[i * n + j] - A_[j * n + i]) > 1e-12 * (1.0 + std::fabs(A_[i * n + j])))
                throw std::invalid_argument("QuadraticModel: A must be symmetric");
}

QuadraticModel::Prediction QuadraticModel::predict(const std::vector<double>& coords) const {
    if (coords.size() != dims_.size())
        throw std::invalid_argument("predict: point rank does not match model");
    Prediction out;
    const std::size_t n = dims_.size();
    std::vector<double> s = normalize_point(dims_, coords);
    for (std::size_t d = 0; d < n; ++d)
        if (s[d] < -1e-12 || s[d] > 1.0 + 1e-12) out.extrapolated = true;
    double v = c_;
    for (std::size_t i = 0; i < n; ++i) {
        v += b_[i] * s[i];
        for (std::size_t j = 0; j < n; ++j) v += s[i] * A_[i * n + j] * s[j];
    }
    out.value = v;
    return out;
}

QuadraticModel::Prediction QuadraticModel::predict(const Specification& theta) const {
    std::vector<double> coords(dims_.size());
    for (std::size_t d = 0; d < dims_.size(); ++d) {
        const std::string& name = dims_[d].name;
        if (name == "sigma")
            coords[d] = theta.sigma;
        else if (name == "alpha")
            coords[d] = theta.alpha;
        else if (name == "beta")
            coords[d] = theta.beta;
        else
            throw std::invalid_argument("predict: dimension '" + name +
                                        "' is not a noise parameter");
    }
    return predict(coords);
}

double QuadraticModel::coefficient_norm() const {
    double acc = 0.0;
    for (double v : A_) acc += v * v;
    for (double v : b_) acc += v * v;
    return std::sqrt(acc);
}

QuadraticModel fit_quadratic(const std::vector<Dimension>& dims,
                             const std::vector<std::vector<double>>& points,
                             const std::vector<double>& values, double ridge, int degree) {
    if (degree != 1 && degree != 2)
        throw std::invalid_argument("fit_quadratic: degree must be 1 or 2");
    const int n = static_cast<int>(dims.size());
    if (static_cast<int>(points.size()) < min_samples(n))
        throw std::invalid_argument("fit_quadratic: need at least " +
                                    std::to_string(min_samples(n)) + " samples, got " +
                                    std::to_string(points.size()));

    // Sort rows so the fit is bit-identical under input permutation.
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (points[a] != points[b]) return points[a] < points[b];
        return values[a] < values[b];
    });

    std::vector<std::vector<double>> norm(points.size());
    std::vector<double> y(points.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        norm[i] = normalize_point(dims, points[order[i]]);
        y[i] = values[order[i]];
    }

    const auto exps = monomial_exponents(n, degree);
    const auto coeffs = fit_polynomial(norm, y, degree, ridge);

    std::vector<double> A(static_cast<std::size_t>(n) * n, 0.0);
    std::vector<double> b(n, 0.0);
    double c = 0.0;
    for (std::size_t m = 0; m < exps.size(); ++m) {
        const auto& e = exps[m];
        const int total = std::accumulate(e.begin(), e.end(), 0);
        if (total == 0) {
            c = coeffs[m];
        } else if (total == 1) {
            for (int d = 0; d < n; ++d)
                if (e[d] == 1) b[d] = coeffs[m];
        } else {
            int i = -1, j = -1;
            for (int d = 0; d < n; ++d) {
                if (e[d] == 2) i = j = d;
                if (e[d] == 1) (i < 0 ? i : j) = d;
            }
            if (i == j) {
                A[static_cast<std::size_t>(i) * n + i] = coeffs[m];
            } else {
                A[static_cast<std::size_t>(i) * n + j] = coeffs[m] / 2.0;
                A[static_cast<std::size_t>(j) * n + i] = coeffs[m] / 2.0;
            }
        }
    }
    return QuadraticModel(dims, std::move(A), std::move(b), c, ridge, degree);
}

std::vector<double> sample_coords(const SpecificationSpace& space, const LandscapeSample& s) {
    std::vector<double> coords(space.ndims());
    for (std::size_t d = 0; d < space.ndims(); ++d) {
        const std::string& name = space.dims()[d].name;
        if (name == "sigma")
            coords[d] = s.theta.sigma;
        else if (name == "alpha")
            coords[d] = s.theta.alpha;
        else if (name == "beta")
            coords[d] = s.theta.beta;
        else
            throw std::invalid_argument("sample_coords: dimension '" + name +
                                        "' is not a noise parameter");
    }
    return coords;
}

QuadraticModel fit_quadratic(const SpecificationSpace& space,
                             const std::vector<LandscapeSample>& samples, double ridge,
                             int degree) {
    std::vector<std::vector<double>> points;
    std::vector<double> values;
    points.reserve(samples.size());
    values.reserve(samples.size());
    for (const auto& s : samples) {
        points.push_back(sample_coords(space, s));
        values.push_back(s.psnr_db);
    }
    return fit_quadratic(space.dims(), points, values, ridge, degree);
}

CrossValidationResult cross_validate(const std::vector<Dimension>& dims,
                                     const std::vector<std::vector<double>>& points,
                                     const std::vector<double>& values,
                                     const std::vector<int>& degrees,
                                     const std::vector<double>& ridges) {
    if (degrees.empty() || ridges.empty())
        throw std::invalid_argument("cross_validate: empty candidate set");
    const int n = static_cast<int>(dims.size());
    const int m = static_cast<int>(points.size());
    const int max_degree = *std::max_element(degrees.begin(), degrees.end());
    if (m - 1 < n_coefficients(n, max_degree))
        throw std::invalid_argument("cross_validate: not enough samples for leave-one-out at "
                                    "degree " + std::to_string(max_degree));

    std::vector<std::vector<double>> norm(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) norm[i] = normalize_point(dims, points[i]);

    double y_scale = 0.0;
    for (double v : values) y_scale += v * v;
    y_scale /= static_cast<double>(m);

    CrossValidationResult result;
    result.mean_heldout_error = std::numeric_limits<double>::infinity();
    for (int degree : degrees) {
        const auto exps = monomial_exponents(n, degree);
        for (double ridge : ridges) {
            double err = 0.0;
            bool failed = false;
            for (int hold = 0; hold < m && !failed; ++hold) {
                std::vector<std::vector<double>> tp;
                std::vector<double> tv;
                tp.reserve(m - 1);
                tv.reserve(m - 1);
                for (int i = 0; i < m; ++i) {
                    if (i == hold) continue;
                    tp.push_back(norm[i]);
                    tv.push_back(values[i]);
                }
                try {
                    const auto coeffs = fit_polynomial(tp, tv, degree, ridge);
                    const double pred = eval_polynomial(coeffs, exps, norm[hold]);
                    const double d = pred - values[hold];
                    err += d * d;
                } catch (const std::runtime_error&) {
                    failed = true;
                }
            }
            const double mean_err =
                failed ? std::numeric_limits<double>::infinity() : err / static_cast<double>(m);
            result.table.emplace_back(degree, ridge, mean_err);

            // Tie tolerance: residuals at floating-point noise level count as
            // equal, then lower degree wins, then larger ridge.
            const double best = result.mean_heldout_error;
            const double tol = 1e-6 * std::min(best, mean_err) + 1e-12 * y_scale;
            bool better;
            if (std::fabs(mean_err - best) <= tol) {
                better = degree < result.degree ||
                         (degree == result.degree && ridge > result.ridge);
            } else {
                better = mean_err < best;
            }
            if (better) {
                result.degree = degree;
                result.ridge = ridge;
                result.mean_heldout_error = mean_err;
            }
        }
    }
    return result;
}

std::string QuadraticModel::to_json() const {
    nlohmann::json j;
    j["degree"] = degree_;
    j["ridge"] = ridge_;
    j["c"] = c_;
    j["b"] = b_;
    j["A"] = A_;  // row-major
    j["dims"] = nlohmann::json::array();
    j["normalizer"] = nlohmann::json::array();
    for (const auto& d : dims_) {
        j["dims"].push_back({{"name", d.name},
                             {"lower", d.lower},
                             {"upper", d.upper},
                             {"bins", d.bins},
                             {"spacing", to_string(d.spacing)}});
        const bool log = d.spacing == Spacing::Geometric;
        const double lo = log ? std::log(d.lower) : d.lower;
        const double hi = log ? std::log(d.upper) : d.upper;
        j["normalizer"].push_back({{"log", log}, {"offset", lo}, {"scale", 1.0 / (hi - lo)}});
    }
    return j.dump(2);
}

QuadraticModel QuadraticModel::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    std::vector<Dimension> dims;
    for (const auto& dj : j.at("dims")) {
        Dimension d;
        d.name = dj.at("name").get<std::string>();
        d.lower = dj.at("lower").get<double>();
        d.upper = dj.at("upper").get<double>();
        d.bins = dj.at("bins").get<int>();
        d.spacing = spacing_from_string(dj.at("spacing").get<std::string>());
        dims.push_back(d);
    }
    return QuadraticModel(dims, j.at("A").get<std::vector<double>>(),
                          j.at("b").get<std::vector<double>>(), j.at("c").get<double>(),
                          j.at("ridge").get<double>(), j.at("degree").get<int>());
}

void QuadraticModel::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << to_json() << "\n";
}

QuadraticModel QuadraticModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read model file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

void write_landscape_csv(const std::string& path, const std::vector<LandscapeSample>& samples,
                         const std::vector<std::pair<std::string, std::string>>& metadata) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write landscape CSV: " + path);
    for (const auto& [k, v] : metadata) out << "# " << k << "=" << v << "\n";
    out << "sigma,alpha,beta,psnr_db,n_eval,seed,source\n";
    for (const auto& s : samples) {
        out << format_double(s.theta.sigma) << "," << format_double(s.theta.alpha) << ","
            << format_double(s.theta.beta) << "," << format_double(s.psnr_db) << "," << s.n_eval
            << "," << s.seed << "," << s.source << "\n";
    }
}

std::vector<std::pair<std::string, std::string>> read_csv_metadata(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read CSV: " + path);
    std::vector<std::pair<std::string, std::string>> meta;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] != '#') break;
        std::string body = line.substr(1);
        const auto start = body.find_first_not_of(' ');
        if (start == std::string::npos) continue;
        body = body.substr(start);
        const auto eq = body.find('=');
        if (eq == std::string::npos) continue;
        meta.emplace_back(body.substr(0, eq), body.substr(eq + 1));
    }
    return meta;
}

std::vector<LandscapeSample> read_landscape_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read landscape CSV: " + path);
    std::vector<LandscapeSample> samples;
    std::string line;
    bool header_seen = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != "sigma,alpha,beta,psnr_db,n_eval,seed,source")
                throw std::runtime_error(path + ": unexpected header '" + line + "'");
            header_seen = true;
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (fields.size() != 7)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 7 fields, got " + std::to_string(fields.size()));
        LandscapeSample s;
        s.theta.sigma = std::stod(fields[0]);
        s.theta.alpha = std::stod(fields[1]);
        s.theta.beta = std::stod(fields[2]);
        s.theta.sigma_active = s.theta.sigma != 0.0;
        s.theta.alpha_active = s.theta.alpha != 0.0;
        s.theta.beta_active = s.theta.beta != 1.0;
        s.psnr_db = std::stod(fields[3]);
        s.n_eval = std::stoi(fields[4]);
        s.seed = std::stoull(fields[5]);
        s.source = fields[6];
        if (!std::isfinite(s.psnr_db))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": non-finite psnr");
        samples.push_back(std::move(s));
    }
    if (!header_seen) throw std::runtime_error(path + ": missing header row");
    return samples;
}

}  // namespace specsched
