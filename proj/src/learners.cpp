#include "specsched/learners.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace fs = std::filesystem;

namespace specsched {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

double Model::psnr_db(const Specification&) const {
    throw std::runtime_error("Model: per-theta evaluation not supported by this model");
}

std::vector<double> Model::psnr_grid(const SpecificationSpace& space) const {
    std::vector<double> out(space.grid_size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = psnr_db(space.spec_at(i));
    return out;
}

// ---------------------------------------------------------------- shrinkage

double shrinkage_noise_variance(const Specification& theta, double S2, double m1,
                                const SpeckleConfig& cfg) {
    theta.validate(cfg);
    double v = 0.0;
    if (theta.sigma_active) v += theta.sigma * theta.sigma;
    if (theta.alpha_active) v += theta.alpha * m1;
    if (theta.beta_active) v += S2 * theta.beta / cfg.B;
    return v;
}

ShrinkageIdeal shrinkage_ideal(const Specification& theta, double S2, double m1,
                               const SpeckleConfig& cfg) {
    if (!(S2 > 0.0)) throw std::invalid_argument("shrinkage_ideal: S2 must be > 0");
    const double vbar = shrinkage_noise_variance(theta, S2, m1, cfg);
    ShrinkageIdeal out;
    out.c_star = S2 / (S2 + vbar);
    out.loss_star = S2 * vbar / (S2 + vbar);
    return out;
}

ShrinkageModel::ShrinkageModel(double c, double S2, double m1, SpeckleConfig cfg)
    : c_(c), S2_(S2), m1_(m1), cfg_(cfg) {
    if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("ShrinkageModel: c must be in [0,1]");
    if (!(S2 > 0.0)) throw std::invalid_argument("ShrinkageModel: S2 must be > 0");
}

double ShrinkageModel::expected_mse(const Specification& theta) const {
    const double vbar = shrinkage_noise_variance(theta, S2_, m1_, cfg_);
    return (1.0 - c_) * (1.0 - c_) * S2_ + c_ * c_ * vbar;
}

ImagePatch ShrinkageModel::denoise(const ImagePatch& y) const {
    ImagePatch out = y;
    for (auto& v : out.pixels) v *= c_;
    return out;
}

double ShrinkageModel::psnr_db(const Specification& theta) const {
    return psnr_from_loss(expected_mse(theta));
}

ShrinkageModel shrinkage_fit(const SamplingDistribution& lambda, double S2, double m1,
                             const SpecificationSpace& space, const SpeckleConfig& cfg) {
    lambda.validate();
    if (lambda.size() != space.grid_size())
        throw std::invalid_argument("shrinkage_fit: lambda size does not match grid");
    double expected_vbar = 0.0;
    for (std::size_t i = 0; i < lambda.size(); ++i)
        expected_vbar +=
            lambda.weights[i] * shrinkage_noise_variance(space.spec_at(i), S2, m1, cfg);
    return ShrinkageModel(S2 / (S2 + expected_vbar), S2, m1, cfg);
}

std::shared_ptr<const Model> ShrinkageLearner::fit(const SamplingDistribution& lambda,
                                                   const SpecificationSpace& space, int /*budget*/,
                                                   std::shared_ptr<const Model> /*warm_start*/) {
    // Closed-form fit; budget and warm start are irrelevant.
    return std::make_shared<ShrinkageModel>(shrinkage_fit(lambda, S2_, m1_, space, cfg_));
}

// ---------------------------------------------------------------- subspace

SubspaceProjector::SubspaceProjector(int n, int k, std::vector<double> basis) : n_(n), k_(k) {
    if (n < 1 || k < 1 || k > n) throw std::invalid_argument("SubspaceProjector: bad rank");
    if (basis.size() != static_cast<std::size_t>(n) * k)
        throw std::invalid_argument("SubspaceProjector: basis shape mismatch");
    Eigen::Map<Eigen::MatrixXd> Q(basis.data(), n, k);
    if ((Q.transpose() * Q - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("SubspaceProjector: basis is not orthonormal");
    Eigen::MatrixXd P = Q * Q.transpose();
    P_.resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) P_[static_cast<std::size_t>(i) * n + j] = P(i, j);
}

SubspaceProjector SubspaceProjector::random(int n, int k, RandomStream& rng,
                                            const std::vector<double>* contain) {
    if (contain && static_cast<int>(contain->size()) != n)
        throw std::invalid_argument("SubspaceProjector::random: contained vector has wrong size");
    Eigen::MatrixXd M(n, k);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < n; ++i) M(i, j) = rng.normal();
    if (contain)
        for (int i = 0; i < n; ++i) M(i, 0) = (*contain)[i];
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
    std::vector<double> basis(Q.data(), Q.data() + static_cast<std::size_t>(n) * k);
    return SubspaceProjector(n, k, std::move(basis));
}

std::vector<double> SubspaceProjector::project(const std::vector<double>& v) const {
    if (static_cast<int>(v.size()) != n_)
        throw std::invalid_argument("SubspaceProjector: vector size mismatch");
    std::vector<double> out(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n_; ++j) acc += P_[static_cast<std::size_t>(i) * n_ + j] * v[j];
        out[i] = acc;
    }
    return out;
}

double SubspaceProjector::trace() const {
    double acc = 0.0;
    for (int i = 0; i < n_; ++i) acc += P_[static_cast<std::size_t>(i) * n_ + i];
    return acc;
}

double subspace_loss_closed_form(const SubspaceProjector& proj, const std::vector<double>& x,
                                 double sigma, double alpha) {
    if (sigma < 0.0 || alpha < 0.0)
        throw std::invalid_argument("subspace_loss_closed_form: sigma and alpha must be >= 0");
    const auto px = proj.project(x);
    for (std::size_t i = 0; i < x.size(); ++i)
        if (std::fabs(px[i] - x[i]) > 1e-8)
            throw std::invalid_argument("subspace_loss_closed_form: x is not in the subspace");

    // tr(P diag(x) P^T) = sum_j x_j * sum_i P_ij^2
    const int n = proj.dim();
    const auto& P = proj.matrix();
    double tr = 0.0;
    for (int j = 0; j < n; ++j) {
        double col = 0.0;
        for (int i = 0; i < n; ++i) {
            const double p = P[static_cast<std::size_t>(i) * n + j];
            col += p * p;
        }
        tr += x[j] * col;
    }
    return proj.rank() * sigma * sigma + alpha * tr;
}

ImagePatch ProjectionModel::denoise(const ImagePatch& y) const {
    if (static_cast<int>(y.size()) != proj_.dim())
        throw std::invalid_argument("ProjectionModel: patch size does not match projector");
    ImagePatch out = y;
    out.pixels = proj_.project(y.pixels);
    return out;
}

// ------------------------------------------------------------- Monte Carlo

MonteCarloPsnr monte_carlo_psnr(const Model& model, const Specification& theta,
                                const std::vector<ImagePatch>& eval_patches, int n_draws,
                                const SpeckleConfig& cfg, RandomStream& rng) {
    if (n_draws < 1) throw std::invalid_argument("monte_carlo_psnr: n_draws must be >= 1");
    if (eval_patches.empty()) throw std::invalid_argument("monte_carlo_psnr: no eval patches");
    double total_sq = 0.0;
    std::size_t total_px = 0;
    std::vector<double> per_draw_mse;
    per_draw_mse.reserve(eval_patches.size() * static_cast<std::size_t>(n_draws));
    for (const auto& x : eval_patches) {
        for (int d = 0; d < n_draws; ++d) {
            const ImagePatch y = corrupt(x, theta, cfg, rng);
            const ImagePatch xhat = model.denoise(y);
            const double m = mse(xhat, x);
            per_draw_mse.push_back(m);
            total_sq += m * static_cast<double>(x.size());
            total_px += x.size();
        }
    }
    MonteCarloPsnr out;
    out.mse = total_sq / static_cast<double>(total_px);
    out.psnr_db = psnr_from_loss(out.mse);
    double var = 0.0;
    for (double m : per_draw_mse) {
        const double d = m - out.mse;
        var += d * d;
    }
    const auto k = static_cast<double>(per_draw_mse.size());
    out.stderr_mse = k > 1 ? std::sqrt(var / (k - 1.0) / k) : 0.0;
    return out;
}

// --------------------------------------------------------- file protocol

namespace {

void wait_for(const fs::path& p, double timeout_s, double poll_s, const std::string& what) {
    const auto deadline =
        std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
    while (!fs::exists(p)) {
        if (std::chrono::steady_clock::now() > deadline)
            throw std::runtime_error("external protocol timeout waiting for " + what);
        std::this_thread::sleep_for(std::chrono::duration<double>(poll_s));
    }
}

void touch(const fs::path& p) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot create sentinel " + p.string());
}

struct LossRow {
    std::size_t index;
    std::vector<double> coords;
    double value;
};

std::vector<LossRow> read_protocol_csv(const fs::path& path, const std::string& value_column,
                                       std::size_t ncoords) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("malformed protocol CSV: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("malformed protocol CSV: empty file " + path.string());
    const std::string expected = "index,sigma,alpha,beta," + value_column;
    if (line != expected)
        throw std::runtime_error("malformed protocol CSV: bad header in " + path.string());
    std::vector<LossRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f;
        std::vector<std::string> fields;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (fields.size() != 2 + ncoords)
            throw std::runtime_error("malformed protocol CSV: bad row in " + path.string());
        LossRow r;
        std::size_t pos = 0;
        r.index = std::stoull(fields[0], &pos);
        r.coords.resize(ncoords);
        for (std::size_t c = 0; c < ncoords; ++c) r.coords[c] = std::stod(fields[1 + c]);
        r.value = std::stod(fields[1 + ncoords]);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<double> grid_coords_sab(const SpecificationSpace& space, std::size_t index) {
    // (sigma, alpha, beta) with inactive dimensions at their no-noise values.
    const Specification s = space.spec_at(index);
    return {s.sigma, s.alpha, s.beta};
}

}  // namespace

std::vector<double> external_learner_roundtrip(const ExternalProtocolConfig& cfg,
                                               const SamplingDistribution& lambda,
                                               const SpecificationSpace& space, int iteration) {
    lambda.validate();
    if (lambda.size() != space.grid_size())
        throw std::invalid_argument("external_learner_roundtrip: lambda size mismatch");
    const fs::path dir(cfg.workdir);
    if (!fs::exists(dir)) throw std::runtime_error("external protocol: workdir does not exist");
    const std::string t = std::to_string(iteration);

    {
        std::ofstream out(dir / ("lambda_" + t + ".csv"));
        if (!out) throw std::runtime_error("external protocol: cannot write lambda CSV");
        out << "index,sigma,alpha,beta,weight\n";
        for (std::size_t i = 0; i < lambda.size(); ++i) {
            const auto c = grid_coords_sab(space, i);
            out << i << "," << format_double(c[0]) << "," << format_double(c[1]) << ","
                << format_double(c[2]) << "," << format_double(lambda.weights[i]) << "\n";
        }
    }
    touch(dir / ("request_" + t + ".ready"));
    wait_for(dir / ("response_" + t + ".ready"), cfg.timeout_s, cfg.poll_interval_s,
             "response_" + t + ".ready");

    const auto rows = read_protocol_csv(dir / ("loss_" + t + ".csv"), "psnr_db", 3);
    if (rows.size() != space.grid_size())
        throw std::runtime_error("external protocol: grid mismatch (row count " +
                                 std::to_string(rows.size()) + " vs grid " +
                                 std::to_string(space.grid_size()) + ")");
    std::vector<double> table(space.grid_size());
    std::vector<bool> seen(space.grid_size(), false);
    for (const auto& r : rows) {
        if (r.index >= table.size() || seen[r.index])
            throw std::runtime_error("external protocol: grid mismatch (bad or duplicate index)");
        const auto c = grid_coords_sab(space, r.index);
        for (std::size_t d = 0; d < 3; ++d) {
            const double tol = 1e-12 * std::max(1.0, std::fabs(c[d]));
            if (std::fabs(r.coords[d] - c[d]) > tol)
                throw std::runtime_error(
                    "external protocol: grid mismatch (coordinates disagree at index " +
                    std::to_string(r.index) + ")");
        }
        if (!std::isfinite(r.value))
            throw std::runtime_error("external protocol: non-finite psnr at index " +
                                     std::to_string(r.index));
        table[r.index] = r.value;
        seen[r.index] = true;
    }
    return table;
}

std::shared_ptr<const Model> ExternalLearner::fit(const SamplingDistribution& lambda,
                                                  const SpecificationSpace& space, int /*budget*/,
                                                  std::shared_ptr<const Model> /*warm_start*/) {
    auto table = external_learner_roundtrip(cfg_, lambda, space, iteration_);
    ++iteration_;
    return std::make_shared<TableModel>(std::move(table));
}

std::vector<double> TableModel::psnr_grid(const SpecificationSpace& space) const {
    if (table_.size() != space.grid_size())
        throw std::runtime_error("TableModel: table size does not match grid");
    return table_;
}

std::shared_ptr<const Model> OracleLearner::fit(const SamplingDistribution& lambda,
                                                const SpecificationSpace& space, int /*budget*/,
                                                std::shared_ptr<const Model> /*warm_start*/) {
    lambda.validate();
    if (ideal_.size() != space.grid_size())
        throw std::invalid_argument("OracleLearner: table size does not match grid");
    return std::make_shared<TableModel>(ideal_);
}

// ------------------------------------------------------------- responders

namespace {

template <typename Eval>
void run_responder(const ExternalProtocolConfig& cfg, const SpecificationSpace& space,
                   int iterations, Eval&& eval) {
    const fs::path dir(cfg.workdir);
    for (int t = 0; t < iterations; ++t) {
        const std::string ts = std::to_string(t);
        wait_for(dir / ("request_" + ts + ".ready"), cfg.timeout_s, cfg.poll_interval_s,
                 "request_" + ts + ".ready");
        const auto rows = read_protocol_csv(dir / ("lambda_" + ts + ".csv"), "weight", 3);
        if (rows.size() != space.grid_size())
            throw std::runtime_error("responder: grid mismatch in lambda CSV");
        SamplingDistribution lambda;
        lambda.weights.assign(space.grid_size(), 0.0);
        for (const auto& r : rows) {
            if (r.index >= lambda.size())
                throw std::runtime_error("responder: bad index in lambda CSV");
            lambda.weights[r.index] = r.value;
        }
        const std::vector<double> psnr = eval(lambda);
        std::ofstream out(dir / ("loss_" + ts + ".csv"));
        if (!out) throw std::runtime_error("responder: cannot write loss CSV");
        out << "index,sigma,alpha,beta,psnr_db\n";
        for (std::size_t i = 0; i < psnr.size(); ++i) {
            const auto c = grid_coords_sab(space, i);
            out << i << "," << format_double(c[0]) << "," << format_double(c[1]) << ","
                << format_double(c[2]) << "," << format_double(psnr[i]) << "\n";
        }
        out.close();
        touch(dir / ("response_" + ts + ".ready"));
    }
}

}  // namespace

void run_shrinkage_responder(const ExternalProtocolConfig& cfg, const SpecificationSpace& space,
                             double S2, double m1, const SpeckleConfig& speckle, int iterations) {
    run_responder(cfg, space, iterations, [&](const SamplingDistribution& lambda) {
        const ShrinkageModel model = shrinkage_fit(lambda, S2, m1, space, speckle);
        return model.psnr_grid(space);
    });
}

void run_constant_responder(const ExternalProtocolConfig& cfg, const SpecificationSpace& space,
                            double psnr_db, int iterations) {
    run_responder(cfg, space, iterations, [&](const SamplingDistribution&) {
        return std::vector<double>(space.grid_size(), psnr_db);
    });
}

}  // namespace specsched
