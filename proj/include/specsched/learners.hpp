#pragma once

#include <memory>
#include <string>
#include <vector>

#include "specsched/noise.hpp"
#include "specsched/rng.hpp"
#include "specsched/sampling.hpp"
#include "specsched/space.hpp"

namespace specsched {

// A fitted denoiser. Evaluation is either closed-form (analytic families) or
// Monte Carlo (see monte_carlo_psnr). Models are immutable after fit.
class Model {
public:
    virtual ~Model() = default;
    virtual ImagePatch denoise(const ImagePatch& y) const = 0;

    // PSNR this model achieves at theta; analytic models override with their
    // closed form.
    virtual double psnr_db(const Specification& theta) const;

    // Per-grid-point PSNR in grid order; default loops psnr_db.
    virtual std::vector<double> psnr_grid(const SpecificationSpace& space) const;
};

// Anything that can be fit under a sampling distribution.
class Learner {
public:
    virtual ~Learner() = default;
    virtual std::shared_ptr<const Model> fit(const SamplingDistribution& lambda,
                                             const SpecificationSpace& space, int budget,
                                             std::shared_ptr<const Model> warm_start) = 0;
};

// ------------------------------------------------------------------
// Scalar shrinkage family: x_hat = c * y. Its expected MSE at theta is
// (1-c)^2 * S2 + c^2 * Vbar(theta), so the fit under any lambda is exact and
// instantaneous, which makes it the canonical testbed for the scheduler.

// Average per-pixel noise variance at theta:
// Vbar = sigma^2 + alpha * m1 + S2 * beta / B (inactive stages contribute 0).
double shrinkage_noise_variance(const Specification& theta, double S2, double m1,
                                const SpeckleConfig& cfg);

struct ShrinkageIdeal {
    double c_star = 0.0;
    double loss_star = 0.0;
};

// Per-theta minimizer of (1-c)^2*S2 + c^2*Vbar: c* = S2/(S2+Vbar),
// loss* = S2*Vbar/(S2+Vbar).
ShrinkageIdeal shrinkage_ideal(const Specification& theta, double S2, double m1,
                               const SpeckleConfig& cfg);

class ShrinkageModel : public Model {
public:
    ShrinkageModel(double c, double S2, double m1, SpeckleConfig cfg);

    double c() const { return c_; }
    double expected_mse(const Specification& theta) const;

    ImagePatch denoise(const ImagePatch& y) const override;
    double psnr_db(const Specification& theta) const override;

private:
    double c_;
    double S2_;
    double m1_;
    SpeckleConfig cfg_;
};

// Exact minimizer of the lambda-weighted expected MSE:
// c_lambda = S2 / (S2 + E_lambda[Vbar]).
ShrinkageModel shrinkage_fit(const SamplingDistribution& lambda, double S2, double m1,
                             const SpecificationSpace& space, const SpeckleConfig& cfg);

class ShrinkageLearner : public Learner {
public:
    ShrinkageLearner(double S2, double m1, SpeckleConfig cfg) : S2_(S2), m1_(m1), cfg_(cfg) {}
    std::shared_ptr<const Model> fit(const SamplingDistribution& lambda,
                                     const SpecificationSpace& space, int budget,
                                     std::shared_ptr<const Model> warm_start) override;

private:
    double S2_;
    double m1_;
    SpeckleConfig cfg_;
};

// ------------------------------------------------------------------
// Subspace projection denoiser (validates the noise model and the linearity
// of its loss landscape in (sigma^2, alpha)).

class SubspaceProjector {
public:
    // P = Q Q^T from an orthonormal basis Q (n x k, column-major).
    SubspaceProjector(int n, int k, std::vector<double> basis);

    // Random k-dimensional subspace. When `contain` is non-null the subspace
    // is built around that vector, so it lies in C exactly.
    static SubspaceProjector random(int n, int k, RandomStream& rng,
                                    const std::vector<double>* contain = nullptr);

    int dim() const { return n_; }
    int rank() const { return k_; }
    const std::vector<double>& matrix() const { return P_; }  // row-major n x n
    std::vector<double> project(const std::vector<double>& v) const;
    double trace() const;

private:
    int n_;
    int k_;
    std::vector<double> P_;
};

// Example-1 closed form: E||P(y) - x||^2 = k*sigma^2 + alpha*tr(P diag(x) P^T)
// for y = alpha*Poisson(x/alpha) + N(0, sigma^2 I), x in C.
// Throws if x is farther than 1e-8 from the subspace.
double subspace_loss_closed_form(const SubspaceProjector& proj, const std::vector<double>& x,
                                 double sigma, double alpha);

// Projection as a Model over flattened patches (evaluation via Monte Carlo).
class ProjectionModel : public Model {
public:
    explicit ProjectionModel(SubspaceProjector proj) : proj_(std::move(proj)) {}
    ImagePatch denoise(const ImagePatch& y) const override;

private:
    SubspaceProjector proj_;
};

// ------------------------------------------------------------------

struct MonteCarloPsnr {
    double psnr_db = 0.0;
    double mse = 0.0;
    double stderr_mse = 0.0;  // standard error of the pooled MSE estimate
};

// Corrupts each eval patch n_draws times at theta, denoises, and pools the
// squared error.
MonteCarloPsnr monte_carlo_psnr(const Model& model, const Specification& theta,
                                const std::vector<ImagePatch>& eval_patches, int n_draws,
                                const SpeckleConfig& cfg, RandomStream& rng);

// ------------------------------------------------------------------
// File protocol letting an out-of-process trainer play the Learner role.
// Per iteration t the driver writes lambda_<t>.csv then touches
// request_<t>.ready; the responder answers with loss_<t>.csv and
// response_<t>.ready. Sentinels are zero-length; floats round-trip at 17
// significant digits.

struct ExternalProtocolConfig {
    std::string workdir;
    double timeout_s = 60.0;
    double poll_interval_s = 0.02;
};

// One request/response exchange; returns per-grid-point PSNR. Throws
// distinct errors for timeout, grid mismatch, and malformed CSV.
std::vector<double> external_learner_roundtrip(const ExternalProtocolConfig& cfg,
                                               const SamplingDistribution& lambda,
                                               const SpecificationSpace& space, int iteration);

class ExternalLearner : public Learner {
public:
    explicit ExternalLearner(ExternalProtocolConfig cfg) : cfg_(std::move(cfg)) {}
    std::shared_ptr<const Model> fit(const SamplingDistribution& lambda,
                                     const SpecificationSpace& space, int budget,
                                     std::shared_ptr<const Model> warm_start) override;

private:
    ExternalProtocolConfig cfg_;
    int iteration_ = 0;
};

// Fixed per-grid-point PSNR table (external results, oracle baselines).
class TableModel : public Model {
public:
    TableModel(std::vector<double> psnr_table) : table_(std::move(psnr_table)) {}
    ImagePatch denoise(const ImagePatch& y) const override { return y; }
    std::vector<double> psnr_grid(const SpecificationSpace& space) const override;

private:
    std::vector<double> table_;
};

// Learner that always reproduces a fixed ideal table (zero-gap fixed point).
class OracleLearner : public Learner {
public:
    explicit OracleLearner(std::vector<double> ideal_psnr) : ideal_(std::move(ideal_psnr)) {}
    std::shared_ptr<const Model> fit(const SamplingDistribution& lambda,
                                     const SpecificationSpace& space, int budget,
                                     std::shared_ptr<const Model> warm_start) override;

private:
    std::vector<double> ideal_;
};

// Reference responders for the file protocol. Each serves `iterations`
// requests then returns; they are what an external trainer is expected to
// mimic.
void run_shrinkage_responder(const ExternalProtocolConfig& cfg, const SpecificationSpace& space,
                             double S2, double m1, const SpeckleConfig& speckle, int iterations);
void run_constant_responder(const ExternalProtocolConfig& cfg, const SpecificationSpace& space,
                            double psnr_db, int iterations);

}  // namespace specsched
