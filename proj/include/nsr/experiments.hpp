#pragma once

#include "nsr/data.hpp"
#include "nsr/metrics.hpp"
#include "nsr/nn.hpp"
#include "nsr/nullspace.hpp"
#include "nsr/operators.hpp"
#include "nsr/regularize.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace nsr {

enum class ModelKind { resnet, dcnet };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

/// Masked-integration reconstruction problem on square images.
struct ProblemConfig {
    std::size_t image_size = 64;
    std::size_t patch_size = 20;
    std::vector<std::size_t> k_range{0, 1, 2, 3};
    bool one_based = true;
    double sigma = 0.05;
    bool noise_observed_only = true;
    double alpha = 0.01;
    SolverConfig cg{1e-10, 2000, 0.0};
};

struct Problem {
    ProblemConfig config;
    MaskedIntegration ops;
    NullProjector projector;        ///< (I - M)
    LinOp projector_op;             ///< the same projector as a LinOp
    std::optional<LinOp> noise_support;

    const LinOp& forward() const { return ops.forward; }
};

Problem make_problem(const ProblemConfig& cfg);

/// Tikhonov initial reconstruction; throws if CG does not reach cfg.cg.tol.
Image initial_reconstruction(const Problem& problem, const Image& y);

/// f(x) = x + U(x) (resnet) or x + (I - M) U(x) (dcnet).
Image apply_model(const nn::NetParams& params, ModelKind kind, const Problem& problem, const Image& x);

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
    std::size_t epochs = 100;
    double lr = 1e-3;
    double weight_decay = 1e-4;
    nn::Architecture arch{5, 6};
    ModelKind model = ModelKind::dcnet;
    std::uint64_t data_seed = 1000;
    std::uint64_t init_seed = 1;
};

struct TrainResult {
    nn::NetParams params;
    std::vector<double> losses;  ///< |f(B y) - x|^2 per epoch, before the step
};

/// One Adam step per epoch on a fresh ID pair (pair i uses seed data_seed + i).
/// Throws std::runtime_error if the loss becomes non-finite.
TrainResult train(const TrainConfig& cfg, const Problem& problem);

/// Training run number `seed`: init_seed = seed, data_seed = 1000 * seed.
void set_training_seed(TrainConfig& cfg, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Evaluation

struct EvalConfig {
    std::size_t n = 20;
    std::uint64_t id_seed = 50000;
    std::uint64_t ood_seed = 60000;
    double data_range = 1.0;
    SsimConfig ssim{};
};

inline constexpr const char* kMethodNames[] = {"Tikhonov", "ResNet", "DC-Net"};
inline constexpr std::size_t kMethodCount = 3;

struct EvalRow {
    std::string method;
    SampleKind kind = SampleKind::id;
    std::size_t index = 0;
    double psnr = 0.0;
    double ssim = 0.0;
    double mse = 0.0;
    double residual = 0.0;  ///< |A recon - y|
};

struct EvalSummary {
    std::string method;
    SampleKind kind = SampleKind::id;
    std::size_t n = 0;
    double psnr = 0.0;
    double ssim = 0.0;
    double mse = 0.0;
    double residual = 0.0;
};

/// Ground truth and the three reconstructions of one evaluation sample.
struct EvalImages {
    SampleKind kind = SampleKind::id;
    std::size_t index = 0;
    Image truth;
    std::vector<Image> recon;  ///< indexed like kMethodNames
};

struct EvalReport {
    std::vector<EvalRow> rows;
    std::vector<EvalSummary> summaries;
    std::vector<EvalImages> images;

    const EvalSummary& summary(const std::string& method, SampleKind kind) const;
};

EvalReport evaluate(const nn::NetParams& resnet, const nn::NetParams& dcnet, const EvalConfig& cfg,
                    const Problem& problem);

/// Means over rows; used to build and to cross-check summaries.
std::vector<EvalSummary> summarize(const std::vector<EvalRow>& rows);

// ---------------------------------------------------------------------------
// Data-consistency audit

struct DcAuditRow {
    SampleKind kind = SampleKind::id;
    std::size_t index = 0;
    double y_norm = 0.0;
    double tikhonov_residual = 0.0;
    double model_residual = 0.0;
    double rel_difference = 0.0;  ///< |model - tikhonov| / |y|
};

struct DcAuditReport {
    ModelKind model = ModelKind::dcnet;
    std::vector<DcAuditRow> rows;
    double max_rel_difference = 0.0;
};

/// n ID and n OOD samples; residuals of the Tikhonov input and of the model output.
DcAuditReport dc_audit(const nn::NetParams& params, ModelKind model, std::size_t n, std::uint64_t seed,
                       const Problem& problem);

// ---------------------------------------------------------------------------
// Convergence-rate studies

/// Diagonal operator on an H x W grid: columns kept by the stripe mask carry
/// singular values s_min^(p/(m-1)), p = 0..m-1 in row-major order over the m
/// kept pixels; all other pixels span the kernel.
struct RateOperatorSpec {
    std::size_t height = 16;
    std::size_t width = 16;
    double s_min = 1e-4;
    std::vector<std::size_t> k_range{0, 1, 2, 3};
    bool one_based = true;
};

struct RateOperator {
    LinOp op;
    LinOp mask;
    SvdFactors svd;
};

RateOperator make_rate_operator(const RateOperatorSpec& spec);

struct ConvergenceConfig {
    RateOperatorSpec op;
    FilterKind filter = FilterKind::tikhonov;
    SourceCondition src{0.5, 1.0};
    std::vector<double> deltas{1e-1, 3.16e-2, 1e-2, 3.16e-3, 1e-3, 3.16e-4, 1e-4, 3.16e-5, 1e-5};
    std::size_t trials = 10;
    std::uint64_t seed = 7;
    double c = 1.0;
};

struct ConvergencePoint {
    double delta = 0.0;
    double alpha = 0.0;
    double error = 0.0;     ///< median over trials
    double residual = 0.0;  ///< median over trials
    std::vector<double> errors;
    std::vector<double> residuals;
};

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double half_width = 0.0;  ///< 95% confidence half-width
};

/// Least squares of log(values) against log(deltas).
SlopeFit fit_loglog(const std::vector<double>& deltas, const std::vector<double>& values);

struct ConvergenceReport {
    std::vector<ConvergencePoint> points;
    SlopeFit error_fit;
    SlopeFit residual_fit;
    double theory_slope = 0.0;  ///< 2mu / (2mu + 1)
};

/// Trial t uses source seed mix_seed(seed, 2t) and noise seed mix_seed(seed, 2t+1)
/// for every delta; the noise has norm exactly delta.
ConvergenceReport convergence_study(const ConvergenceConfig& cfg);

struct NsnConvergenceReport {
    ConvergenceReport classical;  ///< B_delta on the pre-images x0
    ConvergenceReport learned;    ///< f o B_delta on x = f(x0)
    double lipschitz_bound = 0.0; ///< 1 + product of per-layer operator norms
    double max_bound_ratio = 0.0; ///< max over trials of learned / (lipschitz_bound * classical)
};

/// Fixed correction network, not trained: x = f(x0) with x0 from the classical source set.
NsnConvergenceReport nsn_convergence_study(const ConvergenceConfig& cfg, const nn::NetParams& u_net);

/// Seeded small network whose convolutions are rescaled to operator norm layer_norm.
nn::NetParams make_fixed_correction(const nn::Architecture& arch, std::uint64_t seed, double layer_norm,
                                    Shape grid);

/// 1 + prod_l |conv_l| on the given grid.
double lipschitz_bound(const nn::NetParams& params, Shape grid);

// ---------------------------------------------------------------------------
// Reports

void write_eval_csv(const EvalReport& report, const std::string& path);
void write_summary_csv(const EvalReport& report, const std::string& path);
void write_dc_audit_csv(const DcAuditReport& report, const std::string& path);
void write_convergence_csv(const ConvergenceReport& report, const std::string& path);
void write_train_log_csv(const std::vector<double>& losses, const std::string& path);

nlohmann::json to_json(const ProblemConfig& cfg);
nlohmann::json to_json(const TrainConfig& cfg);
nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const ConvergenceReport& report);
nlohmann::json to_json(const DcAuditReport& report);

} // namespace nsr
