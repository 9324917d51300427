#include "nsr/experiments.hpp"

#include "nsr/error.hpp"
#include "nsr/rng.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace nsr {

std::string_view to_string(ModelKind kind)
{
    return kind == ModelKind::resnet ? "resnet" : "dcnet";
}

ModelKind parse_model_kind(std::string_view name)
{
    if (name == "resnet") return ModelKind::resnet;
    if (name == "dcnet") return ModelKind::dcnet;
    throw ParameterError("unknown model kind: " + std::string(name));
}

Problem make_problem(const ProblemConfig& cfg)
{
    if (!(cfg.alpha > 0.0)) throw ParameterError("problem: alpha must be positive");
    if (cfg.sigma < 0.0) throw ParameterError("problem: sigma must be >= 0");
    const StripeMaskSpec stripes{cfg.image_size, cfg.k_range, cfg.one_based};
    MaskedIntegration ops = make_masked_integration({cfg.image_size, cfg.image_size}, stripes);
    NullProjector projector = NullProjector::closed_mask(ops.forward, ops.mask);
    LinOp projector_op = projector.as_linop();
    std::optional<LinOp> support;
    if (cfg.noise_observed_only) support = ops.mask;
    return Problem{cfg, std::move(ops), std::move(projector), std::move(projector_op), std::move(support)};
}

Image initial_reconstruction(const Problem& problem, const Image& y)
{
    SolveResult r = tikhonov_reconstruct(problem.forward(), y, problem.config.alpha, problem.config.cg);
    if (!r.converged)
        throw std::runtime_error("Tikhonov CG did not converge (relative residual " +
                                 std::to_string(r.rel_residual) + ")");
    return std::move(r.x);
}

Image apply_model(const nn::NetParams& params, ModelKind kind, const Problem& problem, const Image& x)
{
    return nn::forward(params, x, kind == ModelKind::dcnet ? &problem.projector_op : nullptr).out;
}

// ---------------------------------------------------------------------------

TrainResult train(const TrainConfig& cfg, const Problem& problem)
{
    if (!(cfg.lr > 0.0) || cfg.weight_decay < 0.0) throw ParameterError("train: invalid optimizer settings");
    TrainResult result{nn::init_params(cfg.arch, cfg.init_seed), {}};
    nn::AdamState adam = nn::make_adam(result.params, cfg.lr, cfg.weight_decay);
    const LinOp* proj = cfg.model == ModelKind::dcnet ? &problem.projector_op : nullptr;
    const ProblemConfig& pc = problem.config;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const DatasetSpec ds{1, SampleKind::id, cfg.data_seed + epoch, pc.image_size, pc.patch_size, pc.sigma};
        const SamplePair pair = make_dataset(ds, problem.forward(), problem.noise_support).front();
        const Image x0 = initial_reconstruction(problem, pair.y);

        const nn::ForwardCache cache = nn::forward(result.params, x0, proj);
        const Image r = cache.out - pair.x;
        const double loss = dot(r, r);
        if (!std::isfinite(loss))
            throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch + 1));
        result.losses.push_back(loss);

        const nn::Gradients grads = nn::backward(result.params, cache, 2.0 * r);
        nn::adam_step(result.params, grads.params, adam);
    }
    return result;
}

void set_training_seed(TrainConfig& cfg, std::uint64_t seed)
{
    cfg.init_seed = seed;
    cfg.data_seed = 1000 * seed;
}

// ---------------------------------------------------------------------------

const EvalSummary& EvalReport::summary(const std::string& method, SampleKind kind) const
{
    for (const auto& s : summaries)
        if (s.method == method && s.kind == kind) return s;
    throw ContractError("EvalReport: no summary for " + method);
}

std::vector<EvalSummary> summarize(const std::vector<EvalRow>& rows)
{
    std::vector<EvalSummary> out;
    for (SampleKind kind : {SampleKind::id, SampleKind::ood}) {
        for (const char* method : kMethodNames) {
            EvalSummary s{method, kind};
            for (const auto& r : rows) {
                if (r.kind != kind || r.method != method) continue;
                ++s.n;
                s.psnr += r.psnr;
                s.ssim += r.ssim;
                s.mse += r.mse;
                s.residual += r.residual;
            }
            if (s.n == 0) continue;
            const auto n = static_cast<double>(s.n);
            s.psnr /= n;
            s.ssim /= n;
            s.mse /= n;
            s.residual /= n;
            out.push_back(s);
        }
    }
    return out;
}

EvalReport evaluate(const nn::NetParams& resnet, const nn::NetParams& dcnet, const EvalConfig& cfg,
                    const Problem& problem)
{
    const ProblemConfig& pc = problem.config;
    EvalReport report;
    for (SampleKind kind : {SampleKind::id, SampleKind::ood}) {
        const std::uint64_t seed = kind == SampleKind::id ? cfg.id_seed : cfg.ood_seed;
        const auto pairs =
            make_dataset({cfg.n, kind, seed, pc.image_size, pc.patch_size, pc.sigma}, problem.forward(),
                         problem.noise_support);
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const SamplePair& p = pairs[i];
            EvalImages imgs{kind, i, p.x, {}};
            const Image tik = initial_reconstruction(problem, p.y);
            imgs.recon.push_back(tik);
            imgs.recon.push_back(apply_model(resnet, ModelKind::resnet, problem, tik));
            imgs.recon.push_back(apply_model(dcnet, ModelKind::dcnet, problem, tik));
            for (std::size_t m = 0; m < kMethodCount; ++m) {
                const Image& rec = imgs.recon[m];
                report.rows.push_back({kMethodNames[m], kind, i, psnr(p.x, rec, cfg.data_range),
                                       ssim(p.x, rec, cfg.ssim), mse(p.x, rec),
                                       norm(problem.forward().apply(rec) - p.y)});
            }
            report.images.push_back(std::move(imgs));
        }
    }
    report.summaries = summarize(report.rows);
    return report;
}

// ---------------------------------------------------------------------------

DcAuditReport dc_audit(const nn::NetParams& params, ModelKind model, std::size_t n, std::uint64_t seed,
                       const Problem& problem)
{
    const ProblemConfig& pc = problem.config;
    DcAuditReport report{model, {}, 0.0};
    for (SampleKind kind : {SampleKind::id, SampleKind::ood}) {
        const auto pairs = make_dataset({n, kind, kind == SampleKind::id ? seed : seed + n, pc.image_size,
                                         pc.patch_size, pc.sigma},
                                        problem.forward(), problem.noise_support);
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const Image tik = initial_reconstruction(problem, pairs[i].y);
            const Image out = apply_model(params, model, problem, tik);
            DcAuditRow row{kind, i, norm(pairs[i].y), norm(problem.forward().apply(tik) - pairs[i].y),
                           norm(problem.forward().apply(out) - pairs[i].y), 0.0};
            row.rel_difference = std::abs(row.model_residual - row.tikhonov_residual) / row.y_norm;
            report.max_rel_difference = std::max(report.max_rel_difference, row.rel_difference);
            report.rows.push_back(row);
        }
    }
    return report;
}

// ---------------------------------------------------------------------------

RateOperator make_rate_operator(const RateOperatorSpec& spec)
{
    if (!(spec.s_min > 0.0) || spec.s_min > 1.0) throw ParameterError("rate operator: s_min must lie in (0, 1]");
    const StripeMaskSpec stripes{spec.width, spec.k_range, spec.one_based};
    LinOp mask = make_stripe_mask(stripes, spec.height);
    const auto cols = stripe_columns(stripes);

    Image weights(spec.height, spec.width, 0.0);
    const std::size_t m = cols.size() * spec.height;
    std::size_t p = 0;
    for (std::size_t i = 0; i < spec.height; ++i) {
        for (std::size_t j = 0; j < spec.width; ++j) {
            if (!std::binary_search(cols.begin(), cols.end(), j)) continue;
            const double t = m > 1 ? static_cast<double>(p) / static_cast<double>(m - 1) : 0.0;
            weights(i, j) = std::pow(spec.s_min, t);
            ++p;
        }
    }
    LinOp op = make_diagonal(std::move(weights));
    SvdFactors svd = svd_of(op);
    return {std::move(op), std::move(mask), std::move(svd)};
}

SlopeFit fit_loglog(const std::vector<double>& deltas, const std::vector<double>& values)
{
    if (deltas.size() != values.size() || deltas.size() < 2) throw ParameterError("fit_loglog: need >= 2 points");
    const std::size_t n = deltas.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(deltas[i] > 0.0) || !(values[i] > 0.0)) throw ParameterError("fit_loglog: values must be positive");
        mx += std::log(deltas[i]);
        my += std::log(values[i]);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(deltas[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(values[i]) - my);
    }
    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (n > 2) {
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = std::log(values[i]) - (fit.intercept + fit.slope * std::log(deltas[i]));
            sse += r * r;
        }
        const double se = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
        const boost::math::students_t dist(static_cast<double>(n - 2));
        fit.half_width = boost::math::quantile(boost::math::complement(dist, 0.025)) * se;
    }
    return fit;
}

namespace {

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void validate(const ConvergenceConfig& cfg)
{
    if (cfg.trials < 1) throw ParameterError("convergence study: trials must be >= 1");
    if (cfg.deltas.size() < 5) throw ParameterError("convergence study: need at least 5 noise levels");
    for (std::size_t i = 0; i < cfg.deltas.size(); ++i) {
        if (!(cfg.deltas[i] > 0.0)) throw ParameterError("convergence study: noise levels must be positive");
        if (i > 0 && !(cfg.deltas[i] < cfg.deltas[i - 1]))
            throw ParameterError("convergence study: noise levels must be strictly decreasing");
    }
    if (cfg.deltas.front() / cfg.deltas.back() < 1e3 * (1.0 - 1e-9))
        throw ParameterError("convergence study: noise levels must span at least three decades");
}

struct TrialInputs {
    std::vector<Image> sources;
    std::vector<Image> noise_dirs;
};

TrialInputs draw_trials(const ConvergenceConfig& cfg, const RateOperator& rop)
{
    TrialInputs in;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        in.sources.push_back(make_source_element(rop.svd, cfg.src, mix_seed(cfg.seed, 2 * t)));
        Rng rng(mix_seed(cfg.seed, 2 * t + 1));
        Image dir = Image::random_normal(rop.op.out_shape(), rng);
        dir *= 1.0 / norm(dir);
        in.noise_dirs.push_back(std::move(dir));
    }
    return in;
}

void finish(ConvergenceReport& report, const SourceCondition& src)
{
    std::vector<double> deltas, errors, residuals;
    for (const auto& p : report.points) {
        deltas.push_back(p.delta);
        errors.push_back(p.error);
        residuals.push_back(p.residual);
    }
    report.error_fit = fit_loglog(deltas, errors);
    report.residual_fit = fit_loglog(deltas, residuals);
    report.theory_slope = 2.0 * src.mu / (2.0 * src.mu + 1.0);
}

} // namespace

ConvergenceReport convergence_study(const ConvergenceConfig& cfg)
{
    validate(cfg);
    const RateOperator rop = make_rate_operator(cfg.op);
    const TrialInputs trials = draw_trials(cfg, rop);

    ConvergenceReport report;
    for (double delta : cfg.deltas) {
        ConvergencePoint pt{delta, param_choice(delta, cfg.src, cfg.c), 0.0, 0.0, {}, {}};
        const FilterSpec filter{cfg.filter, pt.alpha};
        for (std::size_t t = 0; t < cfg.trials; ++t) {
            const Image& x = trials.sources[t];
            Image y = rop.op.apply(x);
            y.axpy(delta, trials.noise_dirs[t]);
            const Image rec = spectral_reconstruct(rop.svd, y, filter);
            pt.errors.push_back(norm(rec - x));
            pt.residuals.push_back(norm(rop.op.apply(rec) - y));
        }
        pt.error = median(pt.errors);
        pt.residual = median(pt.residuals);
        report.points.push_back(std::move(pt));
    }
    finish(report, cfg.src);
    return report;
}

NsnConvergenceReport nsn_convergence_study(const ConvergenceConfig& cfg, const nn::NetParams& u_net)
{
    validate(cfg);
    const RateOperator rop = make_rate_operator(cfg.op);
    const TrialInputs trials = draw_trials(cfg, rop);
    const NullProjector proj = NullProjector::closed_mask(rop.op, rop.mask);
    const Correction u = [&u_net](const Image& x) { return nn::correction(u_net, x); };

    NsnConvergenceReport report;
    report.lipschitz_bound = lipschitz_bound(u_net, rop.op.in_shape());

    std::vector<Image> targets;
    for (const Image& x0 : trials.sources) targets.push_back(nsn_apply(u, proj, x0));

    for (double delta : cfg.deltas) {
        const double alpha = param_choice(delta, cfg.src, cfg.c);
        const FilterSpec filter{cfg.filter, alpha};
        ConvergencePoint classical{delta, alpha, 0.0, 0.0, {}, {}};
        ConvergencePoint learned = classical;
        for (std::size_t t = 0; t < cfg.trials; ++t) {
            Image y = rop.op.apply(targets[t]);
            y.axpy(delta, trials.noise_dirs[t]);
            const Image base = spectral_reconstruct(rop.svd, y, filter);
            const Image rec = nsn_apply(u, proj, base);
            const double e_classical = norm(base - trials.sources[t]);
            const double e_learned = norm(rec - targets[t]);
            classical.errors.push_back(e_classical);
            classical.residuals.push_back(norm(rop.op.apply(base) - y));
            learned.errors.push_back(e_learned);
            learned.residuals.push_back(norm(rop.op.apply(rec) - y));
            if (e_classical > 0.0)
                report.max_bound_ratio =
                    std::max(report.max_bound_ratio, e_learned / (report.lipschitz_bound * e_classical));
        }
        classical.error = median(classical.errors);
        classical.residual = median(classical.residuals);
        learned.error = median(learned.errors);
        learned.residual = median(learned.residuals);
        report.classical.points.push_back(std::move(classical));
        report.learned.points.push_back(std::move(learned));
    }
    finish(report.classical, cfg.src);
    finish(report.learned, cfg.src);
    return report;
}

nn::NetParams make_fixed_correction(const nn::Architecture& arch, std::uint64_t seed, double layer_norm, Shape grid)
{
    nn::NetParams params = nn::init_params(arch, seed);
    for (std::size_t l = 0; l < arch.layers; ++l) {
        const double current = nn::conv_layer_norm(params, l, grid);
        if (current == 0.0) continue;
        for (double& k : params.kernel(l)) k *= layer_norm / current;
    }
    return params;
}

double lipschitz_bound(const nn::NetParams& params, Shape grid)
{
    double prod = 1.0;
    for (std::size_t l = 0; l < params.arch().layers; ++l) prod *= nn::conv_layer_norm(params, l, grid);
    return 1.0 + prod;
}

// ---------------------------------------------------------------------------

namespace {
std::ofstream open_csv(const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << std::setprecision(17);
    return out;
}
} // namespace

void write_eval_csv(const EvalReport& report, const std::string& path)
{
    auto out = open_csv(path);
    out << "method,kind,index,psnr,ssim,mse,residual\n";
    for (const auto& r : report.rows)
        out << r.method << "," << to_string(r.kind) << "," << r.index << "," << r.psnr << "," << r.ssim << ","
            << r.mse << "," << r.residual << "\n";
}

void write_summary_csv(const EvalReport& report, const std::string& path)
{
    auto out = open_csv(path);
    out << "method,kind,n,psnr,ssim,mse,residual\n";
    for (const auto& s : report.summaries)
        out << s.method << "," << to_string(s.kind) << "," << s.n << "," << s.psnr << "," << s.ssim << "," << s.mse
            << "," << s.residual << "\n";
}

void write_dc_audit_csv(const DcAuditReport& report, const std::string& path)
{
    auto out = open_csv(path);
    out << "kind,index,y_norm,tikhonov_residual,model_residual,rel_difference\n";
    for (const auto& r : report.rows)
        out << to_string(r.kind) << "," << r.index << "," << r.y_norm << "," << r.tikhonov_residual << ","
            << r.model_residual << "," << r.rel_difference << "\n";
}

void write_convergence_csv(const ConvergenceReport& report, const std::string& path)
{
    auto out = open_csv(path);
    out << "delta,alpha,median_error,median_residual\n";
    for (const auto& p : report.points)
        out << p.delta << "," << p.alpha << "," << p.error << "," << p.residual << "\n";
}

void write_train_log_csv(const std::vector<double>& losses, const std::string& path)
{
    auto out = open_csv(path);
    out << "epoch,loss\n";
    for (std::size_t i = 0; i < losses.size(); ++i) out << i + 1 << "," << losses[i] << "\n";
}

nlohmann::json to_json(const ProblemConfig& cfg)
{
    return {{"image_size", cfg.image_size}, {"patch_size", cfg.patch_size},
            {"k_range", cfg.k_range},       {"one_based", cfg.one_based},
            {"sigma", cfg.sigma},           {"noise_observed_only", cfg.noise_observed_only},
            {"alpha", cfg.alpha},           {"cg_tol", cfg.cg.tol},
            {"cg_max_iters", cfg.cg.max_iters}};
}

nlohmann::json to_json(const TrainConfig& cfg)
{
    return {{"epochs", cfg.epochs},         {"lr", cfg.lr},
            {"weight_decay", cfg.weight_decay}, {"layers", cfg.arch.layers},
            {"width", cfg.arch.width},      {"model", std::string(to_string(cfg.model))},
            {"data_seed", cfg.data_seed},   {"init_seed", cfg.init_seed}};
}

nlohmann::json to_json(const EvalReport& report)
{
    nlohmann::json j = nlohmann::json::array();
    for (const auto& s : report.summaries)
        j.push_back({{"method", s.method}, {"kind", std::string(to_string(s.kind))}, {"n", s.n},
                     {"psnr", s.psnr}, {"ssim", s.ssim}, {"mse", s.mse}, {"residual", s.residual}});
    return j;
}

nlohmann::json to_json(const ConvergenceReport& report)
{
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : report.points)
        points.push_back({{"delta", p.delta}, {"alpha", p.alpha}, {"error", p.error}, {"residual", p.residual}});
    return {{"points", points},
            {"theory_slope", report.theory_slope},
            {"error_slope", report.error_fit.slope},
            {"error_slope_half_width", report.error_fit.half_width},
            {"residual_slope", report.residual_fit.slope},
            {"residual_slope_half_width", report.residual_fit.half_width}};
}

nlohmann::json to_json(const DcAuditReport& report)
{
    return {{"model", std::string(to_string(report.model))},
            {"samples", report.rows.size()},
            {"max_rel_difference", report.max_rel_difference}};
}

} // namespace nsr
