// Acceptance suite: one PASS/FAIL line per criterion, plus indented detail lines.
// Exit status is the number of failed criteria.

#include "nsr/experiments.hpp"
#include "nsr/metrics.hpp"
#include "nsr/nn.hpp"
#include "nsr/nullspace.hpp"
#include "nsr/operators.hpp"
#include "nsr/regularize.hpp"
#include "nsr/rng.hpp"
#include "nsr/solvers.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

using namespace nsr;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

void note(const char* fmt, auto... args)
{
    std::printf("    ");
    std::printf(fmt, args...);
    std::printf("\n");
}

std::string fmt(const char* f, auto... args)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Image random_image(Shape s, std::uint64_t seed)
{
    Rng rng(seed);
    return Image::random_normal(s, rng);
}

// Default problem and trained models, shared by criteria 1 and 8.
struct TrainedPair {
    nn::NetParams resnet;
    nn::NetParams dcnet;
};

const Problem& default_problem()
{
    static const Problem p = make_problem(ProblemConfig{});
    return p;
}

const TrainedPair& trained(std::uint64_t seed)
{
    static std::vector<std::optional<TrainedPair>> cache(8);
    auto& slot = cache.at(seed);
    if (!slot) {
        TrainConfig cfg;
        set_training_seed(cfg, seed);
        cfg.model = ModelKind::resnet;
        nn::NetParams rn = train(cfg, default_problem()).params;
        cfg.model = ModelKind::dcnet;
        nn::NetParams dc = train(cfg, default_problem()).params;
        slot = TrainedPair{std::move(rn), std::move(dc)};
    }
    return *slot;
}

Outcome dc_invariance()
{
    const DcAuditReport dc = dc_audit(trained(1).dcnet, ModelKind::dcnet, 20, EvalConfig{}.id_seed, default_problem());
    const DcAuditReport rn = dc_audit(trained(1).resnet, ModelKind::resnet, 20, EvalConfig{}.id_seed, default_problem());
    note("DC-Net max rel. residual change %.3e over %zu samples", dc.max_rel_difference, dc.rows.size());
    note("ResNet max rel. residual change %.3e (reference)", rn.max_rel_difference);
    return {dc.rows.size() == 40 && dc.max_rel_difference <= 1e-10, fmt("max %.2e <= 1e-10", dc.max_rel_difference)};
}

Outcome projector_suite()
{
    const Shape shape{64, 64};
    const MaskedIntegration mi = make_masked_integration(shape, StripeMaskSpec{});
    const NullProjector closed = NullProjector::closed_mask(mi.forward, mi.mask);
    const NullProjector iter = NullProjector::iterative(mi.forward);
    const double a_norm = operator_norm(mi.forward).sigma_max;
    double agree = 0.0, idem = 0.0, selfadj = 0.0, annih = 0.0;
    bool converged = true;
    for (std::uint64_t s = 0; s < 50; ++s) {
        const Image z = random_image(shape, 1000 + s);
        const Image w = random_image(shape, 2000 + s);
        const Image pz = closed(z);
        const SolveResult it = iter.project(z);
        converged = converged && it.converged;
        agree = std::max(agree, norm(it.x - pz) / norm(z));
        idem = std::max(idem, norm(closed(pz) - pz) / norm(z));
        selfadj = std::max(selfadj, std::abs(dot(pz, w) - dot(z, closed(w))) / (norm(z) * norm(w)));
        annih = std::max(annih, norm(mi.forward.apply(pz)) / (a_norm * norm(z)));
    }
    note("closed vs iterative %.2e, idempotency %.2e, self-adjointness %.2e, annihilation %.2e", agree, idem,
         selfadj, annih);
    const bool ok = converged && agree <= 1e-6 && idem <= 1e-10 && selfadj <= 1e-10 && annih <= 1e-10;
    return {ok, fmt("agreement %.1e, identities <= %.1e", agree, std::max({idem, selfadj, annih}))};
}

Outcome moore_penrose()
{
    Rng rng(31);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index m = 2 + static_cast<Eigen::Index>(rng.uniform_int(31));
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.uniform_int(31));
        const Eigen::Index r = 1 + static_cast<Eigen::Index>(rng.uniform_int(std::min(m, n) - 1));
        Matrix left(m, r), right(r, n);
        for (Eigen::Index i = 0; i < left.size(); ++i) left.data()[i] = rng.normal();
        for (Eigen::Index i = 0; i < right.size(); ++i) right.data()[i] = rng.normal();
        const Matrix a = left * right;
        const SvdFactors f = dense_svd(a);
        Matrix p(n, m);
        Image e(static_cast<std::size_t>(m), 1);
        for (Eigen::Index j = 0; j < m; ++j) {
            e[static_cast<std::size_t>(j)] = 1.0;
            p.col(j) = flatten(pseudo_inverse_apply(f, e));
            e[static_cast<std::size_t>(j)] = 0.0;
        }
        const double errs[] = {
            (a * p * a - a).norm() / a.norm(),
            (p * a * p - p).norm() / p.norm(),
            ((a * p).transpose() - a * p).norm(),
            ((p * a).transpose() - p * a).norm(),
        };
        for (double v : errs) worst = std::max(worst, v);
        if (f.rank() != r) return {false, fmt("trial %d: rank %ld, expected %ld", trial, long(f.rank()), long(r))};
    }
    note("worst relative identity error %.2e over 20 matrices up to 32x32", worst);
    return {worst <= 1e-9, fmt("worst %.1e <= 1e-9", worst)};
}

Outcome filter_grid()
{
    std::vector<double> lambdas, alphas;
    for (int i = 0; i < 1000; ++i) lambdas.push_back(std::pow(10.0, -8.0 + 8.0 * i / 999));
    for (int i = 0; i < 10; ++i) alphas.push_back(std::pow(10.0, -4.0 + 4.0 * i / 9));
    bool ok = true;
    for (FilterKind kind : {FilterKind::tikhonov, FilterKind::tsvd, FilterKind::landweber}) {
        for (double mu : {0.25, 0.5, 1.0}) {
            const FilterConstants c = filter_constants(kind, mu);
            double r1 = 0.0, r2 = 0.0;
            for (double a : alphas)
                for (double l : lambdas) {
                    const double g = filter_value({kind, a}, l);
                    r1 = std::max(r1, std::pow(l, mu) * std::abs(1.0 - l * g) / std::pow(a, mu));
                    r2 = std::max(r2, std::abs(g) * a);
                }
            const bool pass = r1 <= c.c1 * (1 + 1e-12) && r2 <= c.c2 * (1 + 1e-12);
            ok = ok && pass;
            note("%-9s mu=%.2f  max R1 ratio %.4f (c1=%.2f)  max R2 ratio %.4f (c2=%.2f)  %s",
                 std::string(to_string(kind)).c_str(), mu, r1, c.c1, r2, c.c2, pass ? "ok" : "violated");
        }
    }
    return {ok, "1000 lambda x 10 alpha, mu in {0.25, 0.5, 1}"};
}

Outcome classical_rates()
{
    bool ok = true;
    int failed = 0;
    for (FilterKind kind : {FilterKind::tikhonov, FilterKind::tsvd, FilterKind::landweber}) {
        for (double mu : {0.5, 1.0}) {
            ConvergenceConfig cfg;
            cfg.filter = kind;
            cfg.src = {mu, 1.0};
            const ConvergenceReport r = convergence_study(cfg);
            const bool err_ok = std::abs(r.error_fit.slope - r.theory_slope) <= 0.1;
            const bool res_ok = std::abs(r.residual_fit.slope - 1.0) <= 0.2;
            if (!(err_ok && res_ok)) ++failed;
            ok = ok && err_ok && res_ok;
            note("%-9s mu=%.1f  error slope %.3f (target %.3f +-0.1) %s   residual slope %.3f (target 1 +-0.2) %s",
                 std::string(to_string(kind)).c_str(), mu, r.error_fit.slope, r.theory_slope, err_ok ? "ok" : "MISS",
                 r.residual_fit.slope, res_ok ? "ok" : "MISS");
        }
    }
    return {ok, fmt("%d of 6 filter/mu combinations outside tolerance", failed)};
}

Outcome learned_rates()
{
    const Shape grid{16, 16};
    const nn::NetParams u = make_fixed_correction({3, 4}, 3, 1.0, grid);
    bool ok = true;
    for (double mu : {0.5, 1.0}) {
        ConvergenceConfig cfg;
        cfg.src = {mu, 1.0};
        const NsnConvergenceReport r = nsn_convergence_study(cfg, u);
        const double classical = r.classical.error_fit.slope;
        const double learned = r.learned.error_fit.slope;
        const bool slope_ok = std::abs(learned - classical) <= 0.1 && std::abs(learned - r.learned.theory_slope) <= 0.1;
        const bool bound_ok = r.max_bound_ratio <= 1.05;
        ok = ok && slope_ok && bound_ok;
        note("tikhonov mu=%.1f  classical slope %.3f  learned slope %.3f (target %.3f)  bound %.3f  max ratio %.3f",
             mu, classical, learned, r.learned.theory_slope, r.lipschitz_bound, r.max_bound_ratio);
    }
    return {ok, "slopes within 0.1, errors within 1.05 x bound"};
}

Outcome gradients()
{
    double worst = 0.0;
    for (std::uint64_t seed : {1, 2, 3}) {
        const double e = nn::grad_check({5, 6}, seed, 1e-6, {8, 8});
        note("seed %llu: max relative error %.3e", static_cast<unsigned long long>(seed), e);
        worst = std::max(worst, e);
    }
    return {worst <= 1e-5, fmt("worst %.2e <= 1e-5", worst)};
}

Outcome psnr_orderings()
{
    int resnet_id = 0, dcnet_ood = 0, dc_over_tik = 0;
    for (std::uint64_t seed : {1, 2, 3}) {
        const TrainedPair& m = trained(seed);
        const EvalReport r = evaluate(m.resnet, m.dcnet, EvalConfig{}, default_problem());
        auto ps = [&](const char* method, SampleKind k) { return r.summary(method, k).psnr; };
        const double tid = ps("Tikhonov", SampleKind::id), rid = ps("ResNet", SampleKind::id),
                     did = ps("DC-Net", SampleKind::id);
        const double tood = ps("Tikhonov", SampleKind::ood), rood = ps("ResNet", SampleKind::ood),
                     dood = ps("DC-Net", SampleKind::ood);
        const bool a = rid > tid && rid > did;
        const bool b = dood > tood && dood > rood;
        const bool c = dood > tood;
        resnet_id += a;
        dcnet_ood += b;
        dc_over_tik += c;
        note("seed %llu  ID  Tikhonov %.3f ResNet %.3f DC-Net %.3f | OOD Tikhonov %.3f ResNet %.3f DC-Net %.3f",
             static_cast<unsigned long long>(seed), tid, rid, did, tood, rood, dood);
    }
    note("ResNet highest ID PSNR: %d/3, DC-Net highest OOD PSNR: %d/3, DC-Net OOD > Tikhonov OOD: %d/3", resnet_id,
         dcnet_ood, dc_over_tik);
    const bool ok = resnet_id >= 2 && dcnet_ood >= 2 && dc_over_tik >= 2;
    return {ok, fmt("orderings held in %d/%d/%d of 3 seeds (need 2 each)", resnet_id, dcnet_ood, dc_over_tik)};
}

Outcome metric_anchors()
{
    Image a(10, 10), b(10, 10);
    b(3, 7) = 1.0;  // mse = 1/100
    const double p = psnr(a, b, 1.0);
    const Image x = random_image({32, 32}, 5);
    const double s = ssim(x, x);
    note("PSNR(mse=%.17g) = %.17g, SSIM(x,x) = %.17g", mse(a, b), p, s);
    return {p == 20.0 && s == 1.0, "PSNR 20 dB, SSIM 1"};
}

} // namespace

int main()
{
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"DC invariance of the trained DC-Net", dc_invariance},
        {"null-space projector suite", projector_suite},
        {"Moore-Penrose identities", moore_penrose},
        {"filter qualification grid", filter_grid},
        {"classical convergence rates", classical_rates},
        {"learned regularization rate transfer", learned_rates},
        {"gradient correctness", gradients},
        {"model PSNR orderings over 3 training seeds", psnr_orderings},
        {"metric anchors", metric_anchors},
    };
    int failures = 0;
    int index = 0;
    for (const auto& [name, run] : criteria) {
        ++index;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %d: %s (%s) [%.1f s]\n", out.pass ? "PASS" : "FAIL", index, name,
                    out.detail.c_str(), secs);
        std::fflush(stdout);
        failures += out.pass ? 0 : 1;
    }
    std::printf("%d of %d criteria passed\n", index - failures, index);
    return failures;
}
