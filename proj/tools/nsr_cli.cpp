#include "nsr/data.hpp"
#include "nsr/error.hpp"
#include "nsr/experiments.hpp"
#include "nsr/io.hpp"
#include "nsr/nn.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nsr;

namespace {

struct CommonArgs {
    std::uint64_t seed = 0;
    std::string out;
    std::string config;
};

const std::set<std::string> kProblemKeys = {"image_size", "patch_size", "k_range",  "one_based",   "sigma",
                                            "noise_observed_only", "alpha", "cg_tol", "cg_max_iters"};
const std::set<std::string> kTrainKeys = {"epochs", "lr", "weight_decay", "layers", "width", "model"};
const std::set<std::string> kEvalKeys = {"n", "id_seed", "ood_seed", "data_range", "resnet_checkpoint",
                                         "dcnet_checkpoint", "dump_images"};
const std::set<std::string> kOtherKeys = {"kind", "checkpoint", "filter", "mu", "rho", "trials", "c",
                                          "deltas", "op_height", "op_width", "s_min", "learned", "layer_norm"};

// One config file may serve every subcommand; only keys no subcommand knows are rejected.
bool known_key(const std::string& key)
{
    for (const auto* s : {&kProblemKeys, &kTrainKeys, &kEvalKeys, &kOtherKeys})
        if (s->count(key)) return true;
    return false;
}

template <class T>
std::vector<T> parse_list(const std::string& text, const std::string& key)
{
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::istringstream is(item);
        T v{};
        if (!(is >> v) || !(is >> std::ws).eof()) throw InputError("config: bad list entry '" + item + "' in " + key);
        out.push_back(v);
    }
    if (out.empty()) throw InputError("config: empty list for " + key);
    return out;
}

std::size_t get_size(const KeyValueConfig& cfg, const std::string& key, std::size_t fallback)
{
    const long long v = cfg.get_int(key, static_cast<long long>(fallback));
    if (v < 0) throw ParameterError("config: " + key + " must be non-negative");
    return static_cast<std::size_t>(v);
}

class Command {
public:
    Command(std::string name, const CommonArgs& args) : name_(std::move(name)), args_(args)
    {
        if (!args.config.empty()) cfg_ = KeyValueConfig::load(args.config);
        for (const auto& [key, value] : cfg_.entries())
            if (!known_key(key)) throw InputError("config: unknown key '" + key + "'");
        if (args.out.empty()) throw InputError("--out is required");
        fs::create_directories(args.out);
        summary_["command"] = name_;
        summary_["seed"] = args.seed;
        summary_["config_file"] = args.config;
        summary_["config"] = cfg_.entries();
    }

    const KeyValueConfig& cfg() const { return cfg_; }
    std::uint64_t seed() const { return args_.seed; }
    std::string path(const std::string& file) const { return (fs::path(args_.out) / file).string(); }
    json& summary() { return summary_; }

    void output(const std::string& file)
    {
        summary_["outputs"].push_back(file);
    }

    void finish()
    {
        std::ofstream out(path("summary.json"));
        if (!out) throw InputError("cannot write " + path("summary.json"));
        out << summary_.dump(2) << "\n";
        std::cout << name_ << ": wrote " << path("summary.json") << "\n";
    }

private:
    std::string name_;
    CommonArgs args_;
    KeyValueConfig cfg_;
    json summary_;
};

ProblemConfig problem_config(const KeyValueConfig& cfg)
{
    ProblemConfig pc;
    pc.image_size = get_size(cfg, "image_size", pc.image_size);
    pc.patch_size = get_size(cfg, "patch_size", pc.patch_size);
    if (cfg.has("k_range")) pc.k_range = parse_list<std::size_t>(cfg.get_string("k_range", ""), "k_range");
    pc.one_based = cfg.get_bool("one_based", pc.one_based);
    pc.sigma = cfg.get_double("sigma", pc.sigma);
    pc.noise_observed_only = cfg.get_bool("noise_observed_only", pc.noise_observed_only);
    pc.alpha = cfg.get_double("alpha", pc.alpha);
    pc.cg.tol = cfg.get_double("cg_tol", pc.cg.tol);
    pc.cg.max_iters = static_cast<int>(cfg.get_int("cg_max_iters", pc.cg.max_iters));
    return pc;
}

TrainConfig train_config(const KeyValueConfig& cfg, std::uint64_t seed)
{
    TrainConfig tc;
    tc.epochs = get_size(cfg, "epochs", tc.epochs);
    tc.lr = cfg.get_double("lr", tc.lr);
    tc.weight_decay = cfg.get_double("weight_decay", tc.weight_decay);
    tc.arch.layers = get_size(cfg, "layers", tc.arch.layers);
    tc.arch.width = get_size(cfg, "width", tc.arch.width);
    tc.arch.validate();
    set_training_seed(tc, seed);
    return tc;
}

std::vector<ModelKind> requested_models(const KeyValueConfig& cfg)
{
    const std::string m = cfg.get_string("model", "both");
    if (m == "both") return {ModelKind::resnet, ModelKind::dcnet};
    return {parse_model_kind(m)};
}

// ---------------------------------------------------------------------------

int cmd_gen_data(const CommonArgs& args)
{
    Command cmd("gen-data", args);
    const KeyValueConfig& cfg = cmd.cfg();
    const ProblemConfig pc = problem_config(cfg);
    const Problem problem = make_problem(pc);
    const std::size_t n = get_size(cfg, "n", 10);
    const double range = cfg.get_double("data_range", 1.0);
    const std::string kinds = cfg.get_string("kind", "both");
    std::vector<SampleKind> wanted;
    if (kinds == "both") wanted = {SampleKind::id, SampleKind::ood};
    else wanted = {parse_sample_kind(kinds)};

    cmd.summary()["problem"] = to_json(pc);
    for (SampleKind kind : wanted) {
        // OOD samples draw from a disjoint seed block.
        const std::uint64_t base = args.seed + (kind == SampleKind::ood ? 1000000 : 0);
        const auto pairs = make_dataset({n, kind, base, pc.image_size, pc.patch_size, pc.sigma}, problem.forward(),
                                        problem.noise_support);
        const std::string sub(to_string(kind));
        export_dataset(pairs, kind, cmd.path(sub), range);
        cmd.output(sub + "/manifest.csv");
        cmd.summary()["datasets"][sub] = {{"n", n}, {"base_seed", base}};
    }
    cmd.finish();
    return 0;
}

int cmd_train(const CommonArgs& args)
{
    Command cmd("train", args);
    const ProblemConfig pc = problem_config(cmd.cfg());
    const Problem problem = make_problem(pc);
    cmd.summary()["problem"] = to_json(pc);
    for (ModelKind model : requested_models(cmd.cfg())) {
        TrainConfig tc = train_config(cmd.cfg(), args.seed);
        tc.model = model;
        const TrainResult r = train(tc, problem);
        const std::string name(to_string(model));
        nn::save_checkpoint(r.params, cmd.path("checkpoint_" + name + ".txt"));
        write_train_log_csv(r.losses, cmd.path("train_log_" + name + ".csv"));
        cmd.output("checkpoint_" + name + ".txt");
        cmd.output("train_log_" + name + ".csv");
        json& j = cmd.summary()["models"][name];
        j["train"] = to_json(tc);
        j["final_loss"] = r.losses.empty() ? 0.0 : r.losses.back();
        j["fingerprint"] = r.params.fingerprint();
    }
    cmd.finish();
    return 0;
}

/// Loads a checkpoint named in the config, or trains one with the command's seed.
nn::NetParams obtain_model(Command& cmd, ModelKind model, const Problem& problem)
{
    const std::string name(to_string(model));
    const std::string key = name + "_checkpoint";
    if (cmd.cfg().has(key)) {
        cmd.summary()["models"][name]["checkpoint"] = cmd.cfg().get_string(key, "");
        return nn::load_checkpoint(cmd.cfg().get_string(key, ""));
    }
    TrainConfig tc = train_config(cmd.cfg(), cmd.seed());
    tc.model = model;
    cmd.summary()["models"][name]["train"] = to_json(tc);
    return train(tc, problem).params;
}

void dump_images(Command& cmd, const EvalReport& report, std::size_t count, double range)
{
    static const char* file_tags[] = {"tikhonov", "resnet", "dcnet"};
    fs::create_directories(cmd.path("images"));
    std::size_t per_kind[2] = {0, 0};
    for (const EvalImages& im : report.images) {
        std::size_t& seen = per_kind[im.kind == SampleKind::id ? 0 : 1];
        if (seen++ >= count) continue;
        char stem[64];
        std::snprintf(stem, sizeof stem, "images/%s_%04zu_", std::string(to_string(im.kind)).c_str(), im.index);
        write_pgm16(cmd.path(std::string(stem) + "truth.pgm"), im.truth, range);
        for (std::size_t m = 0; m < kMethodCount; ++m)
            write_pgm16(cmd.path(std::string(stem) + file_tags[m] + ".pgm"), im.recon[m], range);
    }
}

int cmd_eval(const CommonArgs& args)
{
    Command cmd("eval", args);
    const KeyValueConfig& cfg = cmd.cfg();
    const ProblemConfig pc = problem_config(cfg);
    const Problem problem = make_problem(pc);
    EvalConfig ec;
    ec.n = get_size(cfg, "n", ec.n);
    ec.id_seed = static_cast<std::uint64_t>(cfg.get_int("id_seed", static_cast<long long>(ec.id_seed)));
    ec.ood_seed = static_cast<std::uint64_t>(cfg.get_int("ood_seed", static_cast<long long>(ec.ood_seed)));
    ec.data_range = cfg.get_double("data_range", ec.data_range);
    ec.ssim.data_range = ec.data_range;

    const nn::NetParams resnet = obtain_model(cmd, ModelKind::resnet, problem);
    const nn::NetParams dcnet = obtain_model(cmd, ModelKind::dcnet, problem);
    const EvalReport report = evaluate(resnet, dcnet, ec, problem);

    write_eval_csv(report, cmd.path("eval.csv"));
    write_summary_csv(report, cmd.path("eval_summary.csv"));
    cmd.output("eval.csv");
    cmd.output("eval_summary.csv");
    dump_images(cmd, report, get_size(cfg, "dump_images", 2), ec.data_range);
    cmd.output("images/");

    cmd.summary()["problem"] = to_json(pc);
    cmd.summary()["eval"] = {{"n", ec.n}, {"id_seed", ec.id_seed}, {"ood_seed", ec.ood_seed},
                             {"data_range", ec.data_range}};
    cmd.summary()["results"] = to_json(report);
    for (const EvalSummary& s : report.summaries)
        std::cout << s.method << " " << to_string(s.kind) << ": PSNR " << s.psnr << " SSIM " << s.ssim << "\n";
    cmd.finish();
    return 0;
}

int cmd_dc_audit(const CommonArgs& args)
{
    Command cmd("dc-audit", args);
    const KeyValueConfig& cfg = cmd.cfg();
    const ProblemConfig pc = problem_config(cfg);
    const Problem problem = make_problem(pc);
    const ModelKind model = parse_model_kind(cfg.get_string("model", "dcnet"));
    nn::NetParams params(nn::Architecture{});
    if (cfg.has("checkpoint")) {
        params = nn::load_checkpoint(cfg.get_string("checkpoint", ""));
    } else {
        TrainConfig tc = train_config(cfg, args.seed);
        tc.model = model;
        cmd.summary()["train"] = to_json(tc);
        params = train(tc, problem).params;
    }
    const std::size_t n = get_size(cfg, "n", 20);
    const DcAuditReport report = dc_audit(params, model, n, EvalConfig{}.id_seed, problem);
    write_dc_audit_csv(report, cmd.path("dc_audit.csv"));
    cmd.output("dc_audit.csv");
    cmd.summary()["problem"] = to_json(pc);
    cmd.summary()["results"] = to_json(report);
    std::cout << "max relative residual change: " << report.max_rel_difference << "\n";
    cmd.finish();
    return 0;
}

int cmd_rates(const CommonArgs& args)
{
    Command cmd("rates", args);
    const KeyValueConfig& cfg = cmd.cfg();
    ConvergenceConfig cc;
    cc.seed = args.seed;
    cc.filter = parse_filter_kind(cfg.get_string("filter", "tikhonov"));
    cc.src.mu = cfg.get_double("mu", cc.src.mu);
    cc.src.rho = cfg.get_double("rho", cc.src.rho);
    cc.trials = get_size(cfg, "trials", cc.trials);
    cc.c = cfg.get_double("c", cc.c);
    if (cfg.has("deltas")) cc.deltas = parse_list<double>(cfg.get_string("deltas", ""), "deltas");
    cc.op.height = get_size(cfg, "op_height", cc.op.height);
    cc.op.width = get_size(cfg, "op_width", cc.op.width);
    cc.op.s_min = cfg.get_double("s_min", cc.op.s_min);
    if (cfg.has("k_range")) cc.op.k_range = parse_list<std::size_t>(cfg.get_string("k_range", ""), "k_range");
    cc.op.one_based = cfg.get_bool("one_based", cc.op.one_based);

    json& s = cmd.summary();
    s["study"] = {{"filter", to_string(cc.filter)}, {"mu", cc.src.mu},     {"rho", cc.src.rho},
                  {"trials", cc.trials},            {"c", cc.c},           {"deltas", cc.deltas},
                  {"op_height", cc.op.height},      {"op_width", cc.op.width}, {"s_min", cc.op.s_min}};

    if (cfg.get_bool("learned", false)) {
        const nn::Architecture arch{get_size(cfg, "layers", 3), get_size(cfg, "width", 4)};
        const double layer_norm = cfg.get_double("layer_norm", 1.0);
        const nn::NetParams u = make_fixed_correction(arch, args.seed, layer_norm, {cc.op.height, cc.op.width});
        const NsnConvergenceReport r = nsn_convergence_study(cc, u);
        write_convergence_csv(r.classical, cmd.path("rates.csv"));
        write_convergence_csv(r.learned, cmd.path("rates_learned.csv"));
        cmd.output("rates.csv");
        cmd.output("rates_learned.csv");
        s["results"] = to_json(r.classical);
        s["learned"] = to_json(r.learned);
        s["lipschitz_bound"] = r.lipschitz_bound;
        s["max_bound_ratio"] = r.max_bound_ratio;
        std::cout << "learned error slope " << r.learned.error_fit.slope << "\n";
    } else {
        const ConvergenceReport r = convergence_study(cc);
        write_convergence_csv(r, cmd.path("rates.csv"));
        cmd.output("rates.csv");
        s["results"] = to_json(r);
        std::cout << "error slope " << r.error_fit.slope << " (theory " << r.theory_slope << "), residual slope "
                  << r.residual_fit.slope << "\n";
    }
    cmd.finish();
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Null-space network reconstruction toolkit"};
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* help;
        int (*run)(const CommonArgs&);
    };
    const Sub subs[] = {
        {"gen-data", "Generate ID/OOD square datasets as PGM images with a manifest", cmd_gen_data},
        {"train", "Train ResNet and/or DC-Net post-processing networks", cmd_train},
        {"eval", "Evaluate Tikhonov, ResNet and DC-Net reconstructions", cmd_eval},
        {"dc-audit", "Compare data residuals before and after a network", cmd_dc_audit},
        {"rates", "Convergence-rate study on a graded diagonal operator", cmd_rates},
    };
    std::vector<CommonArgs> args(std::size(subs));
    std::vector<CLI::App*> apps;
    for (std::size_t i = 0; i < std::size(subs); ++i) {
        CLI::App* sc = app.add_subcommand(subs[i].name, subs[i].help);
        sc->add_option("--seed", args[i].seed, "Random seed")->default_val(0);
        sc->add_option("--out", args[i].out, "Output directory")->required();
        sc->add_option("--config", args[i].config, "key=value configuration file")->check(CLI::ExistingFile);
        apps.push_back(sc);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        for (std::size_t i = 0; i < apps.size(); ++i)
            if (apps[i]->parsed()) return subs[i].run(args[i]);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
