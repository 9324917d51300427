#include "nsr/data.hpp"

#include "nsr/error.hpp"
#include "nsr/io.hpp"
#include "nsr/rng.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <string>

namespace nsr {

std::string_view to_string(SampleKind kind)
{
    return kind == SampleKind::id ? "ID" : "OOD";
}

SampleKind parse_sample_kind(std::string_view name)
{
    if (name == "ID" || name == "id") return SampleKind::id;
    if (name == "OOD" || name == "ood") return SampleKind::ood;
    throw ParameterError("unknown sample kind: " + std::string(name));
}

SquareSample gen_square_sample(const SampleSpec& spec)
{
    if (spec.patch_size == 0 || spec.patch_size > spec.image_size)
        throw ParameterError("gen_square_sample: patch must fit inside the image");
    Rng rng(spec.seed);
    const std::uint64_t positions = (spec.image_size - spec.patch_size) / 2 + 1;
    SquareSample s{Image(spec.image_size, spec.image_size, 0.0), 0, 0};
    s.top = 2 * rng.uniform_int(positions);
    s.left = 2 * rng.uniform_int(positions);
    for (std::size_t i = 0; i < spec.patch_size; ++i) {
        const double value = spec.kind == SampleKind::id ? (i % 2 == 0 ? 1.0 : 0.0) : 0.5;
        for (std::size_t j = 0; j < spec.patch_size; ++j) s.image(s.top + i, s.left + j) = value;
    }
    return s;
}

Measurement gen_measurement(const LinOp& op, const Image& x, const NoiseSpec& noise,
                            const std::optional<LinOp>& support)
{
    if (noise.sigma < 0.0) throw ParameterError("gen_measurement: sigma must be >= 0");
    Measurement m{op.apply(x), 0.0};
    if (noise.sigma == 0.0) return m;
    Rng rng(noise.seed);
    Image z(op.out_shape());
    for (double& v : z.values()) v = noise.sigma * rng.normal();
    if (support) z = support->apply(z);
    m.delta = norm(z);
    m.y += z;
    return m;
}

std::vector<SamplePair> make_dataset(const DatasetSpec& spec, const LinOp& op, const std::optional<LinOp>& support)
{
    if (spec.n < 1) throw ParameterError("make_dataset: n must be >= 1");
    std::vector<SamplePair> pairs;
    pairs.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const std::uint64_t seed = spec.base_seed + i;
        SquareSample s = gen_square_sample({spec.image_size, spec.patch_size, spec.kind, seed});
        Measurement m = gen_measurement(op, s.image, {spec.sigma, mix_seed(seed, 1)}, support);
        pairs.push_back({std::move(s.image), std::move(m.y), m.delta, seed, s.top, s.left});
    }
    return pairs;
}

void export_dataset(const std::vector<SamplePair>& pairs, SampleKind kind, const std::string& dir,
                    double data_range)
{
    std::filesystem::create_directories(dir);
    std::ofstream manifest(std::filesystem::path(dir) / "manifest.csv");
    if (!manifest) throw InputError("cannot write manifest in " + dir);
    manifest << std::setprecision(17) << "index,kind,seed,top,left,delta\n";
    char name[32];
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const SamplePair& p = pairs[i];
        std::snprintf(name, sizeof name, "x_%04zu.pgm", i);
        write_pgm16((std::filesystem::path(dir) / name).string(), p.x, data_range);
        std::snprintf(name, sizeof name, "y_%04zu.pgm", i);
        write_pgm16((std::filesystem::path(dir) / name).string(), p.y, data_range);
        manifest << i << "," << to_string(kind) << "," << p.seed << "," << p.top << "," << p.left << "," << p.delta
                 << "\n";
    }
}

} // namespace nsr
