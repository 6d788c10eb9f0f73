#include "wavefdrc/checkpoint.hpp"

#include "binary_io.hpp"

namespace wavefdrc {

using detail::ByteReader;
using detail::write_le;

namespace {

constexpr char kMagic[5] = "WNET";
constexpr std::uint16_t kVersion = 1;

template <typename Scalar>
void write_values(std::ostream& os, const std::vector<Scalar>& xs) {
    for (Scalar x : xs) write_le<Scalar>(os, x);
}

template <typename Scalar>
void read_values(ByteReader& in, Precision stored, std::vector<Scalar>& xs, const std::string& field) {
    for (auto& x : xs) {
        if (stored == Precision::single)
            x = static_cast<Scalar>(in.read<float>(field.c_str()));
        else
            x = static_cast<Scalar>(in.read<double>(field.c_str()));
    }
}

std::string layer_field(int l, const char* name) { return "layer " + std::to_string(l + 1) + " " + name; }

}  // namespace

template <typename Scalar>
void write_checkpoint(std::ostream& os, const ModelParams<Scalar>& params, const AdamState<Scalar>* adam) {
    os.write(kMagic, 4);
    write_le<std::uint16_t>(os, kVersion);
    write_le<std::uint8_t>(os, static_cast<std::uint8_t>(precision_of<Scalar>()));
    write_le<std::uint8_t>(os, static_cast<std::uint8_t>(kLayerCount));
    for (const auto& layer : params.layers) {
        write_le<std::uint32_t>(os, static_cast<std::uint32_t>(layer.out_channels));
        write_le<std::uint32_t>(os, static_cast<std::uint32_t>(layer.in_channels));
        write_le<std::uint32_t>(os, kKernelSize);
        write_le<std::uint32_t>(os, kKernelSize);
        write_values(os, layer.weights);
        write_values(os, layer.biases);
    }
    write_le<std::uint8_t>(os, adam ? 1 : 0);
    if (adam) {
        write_le<std::uint64_t>(os, static_cast<std::uint64_t>(adam->t));
        write_le<double>(os, adam->beta1);
        write_le<double>(os, adam->beta2);
        write_le<double>(os, adam->eps);
        for (int l = 0; l < kLayerCount; ++l) {
            write_values(os, adam->m.layers[l].weights);
            write_values(os, adam->m.layers[l].biases);
            write_values(os, adam->v.layers[l].weights);
            write_values(os, adam->v.layers[l].biases);
        }
    }
    if (!os) throw Error("write_checkpoint: stream error");
}

template <typename Scalar>
Checkpoint<Scalar> read_checkpoint(std::istream& is) {
    ByteReader in(is, "WNET checkpoint");
    in.expect_magic(kMagic);
    const auto version = in.read<std::uint16_t>("version");
    if (version != kVersion) in.fail("unsupported version " + std::to_string(version));
    const auto flag = in.read<std::uint8_t>("precision flag");
    if (flag > 1) in.fail("bad precision flag " + std::to_string(flag));
    const auto stored = static_cast<Precision>(flag);
    if (stored == Precision::double_ && precision_of<Scalar>() == Precision::single)
        in.fail("precision flag: double-precision checkpoint cannot be loaded in single precision");
    const auto layers = in.read<std::uint8_t>("layer count");
    if (layers != kLayerCount) in.fail("layer count " + std::to_string(layers) + " (expected 3)");

    auto params = ModelParams<Scalar>::zeros();
    for (int l = 0; l < kLayerCount; ++l) {
        auto& layer = params.layers[l];
        const auto out = in.read<std::uint32_t>(layer_field(l, "out").c_str());
        const auto inc = in.read<std::uint32_t>(layer_field(l, "in").c_str());
        const auto kh = in.read<std::uint32_t>(layer_field(l, "kh").c_str());
        const auto kw = in.read<std::uint32_t>(layer_field(l, "kw").c_str());
        if (out != static_cast<std::uint32_t>(layer.out_channels)) in.fail(layer_field(l, "out") + " = " + std::to_string(out));
        if (inc != static_cast<std::uint32_t>(layer.in_channels)) in.fail(layer_field(l, "in") + " = " + std::to_string(inc));
        if (kh != kKernelSize) in.fail(layer_field(l, "kh") + " = " + std::to_string(kh));
        if (kw != kKernelSize) in.fail(layer_field(l, "kw") + " = " + std::to_string(kw));
        read_values(in, stored, layer.weights, layer_field(l, "weights"));
        read_values(in, stored, layer.biases, layer_field(l, "biases"));
    }

    Checkpoint<Scalar> ck{std::move(params), std::nullopt};
    const auto has_adam = in.read<std::uint8_t>("adam flag");
    if (has_adam > 1) in.fail("bad adam flag " + std::to_string(has_adam));
    if (has_adam) {
        auto adam = AdamState<Scalar>::fresh();
        adam.t = static_cast<std::int64_t>(in.read<std::uint64_t>("adam t"));
        adam.beta1 = in.read<double>("adam beta1");
        adam.beta2 = in.read<double>("adam beta2");
        adam.eps = in.read<double>("adam eps");
        for (int l = 0; l < kLayerCount; ++l) {
            read_values(in, stored, adam.m.layers[l].weights, layer_field(l, "adam m weights"));
            read_values(in, stored, adam.m.layers[l].biases, layer_field(l, "adam m biases"));
            read_values(in, stored, adam.v.layers[l].weights, layer_field(l, "adam v weights"));
            read_values(in, stored, adam.v.layers[l].biases, layer_field(l, "adam v biases"));
        }
        ck.adam = std::move(adam);
    }
    return ck;
}

Precision read_checkpoint_precision(const std::filesystem::path& path) {
    auto is = detail::open_for_reading(path);
    ByteReader in(is, path.string());
    in.expect_magic(kMagic);
    const auto version = in.read<std::uint16_t>("version");
    if (version != kVersion) in.fail("unsupported version " + std::to_string(version));
    const auto flag = in.read<std::uint8_t>("precision flag");
    if (flag > 1) in.fail("bad precision flag " + std::to_string(flag));
    return static_cast<Precision>(flag);
}

template <typename Scalar>
void save_params(const ModelParams<Scalar>& params, const std::filesystem::path& path,
                 const AdamState<Scalar>* adam) {
    detail::atomic_write(path, [&](std::ostream& os) { write_checkpoint(os, params, adam); });
}

template <typename Scalar>
Checkpoint<Scalar> load_checkpoint(const std::filesystem::path& path) {
    auto is = detail::open_for_reading(path);
    try {
        return read_checkpoint<Scalar>(is);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

#define WAVEFDRC_INSTANTIATE_CKPT(S)                                                                  \
    template void write_checkpoint<S>(std::ostream&, const ModelParams<S>&, const AdamState<S>*);     \
    template Checkpoint<S> read_checkpoint<S>(std::istream&);                                          \
    template void save_params<S>(const ModelParams<S>&, const std::filesystem::path&,                  \
                                 const AdamState<S>*);                                                 \
    template Checkpoint<S> load_checkpoint<S>(const std::filesystem::path&);

WAVEFDRC_INSTANTIATE_CKPT(float)
WAVEFDRC_INSTANTIATE_CKPT(double)

#undef WAVEFDRC_INSTANTIATE_CKPT

}  // namespace wavefdrc
