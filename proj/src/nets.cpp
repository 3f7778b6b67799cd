#include "gaal/nets.hpp"

#include <cmath>
#include <cstring>

#include "gaal/binary_io.hpp"
#include "gaal/errors.hpp"

namespace gaal {

namespace {

constexpr char kNetMagic[8] = {'G', 'A', 'A', 'L', 'N', 'E', 'T', '1'};

double activate(Activation a, double v) {
    switch (a) {
        case Activation::Identity: return v;
        case Activation::Relu: return v > 0.0 ? v : 0.0;
        case Activation::LeakyRelu: return v > 0.0 ? v : ad::kDefaultLeakySlope * v;
        case Activation::Tanh: return std::tanh(v);
        case Activation::Sigmoid:
            if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
            return std::exp(v) / (1.0 + std::exp(v));
    }
    return v;
}

ad::Var activate(Activation a, ad::Var v) {
    switch (a) {
        case Activation::Identity: return v;
        case Activation::Relu: return ad::relu(v);
        case Activation::LeakyRelu: return ad::leaky_relu(v);
        case Activation::Tanh: return ad::tanh(v);
        case Activation::Sigmoid: return ad::sigmoid(v);
    }
    return v;
}

void validate_specs(const std::vector<LayerSpec>& specs) {
    if (specs.empty()) throw ConfigError("network needs at least one layer", "layers");
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (specs[i].in == 0 || specs[i].out == 0)
            throw ConfigError("layer " + std::to_string(i) + " has a zero dimension", "layers");
        if (i > 0 && specs[i].in != specs[i - 1].out)
            throw ConfigError("layer " + std::to_string(i) + " expects " + std::to_string(specs[i].in) +
                                  " inputs but layer " + std::to_string(i - 1) + " produces " +
                                  std::to_string(specs[i - 1].out),
                              "layers");
    }
}

std::vector<LayerSpec> chain(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out,
                             Activation last) {
    std::vector<LayerSpec> specs;
    std::size_t prev = in;
    for (std::size_t width : hidden) {
        specs.push_back({prev, width, Activation::LeakyRelu});
        prev = width;
    }
    specs.push_back({prev, out, last});
    return specs;
}

}  // namespace

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::Relu: return "relu";
        case Activation::LeakyRelu: return "leaky_relu";
        case Activation::Tanh: return "tanh";
        case Activation::Sigmoid: return "sigmoid";
    }
    return "?";
}

Activation parse_activation(const std::string& name) {
    for (auto a : {Activation::Identity, Activation::Relu, Activation::LeakyRelu, Activation::Tanh,
                   Activation::Sigmoid})
        if (name == activation_name(a)) return a;
    throw ConfigError("unknown activation '" + name + "'", "activation");
}

Mlp::Mlp(std::vector<LayerSpec> specs, std::vector<Tensor> params) : specs_(std::move(specs)), params_(std::move(params)) {
    validate_specs(specs_);
    if (params_.size() != 2 * specs_.size())
        throw DimensionError("network with " + std::to_string(specs_.size()) + " layers needs " +
                             std::to_string(2 * specs_.size()) + " parameter tensors, got " +
                             std::to_string(params_.size()));
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        const Shape w{specs_[i].out, specs_[i].in};
        const Shape b{specs_[i].out};
        if (params_[2 * i].shape() != w || params_[2 * i + 1].shape() != b)
            throw DimensionError("layer " + std::to_string(i) + " parameters have shapes " +
                                 shape_string(params_[2 * i].shape()) + ", " +
                                 shape_string(params_[2 * i + 1].shape()) + "; expected " + shape_string(w) + ", " +
                                 shape_string(b));
    }
}

Mlp Mlp::init(std::vector<LayerSpec> specs, std::uint64_t seed) {
    validate_specs(specs);
    Rng rng(seed);
    std::vector<Tensor> params;
    for (const auto& s : specs) {
        Tensor w(Shape{s.out, s.in});
        for (auto& v : w.data()) v = rng.normal(0.0, kWeightInitStddev);
        params.push_back(std::move(w));
        params.emplace_back(Shape{s.out}, 0.0);
    }
    return Mlp(std::move(specs), std::move(params));
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.numel();
    return n;
}

Tensor Mlp::forward(const Tensor& x) const {
    if (x.rank() < 1 || x.rank() > 2 || x.cols() != input_dim())
        throw DimensionError("network expects input width " + std::to_string(input_dim()) + ", got shape " +
                             shape_string(x.shape()));
    const std::size_t batch = x.rows();
    std::vector<double> cur(x.values());
    for (std::size_t l = 0; l < specs_.size(); ++l) {
        const auto& s = specs_[l];
        const Tensor& w = params_[2 * l];
        const Tensor& b = params_[2 * l + 1];
        std::vector<double> next(batch * s.out);
        for (std::size_t r = 0; r < batch; ++r) {
            const double* xr = &cur[r * s.in];
            for (std::size_t o = 0; o < s.out; ++o) {
                const double* wr = &w.data()[o * s.in];
                double acc = b[o];
                for (std::size_t i = 0; i < s.in; ++i) acc += wr[i] * xr[i];
                next[r * s.out + o] = activate(s.activation, acc);
            }
        }
        cur = std::move(next);
    }
    return Tensor(x.rank() == 1 ? Shape{output_dim()} : Shape{batch, output_dim()}, std::move(cur));
}

std::vector<ad::Var> Mlp::bind(ad::Tape& tape, bool requires_grad) const {
    std::vector<ad::Var> vars;
    vars.reserve(params_.size());
    for (const auto& p : params_) vars.push_back(tape.leaf(p, requires_grad));
    return vars;
}

ad::Var Mlp::forward(std::span<const ad::Var> params, ad::Var x) const {
    if (params.size() != params_.size())
        throw DimensionError("expected " + std::to_string(params_.size()) + " bound parameters, got " +
                             std::to_string(params.size()));
    ad::Var h = x;
    for (std::size_t l = 0; l < specs_.size(); ++l)
        h = activate(specs_[l].activation, ad::affine(h, params[2 * l], params[2 * l + 1]));
    return h;
}

GeneratorNet::GeneratorNet(Mlp net) : net_(std::move(net)) {
    if (net_.specs().back().activation != Activation::Tanh)
        throw ConfigError("generator output layer must use tanh", "layers");
}

GeneratorNet GeneratorNet::create(std::size_t latent_dim, std::vector<std::size_t> hidden, std::size_t output_dim,
                                  std::uint64_t seed) {
    return GeneratorNet(Mlp::init(chain(latent_dim, hidden, output_dim, Activation::Tanh), seed));
}

DiscriminatorNet::DiscriminatorNet(Mlp net) : net_(std::move(net)) {
    if (net_.specs().back().activation != Activation::Sigmoid || net_.output_dim() != 1)
        throw ConfigError("discriminator output layer must be a single sigmoid unit", "layers");
}

DiscriminatorNet DiscriminatorNet::create(std::size_t input_dim, std::vector<std::size_t> hidden,
                                          std::uint64_t seed) {
    return DiscriminatorNet(Mlp::init(chain(input_dim, hidden, 1, Activation::Sigmoid), seed));
}

Tensor generator_forward(const GeneratorNet& g, const Tensor& z) {
    if (z.rank() == 1 && z.dim(0) != g.latent_dim())
        throw DimensionError("latent vector has " + std::to_string(z.dim(0)) + " entries, generator expects " +
                             std::to_string(g.latent_dim()));
    return g.net().forward(z);
}

double discriminator_forward(const DiscriminatorNet& d, const Tensor& x) {
    if (x.rank() != 1 || x.dim(0) != d.input_dim())
        throw DimensionError("discriminator expects an instance of length " + std::to_string(d.input_dim()) +
                             ", got shape " + shape_string(x.shape()));
    return d.net().forward(x)[0];
}

Tensor discriminator_forward_batch(const DiscriminatorNet& d, const Tensor& batch) {
    Tensor out = d.net().forward(batch);
    return out.reshaped(Shape{out.numel()});
}

std::vector<Tensor> sample_latent(std::size_t latent_dim, std::size_t count, Rng& rng) {
    std::vector<Tensor> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Tensor z(Shape{latent_dim});
        for (auto& v : z.data()) v = rng.uniform(-1.0, 1.0);
        out.push_back(std::move(z));
    }
    return out;
}

std::vector<Tensor> sample_latent(std::size_t latent_dim, std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    return sample_latent(latent_dim, count, rng);
}

std::vector<std::uint8_t> serialize_network(const Mlp& net) {
    std::vector<std::uint8_t> out(std::begin(kNetMagic), std::end(kNetMagic));
    io::put_u32_le(out, static_cast<std::uint32_t>(net.specs().size()));
    for (const auto& s : net.specs()) {
        io::put_u32_le(out, static_cast<std::uint32_t>(s.in));
        io::put_u32_le(out, static_cast<std::uint32_t>(s.out));
        io::put_u32_le(out, static_cast<std::uint32_t>(s.activation));
    }
    for (const auto& p : net.params())
        for (double v : p.data()) io::put_f64_le(out, v);
    return out;
}

Mlp deserialize_network(std::span<const std::uint8_t> bytes) {
    io::Reader in(bytes, "network checkpoint");
    auto magic = in.take(sizeof(kNetMagic));
    if (std::memcmp(magic.data(), kNetMagic, sizeof(kNetMagic)) != 0)
        throw FormatError("network checkpoint: bad magic, expected GAALNET1");
    const std::uint32_t layers = in.u32_le();
    if (layers == 0 || layers > 4096) throw FormatError("network checkpoint: implausible layer count");
    std::vector<LayerSpec> specs;
    for (std::uint32_t i = 0; i < layers; ++i) {
        LayerSpec s;
        s.in = in.u32_le();
        s.out = in.u32_le();
        const std::uint32_t act = in.u32_le();
        if (act > static_cast<std::uint32_t>(Activation::Sigmoid))
            throw FormatError("network checkpoint: unknown activation code " + std::to_string(act));
        s.activation = static_cast<Activation>(act);
        specs.push_back(s);
    }
    validate_specs(specs);
    std::vector<Tensor> params;
    for (const auto& s : specs) {
        Tensor w(Shape{s.out, s.in});
        for (auto& v : w.data()) v = in.f64_le();
        Tensor b(Shape{s.out});
        for (auto& v : b.data()) v = in.f64_le();
        params.push_back(std::move(w));
        params.push_back(std::move(b));
    }
    if (in.remaining() != 0) throw FormatError("network checkpoint: trailing bytes");
    return Mlp(std::move(specs), std::move(params));
}

void save_network(const std::filesystem::path& path, const Mlp& net) { io::write_file(path, serialize_network(net)); }

Mlp load_network(const std::filesystem::path& path) { return deserialize_network(io::read_file(path)); }

}  // namespace gaal
