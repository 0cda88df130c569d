#include <bit>
#include <cmath>

#include "internal.hpp"
#include "seco/common/error.hpp"

namespace seco::nn {

const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::FullyConnected: return "fc";
        case LayerKind::Conv: return "conv";
        case LayerKind::AvgPool: return "avgpool";
        case LayerKind::ReLU: return "relu";
    }
    return "?";
}

namespace {

uint64_t to_residue(int64_t v, uint64_t p) {
    const int64_t r = v % static_cast<int64_t>(p);
    return r < 0 ? static_cast<uint64_t>(r + static_cast<int64_t>(p)) : static_cast<uint64_t>(r);
}

std::string where(size_t i, const LayerSpec& l) {
    return "layer " + std::to_string(i + 1) + " (" + layer_kind_name(l.kind) + ")";
}

void check_layer(size_t i, const LayerSpec& l) {
    const std::string at = where(i, l);
    switch (l.kind) {
        case LayerKind::FullyConnected:
            if (l.weights.size() != l.in.size() * l.out.size()) throw ConfigError(at + ": weight count does not match dims");
            if (!l.bias.empty() && l.bias.size() != l.out.size()) throw ConfigError(at + ": bias count does not match dims");
            break;
        case LayerKind::Conv: {
            if (l.kernel == 0 || l.stride == 0) throw ConfigError(at + ": kernel and stride must be positive");
            if (l.in.h < l.kernel || l.in.w < l.kernel) throw ConfigError(at + ": kernel larger than input");
            const uint32_t oh = (l.in.h - l.kernel) / l.stride + 1, ow = (l.in.w - l.kernel) / l.stride + 1;
            if (l.out.h != oh || l.out.w != ow) throw ConfigError(at + ": output size does not follow from kernel/stride");
            if (l.weights.size() != size_t(l.out.c) * l.in.c * l.kernel * l.kernel)
                throw ConfigError(at + ": weight count does not match dims");
            if (!l.bias.empty() && l.bias.size() != l.out.c) throw ConfigError(at + ": bias count does not match channels");
            break;
        }
        case LayerKind::AvgPool: {
            if (l.kernel == 0 || l.stride == 0) throw ConfigError(at + ": kernel and stride must be positive");
            if (!std::has_single_bit(l.kernel * l.kernel)) throw ConfigError(at + ": pooling window must be a power of two");
            if (l.in.h < l.kernel || l.in.w < l.kernel) throw ConfigError(at + ": window larger than input");
            const uint32_t oh = (l.in.h - l.kernel) / l.stride + 1, ow = (l.in.w - l.kernel) / l.stride + 1;
            if (l.out.h != oh || l.out.w != ow || l.out.c != l.in.c)
                throw ConfigError(at + ": output size does not follow from window/stride");
            if (!l.weights.empty() || !l.bias.empty()) throw ConfigError(at + ": pooling carries no weights");
            break;
        }
        case LayerKind::ReLU:
            if (l.in.size() != l.out.size()) throw ConfigError(at + ": ReLU must preserve size");
            if (!l.weights.empty() || !l.bias.empty()) throw ConfigError(at + ": ReLU carries no weights");
            break;
    }
}

}  // namespace

bfv::ModMatrix LinearBlock::matrix(uint64_t p) const {
    bfv::ModMatrix m(rows, cols);
    for (size_t i = 0; i < weights.size(); ++i) m.data[i] = to_residue(weights[i], p);
    return m;
}

std::vector<uint64_t> LinearBlock::bias_residues(uint64_t p) const {
    std::vector<uint64_t> b(rows);
    for (size_t i = 0; i < rows; ++i) b[i] = to_residue(bias[i], p);
    return b;
}

void Model::finalize() {
    if (layers.empty()) throw ConfigError("model has no layers");
    if (scale == 0 || scale > 20) throw ConfigError("fixed-point scale must be in [1, 20]");
    for (size_t i = 0; i < layers.size(); ++i) {
        check_layer(i, layers[i]);
        if (i > 0 && layers[i - 1].out.size() != layers[i].in.size())
            throw ConfigError(where(i, layers[i]) + ": input size " + std::to_string(layers[i].in.size()) +
                              " does not chain with previous output " + std::to_string(layers[i - 1].out.size()));
    }
    if (!layers.front().linear()) throw ConfigError("model must start with a linear layer");
    if (!layers.back().linear()) throw ConfigError("model must end with a linear layer");

    blocks.clear();
    size_t first = 0;
    for (size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].linear()) continue;
        if (i == first) throw ConfigError(where(i, layers[i]) + ": ReLU must follow a linear layer");
        auto b = fuse_block(layers, first, i - 1, scale);
        b.relu = true;
        blocks.push_back(std::move(b));
        first = i + 1;
    }
    blocks.push_back(fuse_block(layers, first, layers.size() - 1, scale));
}

uint64_t FixedPoint::encode(double x) const {
    return to_residue(static_cast<int64_t>(std::llround(std::ldexp(x, static_cast<int>(scale)))), p);
}

int64_t FixedPoint::centered(uint64_t v) const {
    return v >= (p + 1) / 2 ? static_cast<int64_t>(v) - static_cast<int64_t>(p) : static_cast<int64_t>(v);
}

double FixedPoint::decode(uint64_t v, uint32_t frac_bits) const {
    return std::ldexp(static_cast<double>(centered(v)), -static_cast<int>(frac_bits));
}

ModelSplit split_model(std::shared_ptr<const Model> model, size_t l, uint64_t p, Prng& rng) {
    if (!model || model->blocks.empty()) throw ConfigError("model is not finalized");
    if (l > model->num_blocks())
        throw ConfigError("split point l=" + std::to_string(l) + " exceeds the block count " +
                          std::to_string(model->num_blocks()));
    ModelSplit s;
    s.model = model;
    s.l = l;
    s.p = p;
    for (size_t i = 0; i < l; ++i) {
        s.gateway.push_back(model->blocks[i].matrix(p));
        s.gateway_bias.push_back(model->blocks[i].bias_residues(p));
    }
    for (size_t i = l; i < model->num_blocks(); ++i) {
        const auto& blk = model->blocks[i];
        RemoteShares r;
        r.f3 = blk.matrix(p);
        r.f2 = bfv::ModMatrix(blk.rows, blk.cols);
        for (size_t k = 0; k < r.f3.data.size(); ++k) {
            r.f2.data[k] = rng.uniform(p);
            r.f3.data[k] = (r.f3.data[k] + p - r.f2.data[k]) % p;
        }
        r.b3 = blk.bias_residues(p);
        r.b2.resize(blk.rows);
        for (size_t k = 0; k < blk.rows; ++k) {
            r.b2[k] = rng.uniform(p);
            r.b3[k] = (r.b3[k] + p - r.b2[k]) % p;
        }
        s.remote.push_back(std::move(r));
    }
    return s;
}

ModelSplit load_split(const std::string& path, size_t l, uint64_t p, Prng& rng) {
    return split_model(std::make_shared<const Model>(load_model(path)), l, p, rng);
}

namespace {

// W x + b over residues, with signed weights and 128-bit accumulation.
std::vector<uint64_t> affine(const LinearBlock& b, uint64_t p, std::span<const uint64_t> x) {
    std::vector<uint64_t> y(b.rows);
    const __int128 P = p;
#pragma omp parallel for schedule(static)
    for (size_t r = 0; r < b.rows; ++r) {
        __int128 acc = b.bias[r];
        const int64_t* w = b.weights.data() + r * b.cols;
        for (size_t c = 0; c < b.cols; ++c) acc += static_cast<__int128>(w[c]) * x[c];
        acc %= P;
        if (acc < 0) acc += P;
        y[r] = static_cast<uint64_t>(acc);
    }
    return y;
}

void check_input(size_t got, size_t want) {
    if (got != want)
        throw ConfigError("input has " + std::to_string(got) + " values, the model expects " + std::to_string(want));
}

}  // namespace

std::vector<std::vector<uint64_t>> plaintext_trace(const Model& m, uint64_t p, std::span<const uint64_t> x) {
    check_input(x.size(), m.input_size());
    std::vector<std::vector<uint64_t>> trace;
    trace.emplace_back(x.begin(), x.end());
    for (const auto& b : m.blocks) {
        auto z = affine(b, p, trace.back());
        if (b.relu)
            for (auto& v : z) v = relu_truncate(v, p, b.shift);
        trace.push_back(std::move(z));
    }
    return trace;
}

std::vector<uint64_t> plaintext_infer(const Model& m, uint64_t p, std::span<const uint64_t> x) {
    return plaintext_trace(m, p, x).back();
}

std::vector<uint64_t> plaintext_infer(const ModelSplit& s, std::span<const uint64_t> x) {
    const Model& m = *s.model;
    check_input(x.size(), m.input_size());
    std::vector<uint64_t> v(x.begin(), x.end());
    for (size_t i = 0; i < m.num_blocks(); ++i) {
        std::vector<uint64_t> z;
        if (i < s.l) {
            z = bfv::matvec(s.gateway[i], v, s.p);
            for (size_t k = 0; k < z.size(); ++k) z[k] = (z[k] + s.gateway_bias[i][k]) % s.p;
        } else {
            const auto& r = s.remote[i - s.l];
            auto z2 = bfv::matvec(r.f2, v, s.p);
            auto z3 = bfv::matvec(r.f3, v, s.p);
            z.resize(z2.size());
            for (size_t k = 0; k < z.size(); ++k) z[k] = ((z2[k] + r.b2[k]) % s.p + z3[k] + r.b3[k]) % s.p;
        }
        if (m.blocks[i].relu)
            for (auto& e : z) e = relu_truncate(e, s.p, m.blocks[i].shift);
        v = std::move(z);
    }
    return v;
}

std::vector<uint64_t> random_input(const Model& m, uint64_t p, Prng& rng) {
    const uint64_t one = uint64_t(1) << m.scale;
    std::vector<uint64_t> x(m.input_size());
    for (auto& v : x) v = (rng.uniform(2 * one) + p - one) % p;
    return x;
}

}  // namespace seco::nn
