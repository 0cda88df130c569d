#include <cmath>

#include "seco/common/error.hpp"
#include "seco/nn/model.hpp"

namespace seco::nn {

namespace {

class Gen {
public:
    Gen(uint64_t seed, uint32_t scale) : rng_(Prng(seed).derive("make-model")), scale_(scale) {}

    // Uniform integers with magnitude up to ~1.7 / sqrt(fan_in) in real terms, so
    // activations stay of order one through the network.
    std::vector<int64_t> weights(size_t count, size_t fan_in) {
        const double bound = std::ldexp(1.7 / std::sqrt(double(fan_in)), int(scale_));
        return ints(count, std::max<int64_t>(1, std::llround(bound)));
    }
    std::vector<int64_t> bias(size_t count) { return ints(count, int64_t(1) << (2 * scale_ - 3)); }

    Model m;

    void conv(Shape in, uint32_t out_c, uint32_t k) {
        LayerSpec l;
        l.kind = LayerKind::Conv;
        l.in = in;
        l.out = Shape{in.h - k + 1, in.w - k + 1, out_c};
        l.kernel = k;
        l.stride = 1;
        l.weights = weights(size_t(out_c) * in.c * k * k, size_t(in.c) * k * k);
        l.bias = bias(out_c);
        m.layers.push_back(std::move(l));
    }
    void pool(uint32_t k) {
        LayerSpec l;
        l.kind = LayerKind::AvgPool;
        l.in = m.layers.back().out;
        l.out = Shape{l.in.h / k, l.in.w / k, l.in.c};
        l.kernel = k;
        l.stride = k;
        m.layers.push_back(std::move(l));
    }
    void relu() {
        LayerSpec l;
        l.kind = LayerKind::ReLU;
        l.in = l.out = Shape{1, 1, uint32_t(m.layers.back().out.size())};
        m.layers.push_back(std::move(l));
    }
    void fc(uint32_t in, uint32_t out) {
        LayerSpec l;
        l.kind = LayerKind::FullyConnected;
        l.in = Shape{1, 1, in};
        l.out = Shape{1, 1, out};
        l.weights = weights(size_t(in) * out, in);
        l.bias = bias(out);
        m.layers.push_back(std::move(l));
    }

private:
    std::vector<int64_t> ints(size_t count, int64_t bound) {
        std::vector<int64_t> v(count);
        for (auto& x : v) x = static_cast<int64_t>(rng_.uniform(uint64_t(2 * bound + 1))) - bound;
        return v;
    }

    Prng rng_;
    uint32_t scale_;
};

}  // namespace

std::vector<std::string> model_kinds() { return {"minionn", "lenet", "mlp10"}; }

Model make_model(const std::string& kind, uint64_t seed, uint32_t scale) {
    Gen g(seed, scale);
    g.m.name = kind;
    g.m.scale = scale;
    if (kind == "minionn") {
        g.conv(Shape{28, 28, 1}, 16, 5);  // 24x24x16
        g.pool(2);                        // 12x12x16
        g.relu();                         // 2304
        g.conv(Shape{12, 12, 16}, 16, 5);  // 8x8x16
        g.pool(2);                         // 4x4x16
        g.relu();                          // 256
        g.fc(256, 100);
        g.relu();
        g.fc(100, 10);
    } else if (kind == "lenet") {
        g.conv(Shape{28, 28, 1}, 20, 5);  // 24x24x20
        g.pool(2);                        // 12x12x20
        g.relu();                         // 2880
        g.conv(Shape{12, 12, 20}, 50, 5);  // 8x8x50
        g.pool(2);                         // 4x4x50
        g.relu();                          // 800
        g.fc(800, 500);
        g.relu();
        g.fc(500, 10);
    } else if (kind == "mlp10") {
        constexpr uint32_t kWidth = 256;
        for (int i = 0; i < 9; ++i) {
            g.fc(kWidth, kWidth);
            g.relu();
        }
        g.fc(kWidth, 10);
    } else {
        throw ConfigError("unknown model kind '" + kind + "' (expected minionn, lenet or mlp10)");
    }
    g.m.finalize();
    return std::move(g.m);
}

}  // namespace seco::nn
