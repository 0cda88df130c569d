#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "seco/common/error.hpp"
#include "seco/nn/model.hpp"
#include "seco/ring/ring.hpp"

using namespace seco;
using namespace seco::nn;

namespace {

const uint64_t kP = ring::RingParams::desk().t;

LayerSpec random_conv(Shape in, uint32_t out_c, uint32_t k, uint32_t stride, Prng& rng) {
    LayerSpec l;
    l.kind = LayerKind::Conv;
    l.in = in;
    l.out = Shape{(in.h - k) / stride + 1, (in.w - k) / stride + 1, out_c};
    l.kernel = k;
    l.stride = stride;
    l.weights.resize(size_t(out_c) * in.c * k * k);
    for (auto& w : l.weights) w = int64_t(rng.uniform(21)) - 10;
    l.bias.resize(out_c);
    for (auto& b : l.bias) b = int64_t(rng.uniform(101)) - 50;
    return l;
}

// Textbook convolution over a (c, y, x) tensor.
std::vector<int64_t> direct_conv(const LayerSpec& l, const std::vector<int64_t>& x) {
    std::vector<int64_t> y(l.out.size());
    for (uint32_t oc = 0; oc < l.out.c; ++oc)
        for (uint32_t oy = 0; oy < l.out.h; ++oy)
            for (uint32_t ox = 0; ox < l.out.w; ++ox) {
                int64_t acc = l.bias.empty() ? 0 : l.bias[oc];
                for (uint32_t ic = 0; ic < l.in.c; ++ic)
                    for (uint32_t ky = 0; ky < l.kernel; ++ky)
                        for (uint32_t kx = 0; kx < l.kernel; ++kx) {
                            const int64_t w = l.weights[((oc * l.in.c + ic) * l.kernel + ky) * l.kernel + kx];
                            const int64_t v = x[(ic * l.in.h + oy * l.stride + ky) * l.in.w + ox * l.stride + kx];
                            acc += w * v;
                        }
                y[(oc * l.out.h + oy) * l.out.w + ox] = acc;
            }
    return y;
}

std::vector<int64_t> direct_sum_pool(Shape in, uint32_t k, const std::vector<int64_t>& x) {
    const uint32_t oh = in.h / k, ow = in.w / k;
    std::vector<int64_t> y(size_t(oh) * ow * in.c, 0);
    for (uint32_t c = 0; c < in.c; ++c)
        for (uint32_t oy = 0; oy < oh; ++oy)
            for (uint32_t ox = 0; ox < ow; ++ox)
                for (uint32_t ky = 0; ky < k; ++ky)
                    for (uint32_t kx = 0; kx < k; ++kx)
                        y[(c * oh + oy) * ow + ox] += x[(c * in.h + oy * k + ky) * in.w + ox * k + kx];
    return y;
}

std::vector<int64_t> dense_apply(const std::vector<int64_t>& w, const std::vector<int64_t>& bias, size_t rows,
                                 const std::vector<int64_t>& x) {
    std::vector<int64_t> y(rows);
    for (size_t r = 0; r < rows; ++r) {
        int64_t acc = bias.empty() ? 0 : bias[r];
        for (size_t c = 0; c < x.size(); ++c) acc += w[r * x.size() + c] * x[c];
        y[r] = acc;
    }
    return y;
}

LayerSpec fc_layer(uint32_t in, uint32_t out, std::vector<int64_t> w, std::vector<int64_t> b = {}) {
    LayerSpec l;
    l.kind = LayerKind::FullyConnected;
    l.in = Shape{1, 1, in};
    l.out = Shape{1, 1, out};
    l.weights = std::move(w);
    l.bias = std::move(b);
    return l;
}

LayerSpec relu_layer(uint32_t n) {
    LayerSpec l;
    l.kind = LayerKind::ReLU;
    l.in = l.out = Shape{1, 1, n};
    return l;
}

}  // namespace

TEST_CASE("bundled structures: nine layers, four fused blocks") {
    auto mini = make_model("minionn", 1);
    CHECK(mini.layers.size() == 9);
    REQUIRE(mini.num_blocks() == 4);
    CHECK(mini.layers[0].out == Shape{24, 24, 16});
    const size_t mini_dims[4][2] = {{2304, 784}, {256, 2304}, {100, 256}, {10, 100}};
    for (size_t i = 0; i < 4; ++i) {
        CHECK(mini.blocks[i].rows == mini_dims[i][0]);
        CHECK(mini.blocks[i].cols == mini_dims[i][1]);
    }
    CHECK(mini.blocks[0].shift == mini.scale + 2);
    CHECK(mini.blocks[1].shift == mini.scale + 2);
    CHECK(mini.blocks[2].shift == mini.scale);
    CHECK(mini.blocks[2].relu);
    CHECK(!mini.blocks[3].relu);

    auto lenet = make_model("lenet", 1);
    CHECK(lenet.layers.size() == 9);
    REQUIRE(lenet.num_blocks() == 4);
    const size_t lenet_dims[4][2] = {{2880, 784}, {800, 2880}, {500, 800}, {10, 500}};
    for (size_t i = 0; i < 4; ++i) {
        CHECK(lenet.blocks[i].rows == lenet_dims[i][0]);
        CHECK(lenet.blocks[i].cols == lenet_dims[i][1]);
    }

    auto mlp = make_model("mlp10", 1);
    CHECK(mlp.num_blocks() == 10);
    CHECK_THROWS_AS(make_model("resnet", 1), ConfigError);
    CHECK(model_to_json(make_model("minionn", 1)) == model_to_json(mini));
}

TEST_CASE("im2col lowering equals direct convolution") {
    Prng rng(1);
    SUBCASE("1x1 kernel is a scaled identity per channel") {
        LayerSpec l = random_conv(Shape{3, 3, 1}, 1, 1, 1, rng);
        l.weights = {5};
        l.bias.clear();
        auto fc = im2col_lower(l);
        for (size_t r = 0; r < 9; ++r)
            for (size_t c = 0; c < 9; ++c) CHECK(fc.weights[r * 9 + c] == (r == c ? 5 : 0));
    }
    SUBCASE("5x5 on 28x28x1 gives 24*24*16 outputs") {
        auto l = random_conv(Shape{28, 28, 1}, 16, 5, 1, rng);
        auto fc = im2col_lower(l);
        CHECK(fc.out.size() == 24 * 24 * 16);
        CHECK(fc.weights.size() == 24 * 24 * 16 * 784);
        std::vector<int64_t> x(784);
        for (auto& v : x) v = int64_t(rng.uniform(129)) - 64;
        CHECK(dense_apply(fc.weights, fc.bias, fc.out.size(), x) == direct_conv(l, x));
    }
    SUBCASE("random multi-channel, strided") {
        for (uint32_t stride : {1u, 2u}) {
            auto l = random_conv(Shape{9, 11, 3}, 4, 3, stride, rng);
            auto fc = im2col_lower(l);
            std::vector<int64_t> x(l.in.size());
            for (auto& v : x) v = int64_t(rng.uniform(129)) - 64;
            CHECK(dense_apply(fc.weights, fc.bias, fc.out.size(), x) == direct_conv(l, x));
        }
    }
}

TEST_CASE("pooling lowering and block fusion match layer-by-layer evaluation") {
    Prng rng(2);
    LayerSpec pool;
    pool.kind = LayerKind::AvgPool;
    pool.in = Shape{8, 8, 3};
    pool.out = Shape{4, 4, 3};
    pool.kernel = pool.stride = 2;
    auto pfc = avgpool_lower(pool);
    std::vector<int64_t> x(pool.in.size());
    for (auto& v : x) v = int64_t(rng.uniform(129)) - 64;
    CHECK(dense_apply(pfc.weights, {}, pfc.out.size(), x) == direct_sum_pool(pool.in, 2, x));

    auto m = make_model("minionn", 3);
    std::vector<int64_t> in(784);
    for (auto& v : in) v = int64_t(rng.uniform(129)) - 64;
    auto want = direct_sum_pool(m.layers[0].out, 2, direct_conv(m.layers[0], in));
    const auto& b = m.blocks[0];
    CHECK(dense_apply(b.weights, b.bias, b.rows, in) == want);
}

TEST_CASE("model validation rejects broken chains and blobs") {
    Model ok;
    ok.scale = 6;
    ok.layers = {fc_layer(4, 3, std::vector<int64_t>(12, 1)), relu_layer(3), fc_layer(3, 2, std::vector<int64_t>(6, 1))};
    CHECK_NOTHROW(ok.finalize());
    CHECK(ok.num_blocks() == 2);

    Model chain = ok;
    chain.layers[2] = fc_layer(4, 2, std::vector<int64_t>(8, 1));
    CHECK_THROWS_AS(chain.finalize(), ConfigError);

    Model wcount = ok;
    wcount.layers[0].weights.pop_back();
    CHECK_THROWS_AS(wcount.finalize(), ConfigError);

    Model relu_first = ok;
    relu_first.layers.insert(relu_first.layers.begin(), relu_layer(4));
    CHECK_THROWS_AS(relu_first.finalize(), ConfigError);

    Model relu_last = ok;
    relu_last.layers.push_back(relu_layer(2));
    CHECK_THROWS_AS(relu_last.finalize(), ConfigError);

    Model double_relu = ok;
    double_relu.layers.insert(double_relu.layers.begin() + 1, relu_layer(3));
    CHECK_THROWS_AS(double_relu.finalize(), ConfigError);

    CHECK_THROWS_AS(model_from_json("{not json"), ConfigError);
    CHECK_THROWS_AS(model_from_json(R"({"format":"seco-model","version":1,"scale":6,"layers":[{"kind":"pool","in":4,"out":4}]})"),
                    ConfigError);
    CHECK_THROWS_AS(
        model_from_json(R"({"format":"seco-model","version":1,"scale":6,"layers":[{"kind":"fc","in":1,"out":1,"weights":"!!"}]})"),
        ConfigError);
    CHECK_THROWS_AS(load_model("/nonexistent/model.json"), ConfigError);
}

TEST_CASE("model file round trip") {
    auto m = make_model("minionn", 4);
    auto path = std::filesystem::temp_directory_path() / "seco_test_model.json";
    save_model(m, path.string());
    auto back = load_model(path.string());
    std::filesystem::remove(path);
    REQUIRE(back.layers.size() == m.layers.size());
    for (size_t i = 0; i < m.layers.size(); ++i) {
        CHECK(back.layers[i].kind == m.layers[i].kind);
        CHECK(back.layers[i].in.size() == m.layers[i].in.size());
        CHECK(back.layers[i].weights == m.layers[i].weights);
        CHECK(back.layers[i].bias == m.layers[i].bias);
    }
    CHECK(back.blocks[1].weights == m.blocks[1].weights);
    CHECK(back.scale == m.scale);
}

TEST_CASE("fixed-point encoding") {
    FixedPoint fp{6, kP};
    Prng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double x = (double(rng.uniform(1 << 20)) / (1 << 20) - 0.5) * 200;
        CHECK(std::abs(fp.decode(fp.encode(x)) - x) <= std::ldexp(1.0, -6));
    }
    CHECK(fp.encode(-1.0) == kP - 64);
    CHECK(fp.centered(kP - 64) == -64);
}

TEST_CASE("weight shares reconstruct and are fresh per split") {
    auto m = std::make_shared<const Model>(make_model("minionn", 6));
    Prng rng(6);
    auto s1 = split_model(m, 1, kP, rng);
    auto s2 = split_model(m, 1, kP, rng);
    REQUIRE(s1.remote.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        const auto f = m->blocks[1 + i].matrix(kP);
        const auto b = m->blocks[1 + i].bias_residues(kP);
        const auto& r = s1.remote[i];
        for (size_t k = 0; k < f.data.size(); ++k) REQUIRE((r.f2.data[k] + r.f3.data[k]) % kP == f.data[k]);
        for (size_t k = 0; k < b.size(); ++k) REQUIRE((r.b2[k] + r.b3[k]) % kP == b[k]);
    }
    CHECK(s1.remote[0].f2.data != s2.remote[0].f2.data);
    CHECK(s1.gateway[0].data == m->blocks[0].matrix(kP).data);
    CHECK_THROWS_AS(split_model(m, 5, kP, rng), ConfigError);
    auto all = split_model(m, 4, kP, rng);
    CHECK(all.remote.empty());
}

TEST_CASE("plaintext oracle: trivial cases and split independence") {
    Model id;
    id.scale = 6;
    std::vector<int64_t> eye(16, 0);
    for (int i = 0; i < 4; ++i) eye[i * 5] = 1;
    id.layers = {fc_layer(4, 4, eye)};
    id.finalize();
    std::vector<uint64_t> x = {1, 2, kP - 3, 400};
    CHECK(plaintext_infer(id, kP, x) == x);

    auto zero = make_model("minionn", 7);
    for (auto& l : zero.layers) std::fill(l.bias.begin(), l.bias.end(), 0);
    zero.finalize();
    CHECK(plaintext_infer(zero, kP, std::vector<uint64_t>(784, 0)) == std::vector<uint64_t>(10, 0));

    Prng rng(8);
    for (const auto& kind : {"minionn", "mlp10"}) {
        auto m = std::make_shared<const Model>(make_model(kind, 9));
        for (int trial = 0; trial < 3; ++trial) {
            auto in = random_input(*m, kP, rng);
            const auto want = plaintext_infer(*m, kP, in);
            for (size_t l = 0; l <= m->num_blocks(); ++l) CHECK(plaintext_infer(split_model(m, l, kP, rng), in) == want);
        }
    }
    CHECK_THROWS_AS(plaintext_infer(id, kP, std::vector<uint64_t>(3, 0)), ConfigError);
}

TEST_CASE("fixed-point forward pass tracks a floating-point reference") {
    Prng rng(10);
    const uint32_t s = 6;
    const double lsb = std::ldexp(1.0, -int(s));
    // Weights and inputs on the fixed-point grid, so only the truncation after the
    // hidden layer differs from the float pass. sum |w2| <= 8 * 0.5 bounds that error by 4 lsb.
    for (int trial = 0; trial < 50; ++trial) {
        const uint32_t n_in = 6, hidden = 8, n_out = 3;
        std::vector<int64_t> w1(hidden * n_in), w2(n_out * hidden), b1(hidden), b2(n_out);
        for (auto& w : w1) w = int64_t(rng.uniform(65)) - 32;
        for (auto& w : w2) w = int64_t(rng.uniform(65)) - 32;
        for (auto& b : b1) b = int64_t(rng.uniform(1025)) - 512;
        for (auto& b : b2) b = int64_t(rng.uniform(1025)) - 512;
        Model m;
        m.scale = s;
        m.layers = {fc_layer(n_in, hidden, w1, b1), relu_layer(hidden), fc_layer(hidden, n_out, w2, b2)};
        m.finalize();

        std::vector<double> xf(n_in);
        std::vector<uint64_t> xq(n_in);
        FixedPoint fp{s, kP};
        for (uint32_t i = 0; i < n_in; ++i) {
            xf[i] = (double(rng.uniform(129)) - 64) * lsb;
            xq[i] = fp.encode(xf[i]);
        }
        std::vector<double> h(hidden), y(n_out);
        for (uint32_t r = 0; r < hidden; ++r) {
            double acc = b1[r] * lsb * lsb;
            for (uint32_t c = 0; c < n_in; ++c) acc += w1[r * n_in + c] * lsb * xf[c];
            h[r] = std::max(acc, 0.0);
        }
        for (uint32_t r = 0; r < n_out; ++r) {
            double acc = b2[r] * lsb * lsb;
            for (uint32_t c = 0; c < hidden; ++c) acc += w2[r * hidden + c] * lsb * h[c];
            y[r] = acc;
        }
        auto logits = plaintext_infer(m, kP, xq);
        for (uint32_t r = 0; r < n_out; ++r)
            REQUIRE(std::abs(fp.decode(logits[r], s + m.blocks.back().shift) - y[r]) <= 4 * lsb);
    }
}
