#include <bit>

#include "internal.hpp"
#include "seco/common/error.hpp"

namespace seco::nn {

LayerSpec im2col_lower(const LayerSpec& conv) {
    if (conv.kind != LayerKind::Conv) throw ConfigError("im2col_lower expects a convolution");
    const Shape& in = conv.in;
    const Shape& out = conv.out;
    const uint32_t k = conv.kernel, st = conv.stride;
    LayerSpec fc;
    fc.kind = LayerKind::FullyConnected;
    fc.in = in;
    fc.out = out;
    const size_t rows = out.size(), cols = in.size();
    fc.weights.assign(rows * cols, 0);
    for (uint32_t oc = 0; oc < out.c; ++oc)
        for (uint32_t oy = 0; oy < out.h; ++oy)
            for (uint32_t ox = 0; ox < out.w; ++ox) {
                int64_t* row = fc.weights.data() + ((size_t(oc) * out.h + oy) * out.w + ox) * cols;
                for (uint32_t ic = 0; ic < in.c; ++ic)
                    for (uint32_t ky = 0; ky < k; ++ky)
                        for (uint32_t kx = 0; kx < k; ++kx) {
                            const size_t col = (size_t(ic) * in.h + oy * st + ky) * in.w + ox * st + kx;
                            row[col] = conv.weights[((size_t(oc) * in.c + ic) * k + ky) * k + kx];
                        }
            }
    if (!conv.bias.empty()) {
        fc.bias.resize(rows);
        for (uint32_t oc = 0; oc < out.c; ++oc)
            for (size_t i = 0; i < size_t(out.h) * out.w; ++i) fc.bias[oc * size_t(out.h) * out.w + i] = conv.bias[oc];
    }
    return fc;
}

LayerSpec avgpool_lower(const LayerSpec& pool) {
    if (pool.kind != LayerKind::AvgPool) throw ConfigError("avgpool_lower expects a pooling layer");
    const Shape& in = pool.in;
    const Shape& out = pool.out;
    const uint32_t k = pool.kernel, st = pool.stride;
    LayerSpec fc;
    fc.kind = LayerKind::FullyConnected;
    fc.in = in;
    fc.out = out;
    const size_t cols = in.size();
    fc.weights.assign(out.size() * cols, 0);
    for (uint32_t c = 0; c < out.c; ++c)
        for (uint32_t oy = 0; oy < out.h; ++oy)
            for (uint32_t ox = 0; ox < out.w; ++ox) {
                int64_t* row = fc.weights.data() + ((size_t(c) * out.h + oy) * out.w + ox) * cols;
                for (uint32_t ky = 0; ky < k; ++ky)
                    for (uint32_t kx = 0; kx < k; ++kx) row[(size_t(c) * in.h + oy * st + ky) * in.w + ox * st + kx] = 1;
            }
    return fc;
}

namespace {

// a (m x k) times b (k x n), skipping zero entries of a: lowered pooling and
// convolution matrices are mostly zeros.
std::vector<int64_t> sparse_left_mul(const std::vector<int64_t>& a, size_t m, size_t k, const std::vector<int64_t>& b,
                                     size_t n) {
    std::vector<int64_t> c(m * n, 0);
#pragma omp parallel for schedule(dynamic, 16)
    for (size_t i = 0; i < m; ++i) {
        int64_t* ci = c.data() + i * n;
        const int64_t* ai = a.data() + i * k;
        for (size_t j = 0; j < k; ++j) {
            const int64_t v = ai[j];
            if (v == 0) continue;
            const int64_t* bj = b.data() + j * n;
            for (size_t col = 0; col < n; ++col) ci[col] += v * bj[col];
        }
    }
    return c;
}

LayerSpec lowered(const LayerSpec& l) {
    switch (l.kind) {
        case LayerKind::Conv: return im2col_lower(l);
        case LayerKind::AvgPool: return avgpool_lower(l);
        case LayerKind::FullyConnected: return l;
        case LayerKind::ReLU: break;
    }
    throw ConfigError("ReLU has no linear lowering");
}

}  // namespace

LinearBlock fuse_block(const std::vector<LayerSpec>& layers, size_t first, size_t last, uint32_t scale) {
    LinearBlock b;
    b.first_layer = first;
    b.last_layer = last;
    b.shift = scale;
    LayerSpec acc = lowered(layers[first]);
    b.cols = acc.in.size();
    b.rows = acc.out.size();
    b.weights = std::move(acc.weights);
    b.bias = acc.bias.empty() ? std::vector<int64_t>(b.rows, 0) : std::move(acc.bias);
    if (layers[first].kind == LayerKind::AvgPool) b.shift += std::countr_zero(layers[first].kernel * layers[first].kernel);

    for (size_t i = first + 1; i <= last; ++i) {
        const LayerSpec& l = layers[i];
        if (l.kind == LayerKind::AvgPool) b.shift += std::countr_zero(l.kernel * l.kernel);
        LayerSpec next = lowered(l);
        const size_t rows = next.out.size();
        b.weights = sparse_left_mul(next.weights, rows, b.rows, b.weights, b.cols);
        auto bias = sparse_left_mul(next.weights, rows, b.rows, b.bias, 1);
        if (!next.bias.empty())
            for (size_t r = 0; r < rows; ++r) bias[r] += next.bias[r];
        b.bias = std::move(bias);
        b.rows = rows;
    }
    return b;
}

}  // namespace seco::nn
