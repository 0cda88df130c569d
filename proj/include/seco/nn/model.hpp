#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "seco/bfv/linop.hpp"
#include "seco/common/prng.hpp"

namespace seco::nn {

enum class LayerKind { FullyConnected, Conv, AvgPool, ReLU };

const char* layer_kind_name(LayerKind k);

// Activation shape. Flattened channel-major: index = (c * h + y) * w + x.
struct Shape {
    uint32_t h = 1, w = 1, c = 1;
    size_t size() const { return size_t(h) * w * c; }
    bool operator==(const Shape&) const = default;
};

struct LayerSpec {
    LayerKind kind = LayerKind::FullyConnected;
    Shape in, out;
    uint32_t kernel = 0, stride = 1;  // Conv, AvgPool
    // FullyConnected: out x in, row-major. Conv: [out_c][in_c][k][k]. Fixed-point at scale s.
    std::vector<int64_t> weights;
    // Optional, one per output (Conv: per output channel), at the scale of the layer output (2s).
    std::vector<int64_t> bias;

    bool linear() const { return kind != LayerKind::ReLU; }
};

// Consecutive linear layers fused into one matrix, followed by a ReLU unless it is
// the last block. The protocol runs one HE linear step and one GC per block.
struct LinearBlock {
    size_t rows = 0, cols = 0;
    std::vector<int64_t> weights;  // rows x cols
    std::vector<int64_t> bias;     // rows
    uint32_t shift = 0;            // truncation applied before the ReLU
    bool relu = false;
    size_t first_layer = 0, last_layer = 0;  // inclusive range in Model::layers

    // Weights and bias reduced to residues mod p.
    bfv::ModMatrix matrix(uint64_t p) const;
    std::vector<uint64_t> bias_residues(uint64_t p) const;
};

struct Model {
    std::string name;
    uint32_t scale = 6;  // fixed-point fraction bits
    std::vector<LayerSpec> layers;
    std::vector<LinearBlock> blocks;  // derived by finalize()

    size_t input_size() const { return layers.front().in.size(); }
    size_t output_size() const { return layers.back().out.size(); }
    size_t num_blocks() const { return blocks.size(); }

    // Checks the dimension chain and weight sizes, then builds the blocks.
    // Throws ConfigError on any violation.
    void finalize();
};

// Values are round(x * 2^scale) as residues mod p; residues >= ceil(p/2) are negative.
struct FixedPoint {
    uint32_t scale;
    uint64_t p;

    uint64_t encode(double x) const;
    int64_t centered(uint64_t v) const;
    double decode(uint64_t v, uint32_t frac_bits) const;
    double decode(uint64_t v) const { return decode(v, scale); }
};

// Dense matrix (rows = output size, cols = input size) equal to the convolution.
LayerSpec im2col_lower(const LayerSpec& conv);
// Average pooling as a sum-pool matrix; the 1/window^2 is left to the truncation shift.
LayerSpec avgpool_lower(const LayerSpec& pool);

// JSON with base64 little-endian int64 weight blobs.
std::string model_to_json(const Model& m);
Model model_from_json(const std::string& text);
Model load_model(const std::string& path);
void save_model(const Model& m, const std::string& path);

// Gateway blocks 0..l-1 in the clear for A; remote blocks l..L-1 as fresh additive
// shares for B and C: F = F2 + F3 mod p, bias likewise.
struct RemoteShares {
    bfv::ModMatrix f2, f3;
    std::vector<uint64_t> b2, b3;
};

struct ModelSplit {
    std::shared_ptr<const Model> model;
    size_t l = 0;
    uint64_t p = 0;
    std::vector<bfv::ModMatrix> gateway;
    std::vector<std::vector<uint64_t>> gateway_bias;
    std::vector<RemoteShares> remote;  // remote[i] is block l + i
};

ModelSplit split_model(std::shared_ptr<const Model> model, size_t l, uint64_t p, Prng& rng);
// Loads, validates and splits in one step.
ModelSplit load_split(const std::string& path, size_t l, uint64_t p, Prng& rng);

// ReLU of a residue truncated by `shift`, matching the garbled circuit.
inline uint64_t relu_truncate(uint64_t v, uint64_t p, uint32_t shift) { return v >= (p + 1) / 2 ? 0 : v >> shift; }

// Fixed-point forward pass over residues mod p: each block computes W x + b, then
// (except the last) truncates and applies the ReLU. Returns the final block's
// output residues (logits at scale s + shift of the last block).
std::vector<uint64_t> plaintext_infer(const Model& m, uint64_t p, std::span<const uint64_t> x);
// Same pass with the split's gateway matrices and recombined remote shares.
std::vector<uint64_t> plaintext_infer(const ModelSplit& s, std::span<const uint64_t> x);
// Per-block inputs x_1..x_L and the final output, for intermediate checks.
std::vector<std::vector<uint64_t>> plaintext_trace(const Model& m, uint64_t p, std::span<const uint64_t> x);

// Deterministic toy models: "minionn", "lenet", "mlp10". Weights are small random
// fixed-point values.
Model make_model(const std::string& kind, uint64_t seed, uint32_t scale = 6);
std::vector<std::string> model_kinds();

// Random input in [-1, 1) at the model's scale.
std::vector<uint64_t> random_input(const Model& m, uint64_t p, Prng& rng);

}  // namespace seco::nn
