#pragma once

#include <array>
#include <span>
#include <vector>

#include "seco/common/bytes.hpp"
#include "seco/gc/block.hpp"
#include "seco/gc/circuit.hpp"

namespace seco::gc {

// Garbled row: 16-byte output label and an 8-byte tag that decrypts to zero.
inline constexpr size_t kRowBytes = 24;
inline constexpr size_t kTableBytes = 4 * kRowBytes;

// Many independent garblings of one circuit (one per ReLU element), sharing a
// global offset. Tables are stored instance-major, four rows per AND gate, rows
// ordered by the permute bits of the two input labels. XOR and NOT gates have no rows.
struct GarbledCircuit {
    std::array<uint8_t, 32> circuit_hash{};
    uint32_t instances = 0;
    uint32_t and_gates = 0;  // per instance
    uint32_t num_outputs = 0;
    std::vector<uint8_t> tables;
    // Per instance and output wire: truncated hashes of the 0-label (lo) and 1-label (hi).
    std::vector<Block> decode;
};

// The garbler's input labels. The label for bit b is zero ^ (b ? delta : 0).
struct InputEncoding {
    Block delta;
    uint32_t instances = 0;
    uint32_t num_inputs = 0;
    std::vector<Block> zero;  // [instance][input wire]

    Block label(size_t instance, uint32_t wire, bool bit) const {
        Block z = zero[instance * num_inputs + wire];
        return bit ? z ^ delta : z;
    }
    // Labels for one value per instance on `group`, laid out [instance][bit].
    std::vector<Block> encode(const InputGroup& group, std::span<const uint64_t> values) const;
    // Both labels of every wire of `group`, laid out [instance][bit], for OT.
    std::vector<std::array<Block, 2>> label_pairs(const InputGroup& group) const;
};

struct Garbling {
    GarbledCircuit gc;
    InputEncoding encoding;
};

Garbling garble(const BoolCircuit& c, size_t instances, Prng& rng);

// Evaluator-side label matrix [instance][input wire], filled group by group.
class InputLabels {
public:
    InputLabels(const BoolCircuit& c, size_t instances);
    // `labels` is [instance][bit] for the given group.
    void set(const InputGroup& group, std::span<const Block> labels);
    bool complete() const;
    std::span<const Block> all() const { return labels_; }

private:
    uint32_t num_inputs_;
    size_t instances_;
    std::vector<Block> labels_;
    std::vector<uint8_t> filled_;  // per input wire
};

// Output bits [instance][output wire]. Throws AuthError when a row or an output
// label fails its check, i.e. on tampered tables or labels that do not belong.
std::vector<uint8_t> evaluate(const BoolCircuit& c, const GarbledCircuit& gc, const InputLabels& labels);
std::vector<uint64_t> evaluate_words(const BoolCircuit& c, const GarbledCircuit& gc, const InputLabels& labels);

// Header (circuit hash, bitwidth, gate counts, instance count) followed by the
// table blob and the output decoding blob.
void write_garbled(ByteWriter& w, const BoolCircuit& c, const GarbledCircuit& gc);
GarbledCircuit read_garbled(ByteReader& r, const BoolCircuit& c);

// Labels travel as raw 16-byte strings.
void write_labels(ByteWriter& w, std::span<const Block> labels);
std::vector<Block> read_labels(ByteReader& r, size_t count);

}  // namespace seco::gc
