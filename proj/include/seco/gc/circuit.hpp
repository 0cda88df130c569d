#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "seco/transport/metrics.hpp"

namespace seco::gc {

using transport::Party;

enum class GateType : uint8_t { Xor = 0, And = 1, Not = 2 };

// Gate i drives wire num_inputs + i. Not ignores b.
struct Gate {
    GateType type;
    uint32_t a, b;
};

// A named little-endian word of input wires supplied by one party.
struct InputGroup {
    Party owner;
    std::string name;
    uint32_t first_wire;
    uint32_t width;
};

struct GateCounts {
    size_t and_gates = 0, xor_gates = 0, not_gates = 0;
    bool operator==(const GateCounts&) const = default;
};

// Boolean circuit in topological order. Input wires come first, grouped, then one
// wire per gate.
struct BoolCircuit {
    uint32_t num_inputs = 0;
    std::vector<InputGroup> inputs;
    std::vector<Gate> gates;
    std::vector<uint32_t> outputs;  // little-endian output word
    uint32_t bitwidth = 0;          // word size the circuit was built for

    uint32_t num_wires() const { return num_inputs + static_cast<uint32_t>(gates.size()); }
    GateCounts counts() const;
    // SHA-256 of the canonical encoding; garbled material is bound to it.
    std::array<uint8_t, 32> hash() const;
    const InputGroup& group(const std::string& name) const;
    size_t group_index(const std::string& name) const;

    // Throws ConfigError on forward references or overlapping groups.
    void validate() const;
};

// Plaintext evaluation, one byte per bit.
std::vector<uint8_t> eval_plain(const BoolCircuit& c, std::span<const uint8_t> input_bits);

// Input bits from one value per group (in group order), and the output word from output bits.
std::vector<uint8_t> input_bits(const BoolCircuit& c, std::span<const uint64_t> group_values);
uint64_t output_word(std::span<const uint8_t> output_bits);
uint64_t eval_words(const BoolCircuit& c, std::span<const uint64_t> group_values);

// Gateway ReLU between the user and server A:
//   user: "Fr-s" = F r - s, "r_next" = r_{i+1}
//   A:    "Fx-Fr+s" = F (x - r) + s, "d_next" = d_{i+1}
// Output: ReLU((sum of shares mod p) >> shift) - r_next - d_next mod p, where residues
// >= ceil(p/2) count as negative.
BoolCircuit build_relu_circuit_2pc(uint32_t bitwidth, uint64_t p, uint32_t shift);

// Remote ReLU among the servers:
//   A: "Fr-s" = (F2+F3) r - s2 - s3, "r_next" = r^1_{i+1}
//   B: "F2x-F2r+s2", "r2_next"
//   C: "F3x-F3r+s3", "r3_next"
// Output: ReLU((sum mod p) >> shift) minus all three masks mod p.
BoolCircuit build_relu_circuit_3pc(uint32_t bitwidth, uint64_t p, uint32_t shift);

// bits-wide ripple adder with a (bits + 1)-wide output; x from A, y from the user.
BoolCircuit build_adder_circuit(uint32_t bits);

// Word-level construction with constant folding: gates with a constant operand are
// never emitted.
class CircuitBuilder {
public:
    // A wire id, or one of the two constants.
    struct Bit {
        int64_t w;
        bool is_const() const { return w < 0; }
        bool value() const { return w == kOne; }
    };
    using Word = std::vector<Bit>;
    static constexpr int64_t kZero = -1, kOne = -2;
    static Bit constant(bool v) { return Bit{v ? kOne : kZero}; }

    // Inputs must all be declared before the first gate.
    Word input(Party owner, const std::string& name, uint32_t width);

    Bit XOR(Bit a, Bit b);
    Bit AND(Bit a, Bit b);
    Bit NOT(Bit a);
    Bit mux(Bit sel, Bit if1, Bit if0);

    Word constant_word(uint64_t v, uint32_t width);
    // width(a)-bit sum plus carry out (a and b same width).
    std::pair<Word, Bit> add(const Word& a, const Word& b, Bit carry_in);
    // a - b over width(a) bits, and whether a >= b.
    std::pair<Word, Bit> sub(const Word& a, const Word& b);
    // (a + b) mod p and (a - b) mod p for residues below p.
    Word add_mod(const Word& a, const Word& b, uint64_t p);
    Word sub_mod(const Word& a, const Word& b, uint64_t p);
    // a >= k for a constant k.
    Bit geq_const(const Word& a, uint64_t k);

    BoolCircuit finish(const Word& out, uint32_t bitwidth);

private:
    Bit emit(GateType t, Bit a, Bit b);
    uint32_t wire(Bit b) const { return static_cast<uint32_t>(b.w); }

    BoolCircuit c_;
    bool gates_started_ = false;
};

}  // namespace seco::gc
