#include "seco/gc/circuit.hpp"

#include <openssl/evp.h>

#include <bit>

#include "seco/common/bytes.hpp"
#include "seco/common/error.hpp"

namespace seco::gc {

GateCounts BoolCircuit::counts() const {
    GateCounts n;
    for (const auto& g : gates) {
        switch (g.type) {
            case GateType::And: ++n.and_gates; break;
            case GateType::Xor: ++n.xor_gates; break;
            case GateType::Not: ++n.not_gates; break;
        }
    }
    return n;
}

std::array<uint8_t, 32> BoolCircuit::hash() const {
    ByteWriter w;
    w.u32(num_inputs);
    w.u32(bitwidth);
    w.u32(static_cast<uint32_t>(inputs.size()));
    for (const auto& g : inputs) {
        w.u8(static_cast<uint8_t>(g.owner));
        w.blob(std::span(reinterpret_cast<const uint8_t*>(g.name.data()), g.name.size()));
        w.u32(g.first_wire);
        w.u32(g.width);
    }
    w.u32(static_cast<uint32_t>(gates.size()));
    for (const auto& g : gates) {
        w.u8(static_cast<uint8_t>(g.type));
        w.u32(g.a);
        w.u32(g.b);
    }
    w.u32(static_cast<uint32_t>(outputs.size()));
    for (uint32_t o : outputs) w.u32(o);

    std::array<uint8_t, 32> h{};
    unsigned len = 0;
    EVP_Digest(w.bytes().data(), w.size(), h.data(), &len, EVP_sha256(), nullptr);
    return h;
}

size_t BoolCircuit::group_index(const std::string& name) const {
    for (size_t i = 0; i < inputs.size(); ++i)
        if (inputs[i].name == name) return i;
    throw ConfigError("circuit has no input group '" + name + "'");
}

const InputGroup& BoolCircuit::group(const std::string& name) const { return inputs[group_index(name)]; }

void BoolCircuit::validate() const {
    uint32_t next = 0;
    for (const auto& g : inputs) {
        if (g.first_wire != next) throw ConfigError("input groups must tile the input wires in order");
        next += g.width;
    }
    if (next != num_inputs) throw ConfigError("input groups do not cover the input wires");
    for (size_t i = 0; i < gates.size(); ++i) {
        const uint32_t self = num_inputs + static_cast<uint32_t>(i);
        const auto& g = gates[i];
        if (g.a >= self || (g.type != GateType::Not && g.b >= self))
            throw ConfigError("gate " + std::to_string(i) + " reads a wire that is not yet driven");
    }
    for (uint32_t o : outputs)
        if (o >= num_wires()) throw ConfigError("output wire out of range");
}

std::vector<uint8_t> eval_plain(const BoolCircuit& c, std::span<const uint8_t> input_bits) {
    if (input_bits.size() != c.num_inputs) throw ConfigError("wrong number of input bits");
    std::vector<uint8_t> v(c.num_wires());
    for (size_t i = 0; i < c.num_inputs; ++i) v[i] = input_bits[i] & 1;
    for (size_t i = 0; i < c.gates.size(); ++i) {
        const auto& g = c.gates[i];
        uint8_t& out = v[c.num_inputs + i];
        switch (g.type) {
            case GateType::Xor: out = v[g.a] ^ v[g.b]; break;
            case GateType::And: out = v[g.a] & v[g.b]; break;
            case GateType::Not: out = v[g.a] ^ 1; break;
        }
    }
    std::vector<uint8_t> out(c.outputs.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = v[c.outputs[i]];
    return out;
}

std::vector<uint8_t> input_bits(const BoolCircuit& c, std::span<const uint64_t> group_values) {
    if (group_values.size() != c.inputs.size()) throw ConfigError("one value per input group expected");
    std::vector<uint8_t> bits(c.num_inputs);
    for (size_t g = 0; g < c.inputs.size(); ++g) {
        const auto& grp = c.inputs[g];
        if (grp.width < 64 && (group_values[g] >> grp.width) != 0)
            throw ConfigError("value for '" + grp.name + "' does not fit its width");
        for (uint32_t k = 0; k < grp.width; ++k) bits[grp.first_wire + k] = (group_values[g] >> k) & 1;
    }
    return bits;
}

uint64_t output_word(std::span<const uint8_t> output_bits) {
    uint64_t v = 0;
    for (size_t k = 0; k < output_bits.size() && k < 64; ++k) v |= uint64_t(output_bits[k] & 1) << k;
    return v;
}

uint64_t eval_words(const BoolCircuit& c, std::span<const uint64_t> group_values) {
    return output_word(eval_plain(c, input_bits(c, group_values)));
}

// ---- builder ----

using Bit = CircuitBuilder::Bit;
using Word = CircuitBuilder::Word;

CircuitBuilder::Word CircuitBuilder::input(Party owner, const std::string& name, uint32_t width) {
    if (gates_started_) throw ConfigError("inputs must be declared before gates");
    for (const auto& g : c_.inputs)
        if (g.name == name) throw ConfigError("duplicate input group '" + name + "'");
    c_.inputs.push_back(InputGroup{owner, name, c_.num_inputs, width});
    Word w(width);
    for (uint32_t k = 0; k < width; ++k) w[k] = Bit{c_.num_inputs + k};
    c_.num_inputs += width;
    return w;
}

Bit CircuitBuilder::emit(GateType t, Bit a, Bit b) {
    gates_started_ = true;
    c_.gates.push_back(Gate{t, wire(a), t == GateType::Not ? 0u : wire(b)});
    return Bit{c_.num_inputs + static_cast<int64_t>(c_.gates.size()) - 1};
}

Bit CircuitBuilder::XOR(Bit a, Bit b) {
    if (a.is_const() && b.is_const()) return constant(a.value() != b.value());
    if (a.is_const()) std::swap(a, b);
    if (b.is_const()) return b.value() ? NOT(a) : a;
    if (a.w == b.w) return constant(false);
    return emit(GateType::Xor, a, b);
}

Bit CircuitBuilder::AND(Bit a, Bit b) {
    if (a.is_const() && b.is_const()) return constant(a.value() && b.value());
    if (a.is_const()) std::swap(a, b);
    if (b.is_const()) return b.value() ? a : constant(false);
    if (a.w == b.w) return a;
    return emit(GateType::And, a, b);
}

Bit CircuitBuilder::NOT(Bit a) {
    if (a.is_const()) return constant(!a.value());
    return emit(GateType::Not, a, a);
}

Bit CircuitBuilder::mux(Bit sel, Bit if1, Bit if0) { return XOR(if0, AND(sel, XOR(if1, if0))); }

Word CircuitBuilder::constant_word(uint64_t v, uint32_t width) {
    Word w(width);
    for (uint32_t k = 0; k < width; ++k) w[k] = constant(k < 64 && ((v >> k) & 1));
    return w;
}

std::pair<Word, Bit> CircuitBuilder::add(const Word& a, const Word& b, Bit carry) {
    if (a.size() != b.size()) throw ConfigError("adder operands differ in width");
    Word s(a.size());
    for (size_t k = 0; k < a.size(); ++k) {
        Bit ac = XOR(a[k], carry);
        Bit bc = XOR(b[k], carry);
        s[k] = XOR(ac, b[k]);
        carry = XOR(carry, AND(ac, bc));  // majority(a, b, carry) with one AND
    }
    return {s, carry};
}

std::pair<Word, Bit> CircuitBuilder::sub(const Word& a, const Word& b) {
    Word nb(b.size());
    for (size_t k = 0; k < b.size(); ++k) nb[k] = NOT(b[k]);
    return add(a, nb, constant(true));
}

Bit CircuitBuilder::geq_const(const Word& a, uint64_t k) {
    auto [diff, no_borrow] = sub(a, constant_word(k, static_cast<uint32_t>(a.size())));
    (void)diff;
    return no_borrow;
}

Word CircuitBuilder::add_mod(const Word& a, const Word& b, uint64_t p) {
    const uint32_t w = static_cast<uint32_t>(a.size());
    auto [s, carry] = add(a, b, constant(false));
    Word wide = s;
    wide.push_back(carry);
    auto [d, ge] = sub(wide, constant_word(p, w + 1));
    Word out(w);
    for (uint32_t k = 0; k < w; ++k) out[k] = mux(ge, d[k], s[k]);
    return out;
}

Word CircuitBuilder::sub_mod(const Word& a, const Word& b, uint64_t p) {
    const uint32_t w = static_cast<uint32_t>(a.size());
    auto [d, ge] = sub(a, b);
    // Add p back when a < b; the AND with a constant bit folds away.
    Bit lt = NOT(ge);
    Word fix(w);
    Word pw = constant_word(p, w);
    for (uint32_t k = 0; k < w; ++k) fix[k] = AND(pw[k], lt);
    return add(d, fix, constant(false)).first;
}

BoolCircuit CircuitBuilder::finish(const Word& out, uint32_t bitwidth) {
    for (Bit b : out) {
        if (b.is_const()) {
            if (c_.num_inputs == 0) throw ConfigError("constant output needs at least one input wire");
            Bit zero = emit(GateType::Xor, Bit{0}, Bit{0});
            b = b.value() ? emit(GateType::Not, zero, zero) : zero;
        }
        c_.outputs.push_back(wire(b));
    }
    c_.bitwidth = bitwidth;
    c_.validate();
    BoolCircuit done = std::move(c_);
    c_ = BoolCircuit{};
    gates_started_ = false;
    return done;
}

// ---- the bundled circuits ----

namespace {

void check_modulus(uint32_t bitwidth, uint64_t p, uint32_t shift) {
    if (bitwidth == 0 || bitwidth > 62) throw ConfigError("circuit bitwidth must be in [1, 62]");
    if (p < 2 || p >= (uint64_t(1) << bitwidth)) throw ConfigError("modulus must satisfy 2 <= p < 2^bitwidth");
    if (shift >= bitwidth) throw ConfigError("truncation shift must be below the bitwidth");
}

// ReLU(v >> shift) for a residue v, with v >= ceil(p/2) negative. Negative inputs
// map to zero whatever the truncation, so only the non-negative branch is shifted.
Word relu_truncate(CircuitBuilder& b, const Word& v, uint64_t p, uint32_t shift) {
    const uint32_t w = static_cast<uint32_t>(v.size());
    Bit neg = b.geq_const(v, (p + 1) / 2);
    Bit keep = b.NOT(neg);
    Word y(w, CircuitBuilder::constant(false));
    for (uint32_t k = 0; k + shift < w; ++k) y[k] = b.AND(v[k + shift], keep);
    return y;
}

}  // namespace

BoolCircuit build_relu_circuit_2pc(uint32_t bitwidth, uint64_t p, uint32_t shift) {
    check_modulus(bitwidth, p, shift);
    CircuitBuilder b;
    auto user_share = b.input(Party::User, "Fr-s", bitwidth);
    auto r_next = b.input(Party::User, "r_next", bitwidth);
    auto a_share = b.input(Party::A, "Fx-Fr+s", bitwidth);
    auto d_next = b.input(Party::A, "d_next", bitwidth);

    auto v = b.add_mod(user_share, a_share, p);
    auto y = relu_truncate(b, v, p, shift);
    y = b.sub_mod(y, r_next, p);
    y = b.sub_mod(y, d_next, p);
    return b.finish(y, bitwidth);
}

BoolCircuit build_relu_circuit_3pc(uint32_t bitwidth, uint64_t p, uint32_t shift) {
    check_modulus(bitwidth, p, shift);
    CircuitBuilder b;
    auto a_share = b.input(Party::A, "Fr-s", bitwidth);
    auto r1 = b.input(Party::A, "r_next", bitwidth);
    auto b_share = b.input(Party::B, "F2x-F2r+s2", bitwidth);
    auto r2 = b.input(Party::B, "r2_next", bitwidth);
    auto c_share = b.input(Party::C, "F3x-F3r+s3", bitwidth);
    auto r3 = b.input(Party::C, "r3_next", bitwidth);

    auto v = b.add_mod(b.add_mod(a_share, b_share, p), c_share, p);
    auto y = relu_truncate(b, v, p, shift);
    y = b.sub_mod(y, r1, p);
    y = b.sub_mod(y, r2, p);
    y = b.sub_mod(y, r3, p);
    return b.finish(y, bitwidth);
}

BoolCircuit build_adder_circuit(uint32_t bits) {
    if (bits == 0 || bits > 62) throw ConfigError("adder width must be in [1, 62]");
    CircuitBuilder b;
    auto x = b.input(Party::A, "x", bits);
    auto y = b.input(Party::User, "y", bits);
    auto [s, carry] = b.add(x, y, CircuitBuilder::constant(false));
    s.push_back(carry);
    return b.finish(s, bits);
}

}  // namespace seco::gc
