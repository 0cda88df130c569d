#include "seco/gc/garble.hpp"

#include <algorithm>
#include <cstring>

#include "seco/common/error.hpp"

namespace seco::gc {

namespace {

constexpr size_t kChunk = 64;  // instances garbled together
constexpr uint32_t kMagic = 0x31434753;  // "SGC1"

// Two tweaks per AND gate (label pad and tag pad), and a separate domain for output decoding.
Block row_tweak(uint64_t uid, unsigned which) { return {2 * uid + which, 0}; }
Block output_tweak(uint64_t uid) { return {uid, uint64_t(1) << 63}; }

struct AndSlots {
    std::vector<uint32_t> index;  // gate -> AND ordinal
    uint32_t count = 0;
};

AndSlots and_slots(const BoolCircuit& c) {
    AndSlots s;
    s.index.resize(c.gates.size());
    for (size_t g = 0; g < c.gates.size(); ++g)
        if (c.gates[g].type == GateType::And) s.index[g] = s.count++;
    return s;
}

void put_row(uint8_t* row, const Block& label, uint64_t tag) {
    std::memcpy(row, &label, 16);
    std::memcpy(row + 16, &tag, 8);
}

void garble_chunk(const BoolCircuit& c, const AndSlots& ands, size_t first, size_t m, const Block& delta,
                  Prng& rng, GarbledCircuit& gc, InputEncoding& enc) {
    const uint32_t ni = c.num_inputs;
    const size_t W = c.num_wires();
    std::vector<Block> L(W * m);  // zero labels, wire-major
    for (uint32_t w = 0; w < ni; ++w)
        for (size_t j = 0; j < m; ++j) {
            L[w * m + j] = Block::random(rng);
            enc.zero[(first + j) * ni + w] = L[w * m + j];
        }

    const Block d1 = gf_double(delta), d2 = gf_double(d1);
    std::vector<Block> pads(8 * m), c0(m);
    for (size_t g = 0; g < c.gates.size(); ++g) {
        const Gate& gate = c.gates[g];
        Block* out = &L[(ni + g) * m];
        const Block* a = &L[size_t(gate.a) * m];
        const Block* b = &L[size_t(gate.b) * m];
        switch (gate.type) {
            case GateType::Xor:
                for (size_t j = 0; j < m; ++j) out[j] = a[j] ^ b[j];
                break;
            case GateType::Not:
                for (size_t j = 0; j < m; ++j) out[j] = a[j] ^ delta;
                break;
            case GateType::And: {
                for (size_t j = 0; j < m; ++j) {
                    const uint64_t uid = (first + j) * ands.count + ands.index[g];
                    const Block base = gf_double(a[j]) ^ gf_double(gf_double(b[j]));
                    for (unsigned x = 0; x < 2; ++x)
                        for (unsigned y = 0; y < 2; ++y) {
                            Block k = base;
                            if (x) k ^= d1;
                            if (y) k ^= d2;
                            const size_t slot = 8 * j + 2 * (2 * x + y);
                            pads[slot] = k ^ row_tweak(uid, 0);
                            pads[slot + 1] = k ^ row_tweak(uid, 1);
                        }
                    c0[j] = Block::random(rng);
                }
                hash_blocks(pads.data(), pads.size());
                for (size_t j = 0; j < m; ++j) {
                    const uint64_t uid = (first + j) * ands.count + ands.index[g];
                    uint8_t* table = gc.tables.data() + uid * kTableBytes;
                    for (unsigned x = 0; x < 2; ++x)
                        for (unsigned y = 0; y < 2; ++y) {
                            const bool pa = a[j].permute_bit() ^ x;
                            const bool pb = b[j].permute_bit() ^ y;
                            const size_t slot = 8 * j + 2 * (2 * x + y);
                            const Block c_label = (x & y) ? c0[j] ^ delta : c0[j];
                            put_row(table + (2 * pa + pb) * kRowBytes, pads[slot] ^ c_label, pads[slot + 1].lo);
                        }
                    out[j] = c0[j];
                }
                break;
            }
        }
    }

    const size_t no = c.outputs.size();
    std::vector<Block> h(2 * no * m);
    for (size_t j = 0; j < m; ++j)
        for (size_t o = 0; o < no; ++o) {
            const Block t = output_tweak((first + j) * no + o);
            const Block z = L[size_t(c.outputs[o]) * m + j];
            h[2 * (j * no + o)] = z ^ t;
            h[2 * (j * no + o) + 1] = z ^ delta ^ t;
        }
    hash_blocks(h.data(), h.size());
    for (size_t j = 0; j < m; ++j)
        for (size_t o = 0; o < no; ++o)
            gc.decode[(first + j) * no + o] = Block{h[2 * (j * no + o)].lo, h[2 * (j * no + o) + 1].lo};
}

void evaluate_chunk(const BoolCircuit& c, const AndSlots& ands, const GarbledCircuit& gc, std::span<const Block> in,
                    size_t first, size_t m, uint8_t* bits_out) {
    const uint32_t ni = c.num_inputs;
    std::vector<Block> L(size_t(c.num_wires()) * m);
    for (uint32_t w = 0; w < ni; ++w)
        for (size_t j = 0; j < m; ++j) L[w * m + j] = in[(first + j) * ni + w];

    std::vector<Block> pads(2 * m);
    for (size_t g = 0; g < c.gates.size(); ++g) {
        const Gate& gate = c.gates[g];
        Block* out = &L[(ni + g) * m];
        const Block* a = &L[size_t(gate.a) * m];
        const Block* b = &L[size_t(gate.b) * m];
        switch (gate.type) {
            case GateType::Xor:
                for (size_t j = 0; j < m; ++j) out[j] = a[j] ^ b[j];
                break;
            case GateType::Not:
                for (size_t j = 0; j < m; ++j) out[j] = a[j];
                break;
            case GateType::And: {
                for (size_t j = 0; j < m; ++j) {
                    const uint64_t uid = (first + j) * ands.count + ands.index[g];
                    const Block k = gf_double(a[j]) ^ gf_double(gf_double(b[j]));
                    pads[2 * j] = k ^ row_tweak(uid, 0);
                    pads[2 * j + 1] = k ^ row_tweak(uid, 1);
                }
                hash_blocks(pads.data(), pads.size());
                for (size_t j = 0; j < m; ++j) {
                    const uint64_t uid = (first + j) * ands.count + ands.index[g];
                    const uint8_t* row = gc.tables.data() + uid * kTableBytes +
                                         (2 * a[j].permute_bit() + b[j].permute_bit()) * kRowBytes;
                    Block label;
                    uint64_t tag;
                    std::memcpy(&label, row, 16);
                    std::memcpy(&tag, row + 16, 8);
                    if ((tag ^ pads[2 * j + 1].lo) != 0)
                        throw AuthError("garbled row failed its tag check (instance " + std::to_string(first + j) +
                                        ", gate " + std::to_string(g) + ")");
                    out[j] = label ^ pads[2 * j];
                }
                break;
            }
        }
    }

    const size_t no = c.outputs.size();
    std::vector<Block> h(no * m);
    for (size_t j = 0; j < m; ++j)
        for (size_t o = 0; o < no; ++o)
            h[j * no + o] = L[size_t(c.outputs[o]) * m + j] ^ output_tweak((first + j) * no + o);
    hash_blocks(h.data(), h.size());
    for (size_t j = 0; j < m; ++j)
        for (size_t o = 0; o < no; ++o) {
            const Block& d = gc.decode[(first + j) * no + o];
            const uint64_t v = h[j * no + o].lo;
            uint8_t bit;
            if (v == d.lo)
                bit = 0;
            else if (v == d.hi)
                bit = 1;
            else
                throw AuthError("output label does not decode (instance " + std::to_string(first + j) + ")");
            bits_out[(first + j) * no + o] = bit;
        }
}

// Runs fn(first, count) over instance chunks in parallel; the first exception wins.
template <typename Fn>
void for_chunks(size_t instances, Fn&& fn) {
    const size_t chunks = (instances + kChunk - 1) / kChunk;
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 1)
    for (size_t k = 0; k < chunks; ++k) {
        try {
            const size_t first = k * kChunk;
            fn(k, first, std::min(kChunk, instances - first));
        } catch (...) {
#pragma omp critical(seco_gc_error)
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
}

}  // namespace

std::vector<Block> InputEncoding::encode(const InputGroup& group, std::span<const uint64_t> values) const {
    if (values.size() != instances) throw ConfigError("one value per instance expected");
    std::vector<Block> out(instances * size_t(group.width));
    for (size_t i = 0; i < instances; ++i)
        for (uint32_t k = 0; k < group.width; ++k)
            out[i * group.width + k] = label(i, group.first_wire + k, (values[i] >> k) & 1);
    return out;
}

std::vector<std::array<Block, 2>> InputEncoding::label_pairs(const InputGroup& group) const {
    std::vector<std::array<Block, 2>> out(instances * size_t(group.width));
    for (size_t i = 0; i < instances; ++i)
        for (uint32_t k = 0; k < group.width; ++k) {
            const Block z = zero[i * num_inputs + group.first_wire + k];
            out[i * group.width + k] = {z, z ^ delta};
        }
    return out;
}

Garbling garble(const BoolCircuit& c, size_t instances, Prng& rng) {
    const AndSlots ands = and_slots(c);
    Garbling g;
    g.gc.circuit_hash = c.hash();
    g.gc.instances = static_cast<uint32_t>(instances);
    g.gc.and_gates = ands.count;
    g.gc.num_outputs = static_cast<uint32_t>(c.outputs.size());
    g.gc.tables.resize(instances * ands.count * kTableBytes);
    g.gc.decode.resize(instances * c.outputs.size());

    g.encoding.delta = Block::random(rng);
    g.encoding.delta.lo |= 1;
    g.encoding.instances = static_cast<uint32_t>(instances);
    g.encoding.num_inputs = c.num_inputs;
    g.encoding.zero.resize(instances * size_t(c.num_inputs));

    Prng::Key key;
    rng.fill(key.data(), key.size());
    const Prng base(key);
    for_chunks(instances, [&](size_t k, size_t first, size_t m) {
        Prng r = base.derive("garble-chunk", k);
        garble_chunk(c, ands, first, m, g.encoding.delta, r, g.gc, g.encoding);
    });
    return g;
}

InputLabels::InputLabels(const BoolCircuit& c, size_t instances)
    : num_inputs_(c.num_inputs), instances_(instances), labels_(instances * c.num_inputs), filled_(c.num_inputs) {}

void InputLabels::set(const InputGroup& group, std::span<const Block> labels) {
    if (labels.size() != instances_ * group.width) throw ConfigError("label count does not match group '" + group.name + "'");
    for (size_t i = 0; i < instances_; ++i)
        for (uint32_t k = 0; k < group.width; ++k)
            labels_[i * num_inputs_ + group.first_wire + k] = labels[i * group.width + k];
    std::fill_n(filled_.begin() + group.first_wire, group.width, 1);
}

bool InputLabels::complete() const { return std::all_of(filled_.begin(), filled_.end(), [](uint8_t f) { return f; }); }

std::vector<uint8_t> evaluate(const BoolCircuit& c, const GarbledCircuit& gc, const InputLabels& labels) {
    if (gc.circuit_hash != c.hash()) throw ProtocolError("garbled circuit was built for a different circuit");
    if (!labels.complete()) throw ProtocolError("missing input labels");
    const AndSlots ands = and_slots(c);
    const size_t n = gc.instances;
    if (labels.all().size() != n * c.num_inputs || gc.and_gates != ands.count ||
        gc.tables.size() != n * ands.count * kTableBytes || gc.decode.size() != n * c.outputs.size())
        throw ProtocolError("garbled circuit dimensions do not match");
    std::vector<uint8_t> bits(n * c.outputs.size());
    for_chunks(n, [&](size_t, size_t first, size_t m) {
        evaluate_chunk(c, ands, gc, labels.all(), first, m, bits.data());
    });
    return bits;
}

std::vector<uint64_t> evaluate_words(const BoolCircuit& c, const GarbledCircuit& gc, const InputLabels& labels) {
    auto bits = evaluate(c, gc, labels);
    const size_t no = c.outputs.size();
    std::vector<uint64_t> out(gc.instances);
    for (size_t i = 0; i < out.size(); ++i) out[i] = output_word(std::span(bits).subspan(i * no, no));
    return out;
}

void write_garbled(ByteWriter& w, const BoolCircuit& c, const GarbledCircuit& gc) {
    const GateCounts n = c.counts();
    w.u32(kMagic);
    w.raw(gc.circuit_hash.data(), gc.circuit_hash.size());
    w.u32(c.bitwidth);
    w.u32(static_cast<uint32_t>(n.and_gates));
    w.u32(static_cast<uint32_t>(n.xor_gates));
    w.u32(static_cast<uint32_t>(n.not_gates));
    w.u32(gc.instances);
    w.u32(gc.num_outputs);
    w.raw(gc.tables);
    w.raw(gc.decode.data(), gc.decode.size() * sizeof(Block));
}

GarbledCircuit read_garbled(ByteReader& r, const BoolCircuit& c) {
    if (r.u32() != kMagic) throw SerializationError("not a garbled circuit");
    GarbledCircuit gc;
    auto h = r.raw(32);
    std::copy(h.begin(), h.end(), gc.circuit_hash.begin());
    if (gc.circuit_hash != c.hash()) throw SerializationError("garbled circuit hash does not match the local circuit");
    const GateCounts n = c.counts();
    const uint32_t bitwidth = r.u32();
    const uint32_t and_gates = r.u32(), xor_gates = r.u32(), not_gates = r.u32();
    if (bitwidth != c.bitwidth || and_gates != n.and_gates || xor_gates != n.xor_gates || not_gates != n.not_gates)
        throw SerializationError("garbled circuit header does not match the local circuit");
    gc.and_gates = and_gates;
    gc.instances = r.u32();
    gc.num_outputs = r.u32();
    if (gc.num_outputs != c.outputs.size()) throw SerializationError("garbled circuit output count mismatch");
    const size_t table_bytes = size_t(gc.instances) * and_gates * kTableBytes;
    const size_t decode_bytes = size_t(gc.instances) * gc.num_outputs * sizeof(Block);
    if (r.remaining() < table_bytes + decode_bytes) throw SerializationError("garbled circuit truncated");
    auto t = r.raw(table_bytes);
    gc.tables.assign(t.begin(), t.end());
    gc.decode.resize(size_t(gc.instances) * gc.num_outputs);
    auto d = r.raw(decode_bytes);
    std::memcpy(gc.decode.data(), d.data(), decode_bytes);
    return gc;
}

void write_labels(ByteWriter& w, std::span<const Block> labels) {
    w.raw(labels.data(), labels.size() * sizeof(Block));
}

std::vector<Block> read_labels(ByteReader& r, size_t count) {
    if (r.remaining() / sizeof(Block) < count) throw SerializationError("label block truncated");
    std::vector<Block> out(count);
    auto s = r.raw(count * sizeof(Block));
    std::memcpy(out.data(), s.data(), s.size());
    return out;
}

}  // namespace seco::gc
