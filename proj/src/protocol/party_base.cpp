#include "internal.hpp"
#include "seco/bfv/serialize.hpp"
#include "seco/common/bytes.hpp"
#include "seco/common/error.hpp"

namespace seco::protocol {

const char* mode_name(Mode m) {
    switch (m) {
        case Mode::Seco: return "seco";
        case Mode::Delphi3: return "delphi3";
        case Mode::Delphi2: return "delphi2";
    }
    return "?";
}

Mode mode_from_name(const std::string& s) {
    for (Mode m : {Mode::Seco, Mode::Delphi3, Mode::Delphi2})
        if (s == mode_name(m)) return m;
    throw ConfigError("unknown mode '" + s + "' (expected seco, delphi3 or delphi2)");
}

const std::vector<uint64_t>& Record::get(const std::string& name, size_t block) const {
    auto it = values.find({name, block});
    if (it == values.end()) throw ProtocolError("record has no '" + name + "' for block " + std::to_string(block));
    return it->second;
}

std::vector<uint64_t> draw_mask(Prng& rng, uint64_t p, size_t n) {
    std::vector<uint64_t> r(n);
    for (auto& v : r) v = rng.uniform(p);
    return r;
}

std::vector<uint64_t> apply_mask(std::span<const uint64_t> x, std::span<const uint64_t> r, uint64_t p) {
    if (x.size() != r.size()) throw ConfigError("mask length mismatch");
    std::vector<uint64_t> out(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = (x[i] + p - r[i]) % p;
    return out;
}

namespace detail {

PartyBase::PartyBase(transport::Endpoint& ep, const Options& opt)
    : ep_(ep),
      opt_(opt),
      rng_(Prng(opt.seed).derive("party", static_cast<uint64_t>(ep.self()))),
      ctx_(ring::make_context(opt.params)),
      enc_(ctx_),
      p_(opt.params.t),
      bitwidth_(ctx_->plain_bits()) {}

Record PartyBase::take_record() {
    Record r = std::move(rec_);
    rec_ = Record{};
    return r;
}

void PartyBase::at(Phase ph, size_t block) {
    if (ep_.phase() != ph) ep_.set_phase(ph);
    ep_.set_layer(static_cast<uint16_t>(block));
}

void PartyBase::record(const std::string& name, size_t block, std::vector<uint64_t> v) {
    if (opt_.record) rec_.put(name, block, std::move(v));
}

std::vector<uint64_t> PartyBase::mask(size_t n) {
    if (opt_.test.zero_randomness) return std::vector<uint64_t>(n, 0);
    return draw_mask(rng_, p_, n);
}

std::vector<std::vector<uint64_t>> PartyBase::slot_masks(size_t groups) {
    std::vector<std::vector<uint64_t>> m;
    for (size_t g = 0; g < groups; ++g) m.push_back(mask(ctx_->n()));
    return m;
}

bool PartyBase::corrupt(size_t block) const {
#ifdef SECO_INSECURE_TEST_MODES
    return opt_.test.corrupt_block == block;
#else
    (void)block;
    return false;
#endif
}

void PartyBase::perturb(std::vector<uint64_t>& v) const {
    for (auto& e : v) e = (e + p_ / 3) % p_;
}

void PartyBase::send_values(Party to, MsgKind k, std::span<const uint64_t> v) {
    const unsigned w = packed_width(p_);
    ByteWriter bw(4 + v.size() * w);
    bw.u32(static_cast<uint32_t>(v.size()));
    bw.packed(v, w);
    ep_.send(to, kind(k), bw.bytes());
}

std::vector<uint64_t> PartyBase::recv_values(Party from, MsgKind k, size_t expect) {
    auto msg = ep_.recv(from, kind(k));
    ByteReader r(msg);
    const size_t n = r.u32();
    if (n != expect)
        throw ProtocolError("expected " + std::to_string(expect) + " values from " + transport::party_name(from) +
                            ", got " + std::to_string(n));
    auto v = r.packed(n, packed_width(p_));
    r.expect_done();
    for (uint64_t x : v)
        if (x >= p_) throw SerializationError("value not reduced mod p");
    return v;
}

void PartyBase::send_cts(Party to, MsgKind k, std::span<const bfv::Ciphertext> cts) {
    ByteWriter w;
    bfv::write_ciphertexts(w, cts);
    ep_.send(to, kind(k), w.bytes());
}

std::vector<bfv::Ciphertext> PartyBase::recv_cts(Party from, MsgKind k, size_t expect) {
    auto msg = ep_.recv(from, kind(k));
    ByteReader r(msg);
    auto cts = bfv::read_ciphertexts(r, ctx_);
    r.expect_done();
    if (cts.size() != expect)
        throw ProtocolError("expected " + std::to_string(expect) + " ciphertexts from " + transport::party_name(from) +
                            ", got " + std::to_string(cts.size()));
    return cts;
}

void PartyBase::send_labels(Party to, MsgKind k, std::span<const gc::Block> labels) {
    ByteWriter w(labels.size() * 16);
    gc::write_labels(w, labels);
    ep_.send(to, kind(k), w.bytes());
}

std::vector<gc::Block> PartyBase::recv_labels(Party from, MsgKind k, size_t expect) {
    auto msg = ep_.recv(from, kind(k));
    if (msg.size() != expect * 16)
        throw ProtocolError("expected " + std::to_string(expect) + " labels from " + transport::party_name(from));
    ByteReader r(msg);
    return gc::read_labels(r, expect);
}

std::vector<bfv::Ciphertext> PartyBase::encrypt_packed(const bfv::LinearOperator& op, std::span<const uint64_t> r,
                                                       const bfv::PublicKey& pk) {
    const size_t count = op.packed_inputs();
    std::vector<bfv::Ciphertext> cts(count);
    const Prng base = rng_.derive("encrypt", nonce_++);
#pragma omp parallel for schedule(dynamic, 4)
    for (size_t k = 0; k < count; ++k) {
        Prng sub = base.derive("ct", k);
        cts[k] = bfv::encrypt(pk, enc_.encode(op.packed_input_slots(r, k)), sub);
    }
    return cts;
}

std::vector<bfv::Ciphertext> PartyBase::encrypt_blocks(const bfv::LinearOperator& op, std::span<const uint64_t> r,
                                                       const bfv::PublicKey& pk) {
    std::vector<bfv::Ciphertext> cts;
    for (size_t b = 0; b < op.layout().in_blocks; ++b) cts.push_back(bfv::encrypt(pk, enc_.encode(op.input_slots(r, b)), rng_));
    return cts;
}

std::vector<bfv::Ciphertext> PartyBase::encrypt_vector(std::span<const uint64_t> y, const bfv::PublicKey& pk) {
    const size_t n = ctx_->n();
    std::vector<bfv::Ciphertext> cts;
    for (size_t at = 0; at < y.size(); at += n) {
        auto chunk = y.subspan(at, std::min(n, y.size() - at));
        cts.push_back(bfv::encrypt(pk, enc_.encode(chunk), rng_));
    }
    return cts;
}

std::vector<std::vector<uint64_t>> PartyBase::decrypt_slots(const bfv::SecretKey& sk,
                                                            std::span<const bfv::Ciphertext> cts) {
    std::vector<std::vector<uint64_t>> out;
    for (const auto& ct : cts) out.push_back(enc_.decode(bfv::decrypt(sk, ct)));
    return out;
}

std::unique_ptr<gc::OtSender> PartyBase::ot_sender(Party receiver) {
#ifdef SECO_INSECURE_TEST_MODES
    if (opt_.test.dealer_ot) return gc::make_dealer_sender(opt_.dealer, ep_.self(), receiver);
#endif
    return gc::make_iknp_sender(ep_, receiver, rng_);
}

std::unique_ptr<gc::OtReceiver> PartyBase::ot_receiver(Party sender) {
#ifdef SECO_INSECURE_TEST_MODES
    if (opt_.test.dealer_ot) return gc::make_dealer_receiver(opt_.dealer, ep_.self(), sender);
#endif
    return gc::make_iknp_receiver(ep_, sender, rng_);
}

const gc::BoolCircuit& PartyBase::relu_2pc(uint32_t shift) {
    auto it = relu2_.find(shift);
    if (it == relu2_.end()) it = relu2_.emplace(shift, gc::build_relu_circuit_2pc(bitwidth_, p_, shift)).first;
    return it->second;
}

const gc::BoolCircuit& PartyBase::relu_3pc(uint32_t shift) {
    auto it = relu3_.find(shift);
    if (it == relu3_.end()) it = relu3_.emplace(shift, gc::build_relu_circuit_3pc(bitwidth_, p_, shift)).first;
    return it->second;
}

std::vector<uint64_t> PartyBase::add(std::span<const uint64_t> a, std::span<const uint64_t> b) const {
    if (a.size() != b.size()) throw ProtocolError("share length mismatch");
    std::vector<uint64_t> out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = (a[i] + b[i]) % p_;
    return out;
}

std::vector<uint64_t> PartyBase::sub(std::span<const uint64_t> a, std::span<const uint64_t> b) const {
    return apply_mask(a, b, p_);
}

std::vector<uint64_t> PartyBase::affine(const bfv::ModMatrix& f, std::span<const uint64_t> x,
                                        std::span<const uint64_t> s, std::span<const uint64_t> b) const {
    auto y = bfv::matvec(f, x, p_);
    for (size_t i = 0; i < y.size(); ++i) y[i] = ((y[i] + s[i]) % p_ + b[i]) % p_;
    return y;
}

std::vector<uint8_t> word_bits(std::span<const uint64_t> values, uint32_t width) {
    std::vector<uint8_t> bits(values.size() * width);
    for (size_t i = 0; i < values.size(); ++i)
        for (uint32_t k = 0; k < width; ++k) bits[i * width + k] = (values[i] >> k) & 1;
    return bits;
}

}  // namespace detail
}  // namespace seco::protocol
