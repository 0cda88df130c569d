#include "seco/bfv/serialize.hpp"

#include "seco/common/error.hpp"

namespace seco::bfv {

namespace {
constexpr uint8_t kTagCiphertext = 'C';
constexpr uint8_t kTagPublicKey = 'P';
constexpr uint8_t kTagGalois = 'G';
constexpr uint8_t kTagPlain = 'M';

void expect_tag(ByteReader& r, uint8_t tag) {
    if (r.u8() != tag) throw SerializationError("unexpected object tag");
}
}  // namespace

void write_element(ByteWriter& w, const RingElement& a) {
    if (a.empty()) throw SerializationError("cannot serialize empty ring element");
    const auto& ctx = a.context();
    const size_t coeffs = a.data().size();
    w.u32(static_cast<uint32_t>(7 + 8 * coeffs));
    w.u8(ctx->params().id);
    w.u8(a.is_ntt() ? 1 : 0);
    w.u8(static_cast<uint8_t>(ctx->num_moduli()));
    w.u32(static_cast<uint32_t>(ctx->n()));
    w.u64_values(a.data());
}

RingElement read_element(ByteReader& r, const ContextPtr& ctx) {
    uint32_t len = r.u32();
    ByteReader body(r.raw(len));
    uint8_t id = body.u8(), flags = body.u8(), limbs = body.u8();
    uint32_t n = body.u32();
    if (id != ctx->params().id) throw SerializationError("ring element has foreign parameter id");
    if (limbs != ctx->num_moduli() || n != ctx->n()) throw SerializationError("ring element shape mismatch");
    if (flags > 1) throw SerializationError("unknown domain flags");
    RingElement a(ctx, flags & 1);
    body.u64_values(a.data());
    for (size_t l = 0; l < limbs; ++l) {
        const uint64_t q = ctx->modulus(l).value();
        bool bad = false;
        for (const uint64_t* p = a.limb(l); p != a.limb(l) + n; ++p) bad |= *p >= q;
        if (bad) throw SerializationError("coefficient out of range");
    }
    body.expect_done();
    return a;
}

void write_ciphertext(ByteWriter& w, const Ciphertext& ct) {
    w.u8(kTagCiphertext);
    write_element(w, ct.c0);
    write_element(w, ct.c1);
}

Ciphertext read_ciphertext(ByteReader& r, const ContextPtr& ctx) {
    expect_tag(r, kTagCiphertext);
    Ciphertext ct;
    ct.c0 = read_element(r, ctx);
    ct.c1 = read_element(r, ctx);
    if (!ct.c0.is_ntt() || !ct.c1.is_ntt()) throw SerializationError("ciphertext must be in NTT form");
    return ct;
}

void write_ciphertexts(ByteWriter& w, std::span<const Ciphertext> cts) {
    w.u32(static_cast<uint32_t>(cts.size()));
    for (auto& c : cts) write_ciphertext(w, c);
}

std::vector<Ciphertext> read_ciphertexts(ByteReader& r, const ContextPtr& ctx) {
    uint32_t count = r.u32();
    if (count > r.remaining()) throw SerializationError("ciphertext count exceeds payload");
    std::vector<Ciphertext> out;
    out.reserve(count);
    for (uint32_t i = 0; i < count; ++i) out.push_back(read_ciphertext(r, ctx));
    return out;
}

void write_public_key(ByteWriter& w, const PublicKey& pk) {
    w.u8(kTagPublicKey);
    write_element(w, pk.p0);
    write_element(w, pk.p1);
}

PublicKey read_public_key(ByteReader& r, const ContextPtr& ctx) {
    expect_tag(r, kTagPublicKey);
    PublicKey pk;
    pk.p0 = read_element(r, ctx);
    pk.p1 = read_element(r, ctx);
    return pk;
}

void write_galois_keys(ByteWriter& w, const GaloisKeys& gk) {
    w.u8(kTagGalois);
    w.u32(static_cast<uint32_t>(gk.keys.size()));
    for (auto& [g, k] : gk.keys) {
        w.u32(g);
        w.u32(static_cast<uint32_t>(k.b.size()));
        for (size_t d = 0; d < k.b.size(); ++d) {
            write_element(w, k.b[d]);
            write_element(w, k.a[d]);
        }
    }
}

GaloisKeys read_galois_keys(ByteReader& r, const ContextPtr& ctx) {
    expect_tag(r, kTagGalois);
    GaloisKeys gk;
    uint32_t count = r.u32();
    for (uint32_t i = 0; i < count; ++i) {
        uint32_t g = r.u32(), digits = r.u32();
        if (digits != ctx->total_digits()) throw SerializationError("galois key digit count mismatch");
        KeySwitchKey k;
        for (uint32_t d = 0; d < digits; ++d) {
            k.b.push_back(read_element(r, ctx));
            k.a.push_back(read_element(r, ctx));
        }
        gk.keys.emplace(g, std::move(k));
    }
    return gk;
}

void write_plaintext(ByteWriter& w, const Plaintext& pt) {
    w.u8(kTagPlain);
    w.u64_array(pt.coeffs);
}

Plaintext read_plaintext(ByteReader& r, const ContextPtr& ctx) {
    expect_tag(r, kTagPlain);
    Plaintext pt{r.u64_array()};
    if (pt.coeffs.size() != ctx->n()) throw SerializationError("plaintext size mismatch");
    for (uint64_t c : pt.coeffs)
        if (c >= ctx->params().t) throw SerializationError("plaintext coefficient out of range");
    return pt;
}

size_t ciphertext_bytes(const ContextPtr& ctx) { return 1 + 2 * (4 + 7 + 8 * ctx->n() * ctx->num_moduli()); }

}  // namespace seco::bfv
