#include "seco/mphe/mphe.hpp"

#include <algorithm>

#include "seco/bfv/serialize.hpp"
#include "seco/common/error.hpp"
#include "seco/common/msg_kind.hpp"

namespace seco::mphe {

using transport::Party;

RingElement common_p1(ContextPtr ctx, const Prng::Key& seed) {
    Prng rng = Prng(seed).derive("common-p1");
    return ring::sample_uniform(ctx, rng, true);
}

KeyPair mphe_keygen(ContextPtr ctx, const RingElement& p1, Prng& rng) { return bfv::keygen_with_p1(ctx, p1, rng); }

CommonPublicKey dkeygen(std::span<const PublicKey> pks) {
    if (pks.empty()) throw ConfigError("dkeygen needs at least one public key");
    CommonPublicKey cpk{pks[0].p0, pks[0].p1};
    for (size_t i = 1; i < pks.size(); ++i) {
        if (!(pks[i].p1 == cpk.p1)) throw ConfigError("public keys were generated with different p1");
        ring::add_inplace(cpk.p0_sum, pks[i].p0);
    }
    return cpk;
}

PartialDecryption reconstruct(const Ciphertext& ct, const SecretKey& sk, uint8_t party, Prng& rng) {
    RingElement e = ring::sample_gaussian(sk.s.context(), rng);
    e.to_ntt();
    PartialDecryption out;
    out.pd = ring::poly_mul(sk.s, ct.c1);
    ring::add_inplace(out.pd, e);
    out.party = party;
    return out;
}

Plaintext mphe_dec(const Ciphertext& ct, std::span<const PartialDecryption> pds, std::span<const uint8_t> parties) {
    std::vector<uint8_t> seen;
    for (const auto& pd : pds) {
        if (std::find(parties.begin(), parties.end(), pd.party) == parties.end())
            throw ProtocolError("partial decryption from unexpected party " + std::to_string(pd.party));
        if (std::find(seen.begin(), seen.end(), pd.party) != seen.end())
            throw ProtocolError("duplicate partial decryption from party " + std::to_string(pd.party));
        seen.push_back(pd.party);
    }
    for (uint8_t p : parties)
        if (std::find(seen.begin(), seen.end(), p) == seen.end())
            throw ProtocolError("missing partial decryption from party " + std::to_string(p));

    RingElement phase = ct.c0;
    for (const auto& pd : pds) ring::add_inplace(phase, pd.pd);
    phase.from_ntt();
    return bfv::scale_and_round(phase);
}

void write_partial(ByteWriter& w, const PartialDecryption& pd) {
    bfv::write_element(w, pd.pd);
    w.u8(pd.party);
}

PartialDecryption read_partial(ByteReader& r, const ContextPtr& ctx) {
    PartialDecryption pd;
    pd.pd = bfv::read_element(r, ctx);
    if (!pd.pd.is_ntt()) throw SerializationError("partial decryption must be in NTT form");
    pd.party = r.u8();
    return pd;
}

namespace {

std::vector<PartialDecryption> partials(std::span<const Ciphertext> cts, const SecretKey& sk, uint8_t party,
                                        Prng& rng) {
    Prng::Key k;
    rng.fill(k.data(), k.size());
    const Prng base(k);
    std::vector<PartialDecryption> out(cts.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (size_t i = 0; i < cts.size(); ++i) {
        Prng r = base.derive("partial", i);
        out[i] = reconstruct(cts[i], sk, party, r);
    }
    return out;
}

}  // namespace

std::vector<Plaintext> disdec_lead(transport::Endpoint& ep, std::span<const Ciphertext> cts, const SecretKey& sk_a,
                                   Prng& rng) {
    if (ep.self() != Party::A) throw ConfigError("disdec is led by server A");
    const ContextPtr& ctx = sk_a.s.context();
    ByteWriter w;
    bfv::write_ciphertexts(w, cts);
    ep.send(Party::B, kind(MsgKind::DisdecCiphertext), w.bytes());
    ep.send(Party::C, kind(MsgKind::DisdecCiphertext), w.bytes());

    std::vector<std::vector<PartialDecryption>> pds(cts.size());
    auto own = partials(cts, sk_a, static_cast<uint8_t>(Party::A), rng);
    for (size_t i = 0; i < cts.size(); ++i) pds[i].push_back(std::move(own[i]));
    for (Party p : {Party::B, Party::C}) {
        auto msg = ep.recv(p, kind(MsgKind::DisdecPartial));
        ByteReader r(msg);
        if (r.u32() != cts.size()) throw ProtocolError("partial decryption count mismatch");
        for (size_t i = 0; i < cts.size(); ++i) {
            auto pd = read_partial(r, ctx);
            if (pd.party != static_cast<uint8_t>(p)) throw ProtocolError("partial decryption labelled with wrong party");
            pds[i].push_back(std::move(pd));
        }
        r.expect_done();
    }

    const uint8_t parties[] = {static_cast<uint8_t>(Party::A), static_cast<uint8_t>(Party::B),
                               static_cast<uint8_t>(Party::C)};
    std::vector<Plaintext> out(cts.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (size_t i = 0; i < cts.size(); ++i) out[i] = mphe_dec(cts[i], pds[i], parties);
    return out;
}

void disdec_follow(transport::Endpoint& ep, const SecretKey& sk, Prng& rng) {
    if (ep.self() != Party::B && ep.self() != Party::C) throw ConfigError("disdec followers are servers B and C");
    auto msg = ep.recv(Party::A, kind(MsgKind::DisdecCiphertext));
    ByteReader r(msg);
    auto cts = bfv::read_ciphertexts(r, sk.s.context());
    r.expect_done();
    auto pds = partials(cts, sk, static_cast<uint8_t>(ep.self()), rng);
    ByteWriter w;
    w.u32(static_cast<uint32_t>(pds.size()));
    for (const auto& pd : pds) write_partial(w, pd);
    ep.send(Party::A, kind(MsgKind::DisdecPartial), w.bytes());
}

}  // namespace seco::mphe
