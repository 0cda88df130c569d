#pragma once

#include <span>
#include <vector>

#include "seco/bfv/bfv.hpp"
#include "seco/common/bytes.hpp"
#include "seco/transport/channel.hpp"

namespace seco::mphe {

using bfv::Ciphertext;
using bfv::KeyPair;
using bfv::Plaintext;
using bfv::PublicKey;
using bfv::SecretKey;
using ring::ContextPtr;
using ring::RingElement;

// Public polynomial every party keys against, expanded from a broadcast seed.
RingElement common_p1(ContextPtr ctx, const Prng::Key& seed);

KeyPair mphe_keygen(ContextPtr ctx, const RingElement& common_p1, Prng& rng);

// Aggregate key: p0 summed over the parties, shared p1. The matching secret is the
// sum of the party secrets.
struct CommonPublicKey {
    RingElement p0_sum;
    RingElement p1;

    PublicKey as_public_key() const { return PublicKey{p0_sum, p1}; }
};

CommonPublicKey dkeygen(std::span<const PublicKey> pks);

struct PartialDecryption {
    RingElement pd;  // s_i * c1 + e_i, NTT form
    uint8_t party = 0;
};

// e_i is drawn from the key error distribution, not a wider flooding distribution.
PartialDecryption reconstruct(const Ciphertext& ct, const SecretKey& sk, uint8_t party, Prng& rng);

// Requires exactly one partial decryption from each party in `parties`.
Plaintext mphe_dec(const Ciphertext& ct, std::span<const PartialDecryption> pds, std::span<const uint8_t> parties);

void write_partial(ByteWriter& w, const PartialDecryption& pd);
PartialDecryption read_partial(ByteReader& r, const ContextPtr& ctx);

// Distributed decryption among the three servers. A ships the ciphertexts to B and
// C, each returns one message of partial decryptions, and only A learns the result.
std::vector<Plaintext> disdec_lead(transport::Endpoint& ep, std::span<const Ciphertext> cts, const SecretKey& sk_a,
                                   Prng& rng);
void disdec_follow(transport::Endpoint& ep, const SecretKey& sk, Prng& rng);

}  // namespace seco::mphe
