#pragma once

#include "seco/bfv/bfv.hpp"
#include "seco/common/bytes.hpp"

namespace seco::bfv {

// Ring element: u32 body length, then {u8 params id, u8 flags (bit 0 = NTT form),
// u8 limb count, u32 n, limb-major u64 coefficients}, all little-endian.
void write_element(ByteWriter& w, const RingElement& a);
RingElement read_element(ByteReader& r, const ContextPtr& ctx);

void write_ciphertext(ByteWriter& w, const Ciphertext& ct);
Ciphertext read_ciphertext(ByteReader& r, const ContextPtr& ctx);
void write_ciphertexts(ByteWriter& w, std::span<const Ciphertext> cts);
std::vector<Ciphertext> read_ciphertexts(ByteReader& r, const ContextPtr& ctx);

void write_public_key(ByteWriter& w, const PublicKey& pk);
PublicKey read_public_key(ByteReader& r, const ContextPtr& ctx);
void write_galois_keys(ByteWriter& w, const GaloisKeys& gk);
GaloisKeys read_galois_keys(ByteReader& r, const ContextPtr& ctx);
void write_plaintext(ByteWriter& w, const Plaintext& pt);
Plaintext read_plaintext(ByteReader& r, const ContextPtr& ctx);

// Serialized size of one ciphertext, for metering estimates.
size_t ciphertext_bytes(const ContextPtr& ctx);

}  // namespace seco::bfv
