#pragma once

#include <map>
#include <span>
#include <vector>

#include "seco/common/prng.hpp"
#include "seco/ring/ring.hpp"

namespace seco::bfv {

using ring::ContextPtr;
using ring::RingElement;

// Polynomial over R_t in coefficient form.
struct Plaintext {
    std::vector<uint64_t> coeffs;
    bool operator==(const Plaintext&) const = default;
};

// CRT slot encoding. Slots 0..n/2-1 form row 0, n/2..n-1 form row 1; rotation
// by k moves slot i+k of a row to slot i of the same row.
class BatchEncoder {
public:
    explicit BatchEncoder(ContextPtr ctx);

    size_t slot_count() const { return ctx_->n(); }
    size_t row_size() const { return ctx_->n() / 2; }

    // Shorter inputs are zero-padded. Values must be reduced mod t.
    Plaintext encode(std::span<const uint64_t> slots) const;
    std::vector<uint64_t> decode(const Plaintext& pt) const;

    const ContextPtr& context() const { return ctx_; }

private:
    ContextPtr ctx_;
    std::vector<uint32_t> slot_to_index_;
};

// Galois element that rotates rows left by `steps`.
uint32_t galois_element_for_step(size_t n, long steps);

struct SecretKey {
    RingElement s;  // NTT form, ternary coefficients
};

struct PublicKey {
    RingElement p0, p1;  // NTT form
};

// Encryptions of target * gadget_d under s, one pair (b_d, a_d) per gadget digit.
struct KeySwitchKey {
    std::vector<RingElement> b, a;
};

struct GaloisKeys {
    std::map<uint32_t, KeySwitchKey> keys;
    bool has(uint32_t g) const { return keys.count(g) != 0; }
};

struct Ciphertext {
    RingElement c0, c1;  // NTT form
    const ContextPtr& context() const { return c0.context(); }
};

struct KeyPair {
    SecretKey sk;
    PublicKey pk;
};

// Plaintext lifted to R_q (centered) in NTT form, ready for MulPlain.
struct PreparedPlain {
    RingElement poly;
    bool zero = false;
};

KeyPair keygen(ContextPtr ctx, Prng& rng);
// Key pair whose p1 is fixed by the caller.
KeyPair keygen_with_p1(ContextPtr ctx, const RingElement& p1, Prng& rng);
// Rotation keys for steps 1, 2, 4, ..., row_size/2.
GaloisKeys make_galois_keys(const SecretKey& sk, Prng& rng);
KeySwitchKey make_key_switch_key(const SecretKey& sk, const RingElement& target_ntt, Prng& rng);

Ciphertext encrypt(const PublicKey& pk, const Plaintext& pt, Prng& rng);
Ciphertext encrypt_zero(const PublicKey& pk, Prng& rng);
Plaintext decrypt(const SecretKey& sk, const Ciphertext& ct);
// c0 + c1*s in coefficient form, before scaling.
RingElement decrypt_phase(const SecretKey& sk, const Ciphertext& ct);
// Rounds a phase to the plaintext: m = [round(t/q * phase)]_t.
Plaintext scale_and_round(const RingElement& phase_coeff);
// Infinity norm of phase - delta*m, the decryption noise.
ring::u128 noise_norm(const SecretKey& sk, const Ciphertext& ct, const Plaintext& expected);

PreparedPlain prepare_plain(ContextPtr ctx, const Plaintext& pt);
// Delta * m in NTT form.
RingElement scale_plain(ContextPtr ctx, const Plaintext& pt);

Ciphertext add(const Ciphertext& a, const Ciphertext& b);
Ciphertext sub(const Ciphertext& a, const Ciphertext& b);
void add_inplace(Ciphertext& a, const Ciphertext& b);
void sub_inplace(Ciphertext& a, const Ciphertext& b);
Ciphertext add_plain(const Ciphertext& a, const Plaintext& pt);
Ciphertext sub_plain(const Ciphertext& a, const Plaintext& pt);
Ciphertext mul_plain(const Ciphertext& a, const PreparedPlain& pt);
Ciphertext mul_plain(const Ciphertext& a, const Plaintext& pt);
// acc += a * pt
void mul_plain_accumulate(Ciphertext& acc, const Ciphertext& a, const PreparedPlain& pt);
Ciphertext apply_galois(const Ciphertext& a, uint32_t g, const KeySwitchKey& key);
// Row rotation by any step, composed from the power-of-two keys.
Ciphertext rotate(const Ciphertext& a, long steps, const GaloisKeys& gk);

enum class OpKind { Add, Sub, MulPlain, Rot };

// Generic dispatcher over the supported homomorphic operations.
struct EvalInput {
    const Ciphertext* ct = nullptr;
    const Plaintext* pt = nullptr;
};
Ciphertext eval(OpKind op, std::span<const EvalInput> inputs, const GaloisKeys* gk = nullptr, long steps = 0);

}  // namespace seco::bfv
