#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "seco/common/prng.hpp"
#include "seco/ring/modarith.hpp"
#include "seco/ring/ntt.hpp"

namespace seco::ring {

struct RingParams {
    uint8_t id = 0;  // serialised with every ring element
    std::string name;
    size_t n = 0;
    std::vector<uint64_t> q_primes;  // RNS basis, product is q
    uint64_t t = 0;
    double sigma = 3.2;
    unsigned gadget_bits = 30;  // key-switching digit width inside each RNS limb

    static RingParams desk();
    static RingParams paper();
    // Small rings for tests (same primes as desk).
    static RingParams small(size_t n, size_t num_primes = 2);

    void validate() const;
};

// Immutable per-parameter-set tables shared by every element.
class RingContext {
public:
    explicit RingContext(const RingParams& params);

    const RingParams& params() const { return params_; }
    size_t n() const { return params_.n; }
    size_t num_moduli() const { return moduli_.size(); }
    const Modulus& modulus(size_t i) const { return moduli_[i]; }
    const NttTables& ntt(size_t i) const { return ntt_[i]; }

    const Modulus& t() const { return t_; }
    bool has_batching() const { return t_ntt_ != nullptr; }
    const NttTables& t_ntt() const { return *t_ntt_; }

    u128 q() const { return q_; }
    u128 delta() const { return delta_; }  // floor(q / t)
    uint64_t delta_mod(size_t i) const { return delta_mod_[i]; }

    // Exact CRT reconstruction of one coefficient into [0, q).
    u128 crt(const uint64_t* residues, size_t stride) const;

    // round(t * x / q) mod t for x in [0, q).
    uint64_t scale_round_to_t(u128 x) const;
    // Same value computed from RNS residues without wide arithmetic (at most two limbs).
    uint64_t scale_round_residues(const uint64_t* residues, size_t stride) const;

    unsigned digits_per_limb(size_t i) const { return digits_per_limb_[i]; }
    unsigned total_digits() const { return total_digits_; }

    // ceil(log2 t), the bit width of a plaintext residue.
    unsigned plain_bits() const;

private:
    RingParams params_;
    std::vector<Modulus> moduli_;
    std::vector<NttTables> ntt_;
    Modulus t_;
    std::unique_ptr<NttTables> t_ntt_;
    u128 q_ = 0, delta_ = 0;
    std::vector<uint64_t> delta_mod_;
    uint64_t garner_ = 0;  // q0^{-1} mod q1
    std::vector<unsigned> digits_per_limb_;
    unsigned total_digits_ = 0;
};

using ContextPtr = std::shared_ptr<const RingContext>;
ContextPtr make_context(const RingParams& params);

// Element of R_q in RNS form: limb i holds the residues mod q_i, n words each.
class RingElement {
public:
    RingElement() = default;
    RingElement(ContextPtr ctx, bool ntt_form = false);

    const ContextPtr& context() const { return ctx_; }
    size_t n() const { return ctx_->n(); }
    size_t num_moduli() const { return ctx_->num_moduli(); }
    bool is_ntt() const { return ntt_; }
    bool empty() const { return !ctx_; }

    uint64_t* limb(size_t i) { return data_.data() + i * n(); }
    const uint64_t* limb(size_t i) const { return data_.data() + i * n(); }
    std::vector<uint64_t>& data() { return data_; }
    const std::vector<uint64_t>& data() const { return data_; }

    void to_ntt();
    void from_ntt();
    RingElement ntt_copy() const;
    RingElement coeff_copy() const;

    // Small signed coefficients (|v| < min q_i / 2) in coefficient form.
    static RingElement from_signed(ContextPtr ctx, const std::vector<int64_t>& coeffs);
    // Centered value of coefficient j, valid only when |value| < q_0 / 2.
    int64_t small_coeff(size_t j) const;
    // Infinity norm of the centered representative (coefficient form, exact CRT).
    u128 inf_norm() const;

    bool operator==(const RingElement& o) const { return ntt_ == o.ntt_ && data_ == o.data_; }

private:
    ContextPtr ctx_;
    bool ntt_ = false;
    std::vector<uint64_t> data_;
};

void check_compatible(const RingElement& a, const RingElement& b);

RingElement poly_add(const RingElement& a, const RingElement& b);
RingElement poly_sub(const RingElement& a, const RingElement& b);
RingElement poly_neg(const RingElement& a);
// NTT product; inputs may be in either form, result is in NTT form iff both inputs are.
RingElement poly_mul(const RingElement& a, const RingElement& b);
RingElement poly_mul_scalar(const RingElement& a, uint64_t scalar);

void add_inplace(RingElement& a, const RingElement& b);
void sub_inplace(RingElement& a, const RingElement& b);
// a += b * c, all in NTT form.
void mul_add_inplace(RingElement& a, const RingElement& b, const RingElement& c);

// X -> X^g on a coefficient-form or NTT-form element (g odd).
RingElement apply_galois(const RingElement& a, uint32_t g);

RingElement sample_uniform(ContextPtr ctx, Prng& rng, bool ntt_form = true);
RingElement sample_ternary(ContextPtr ctx, Prng& rng);
RingElement sample_gaussian(ContextPtr ctx, Prng& rng);
// Raw signed draws backing the samplers above.
int64_t gaussian_draw(double sigma, Prng& rng);
std::vector<int64_t> ternary_draws(size_t n, Prng& rng);

namespace reference {
// Schoolbook negacyclic product, limb by limb.
RingElement negacyclic_mul(const RingElement& a, const RingElement& b);
}  // namespace reference

}  // namespace seco::ring
