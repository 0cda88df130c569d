#include "seco/bfv/bfv.hpp"

#include "seco/common/error.hpp"

namespace seco::bfv {

using ring::Modulus;

namespace {

RingElement lift_centered(const ContextPtr& ctx, const Plaintext& pt) {
    const size_t n = ctx->n();
    if (pt.coeffs.size() != n) throw ConfigError("plaintext size mismatch");
    const uint64_t t = ctx->params().t, half = t / 2;
    RingElement r(ctx, false);
    for (size_t i = 0; i < ctx->num_moduli(); ++i) {
        const Modulus& m = ctx->modulus(i);
        uint64_t* d = r.limb(i);
        for (size_t j = 0; j < n; ++j) {
            uint64_t c = pt.coeffs[j];
            d[j] = c > half ? m.value() - (t - c) : c;
        }
    }
    return r;
}

void check_ct(const Ciphertext& a, const Ciphertext& b) {
    ring::check_compatible(a.c0, b.c0);
}

}  // namespace

KeyPair keygen(ContextPtr ctx, Prng& rng) {
    RingElement p1 = ring::sample_uniform(ctx, rng, true);
    return keygen_with_p1(ctx, p1, rng);
}

KeyPair keygen_with_p1(ContextPtr ctx, const RingElement& p1, Prng& rng) {
    if (!p1.is_ntt()) throw ConfigError("p1 must be in NTT form");
    KeyPair kp;
    kp.sk.s = ring::sample_ternary(ctx, rng);
    kp.sk.s.to_ntt();
    RingElement e = ring::sample_gaussian(ctx, rng);
    e.to_ntt();
    // p0 = -s*p1 + e
    kp.pk.p0 = ring::poly_sub(e, ring::poly_mul(kp.sk.s, p1));
    kp.pk.p1 = p1;
    return kp;
}

KeySwitchKey make_key_switch_key(const SecretKey& sk, const RingElement& target, Prng& rng) {
    const ContextPtr& ctx = sk.s.context();
    KeySwitchKey ksk;
    const unsigned w = ctx->params().gadget_bits;
    for (size_t i = 0; i < ctx->num_moduli(); ++i) {
        const Modulus& m = ctx->modulus(i);
        for (unsigned j = 0; j < ctx->digits_per_limb(i); ++j) {
            RingElement a = ring::sample_uniform(ctx, rng, true);
            RingElement e = ring::sample_gaussian(ctx, rng);
            e.to_ntt();
            RingElement b = ring::poly_sub(e, ring::poly_mul(a, sk.s));
            // gadget value is 2^(w*j) in limb i and 0 in the others
            uint64_t g = m.pow(2, uint64_t(w) * j);
            uint64_t* bl = b.limb(i);
            const uint64_t* tl = target.limb(i);
            for (size_t k = 0; k < ctx->n(); ++k) bl[k] = m.add(bl[k], m.mul(tl[k], g));
            ksk.b.push_back(std::move(b));
            ksk.a.push_back(std::move(a));
        }
    }
    return ksk;
}

GaloisKeys make_galois_keys(const SecretKey& sk, Prng& rng) {
    GaloisKeys gk;
    const size_t n = sk.s.n();
    for (size_t step = 1; step < n / 2; step <<= 1) {
        uint32_t g = galois_element_for_step(n, static_cast<long>(step));
        gk.keys.emplace(g, make_key_switch_key(sk, ring::apply_galois(sk.s, g), rng));
    }
    return gk;
}

namespace {
// x += delta * m, coefficient form.
void add_scaled_plain(RingElement& x, const Plaintext& pt) {
    const ContextPtr& ctx = x.context();
    const size_t n = ctx->n();
    if (pt.coeffs.size() != n) throw ConfigError("plaintext size mismatch");
    for (size_t i = 0; i < ctx->num_moduli(); ++i) {
        const Modulus& m = ctx->modulus(i);
        uint64_t d = ctx->delta_mod(i), ds = ring::shoup_precompute(d, m.value());
        uint64_t* v = x.limb(i);
        for (size_t j = 0; j < n; ++j) v[j] = m.add(v[j], ring::mul_shoup(pt.coeffs[j], d, ds, m.value()));
    }
}
}  // namespace

RingElement scale_plain(ContextPtr ctx, const Plaintext& pt) {
    RingElement r(ctx, false);
    add_scaled_plain(r, pt);
    r.to_ntt();
    return r;
}

Ciphertext encrypt(const PublicKey& pk, const Plaintext& pt, Prng& rng) {
    const ContextPtr& ctx = pk.p0.context();
    RingElement u = ring::sample_ternary(ctx, rng);
    u.to_ntt();
    RingElement e0 = ring::sample_gaussian(ctx, rng);
    RingElement e1 = ring::sample_gaussian(ctx, rng);
    add_scaled_plain(e0, pt);
    e0.to_ntt();
    e1.to_ntt();
    Ciphertext ct;
    ct.c0 = ring::poly_mul(u, pk.p0);
    ring::add_inplace(ct.c0, e0);
    ct.c1 = ring::poly_mul(u, pk.p1);
    ring::add_inplace(ct.c1, e1);
    return ct;
}

Ciphertext encrypt_zero(const PublicKey& pk, Prng& rng) {
    return encrypt(pk, Plaintext{std::vector<uint64_t>(pk.p0.n(), 0)}, rng);
}

RingElement decrypt_phase(const SecretKey& sk, const Ciphertext& ct) {
    RingElement phase = ring::poly_mul(ct.c1, sk.s);
    ring::add_inplace(phase, ct.c0);
    phase.from_ntt();
    return phase;
}

Plaintext scale_and_round(const RingElement& phase) {
    if (phase.is_ntt()) throw ConfigError("phase must be in coefficient form");
    const ContextPtr& ctx = phase.context();
    const size_t n = ctx->n();
    Plaintext pt{std::vector<uint64_t>(n)};
    for (size_t j = 0; j < n; ++j) pt.coeffs[j] = ctx->scale_round_residues(phase.limb(0) + j, n);
    return pt;
}

Plaintext decrypt(const SecretKey& sk, const Ciphertext& ct) { return scale_and_round(decrypt_phase(sk, ct)); }

ring::u128 noise_norm(const SecretKey& sk, const Ciphertext& ct, const Plaintext& expected) {
    const ContextPtr& ctx = sk.s.context();
    RingElement phase = decrypt_phase(sk, ct);
    RingElement dm = scale_plain(ctx, expected);
    dm.from_ntt();
    ring::sub_inplace(phase, dm);
    return phase.inf_norm();
}

PreparedPlain prepare_plain(ContextPtr ctx, const Plaintext& pt) {
    PreparedPlain p;
    p.zero = true;
    for (uint64_t c : pt.coeffs)
        if (c != 0) {
            p.zero = false;
            break;
        }
    p.poly = lift_centered(ctx, pt);
    p.poly.to_ntt();
    return p;
}

Ciphertext add(const Ciphertext& a, const Ciphertext& b) {
    Ciphertext r = a;
    add_inplace(r, b);
    return r;
}

Ciphertext sub(const Ciphertext& a, const Ciphertext& b) {
    Ciphertext r = a;
    sub_inplace(r, b);
    return r;
}

void add_inplace(Ciphertext& a, const Ciphertext& b) {
    check_ct(a, b);
    ring::add_inplace(a.c0, b.c0);
    ring::add_inplace(a.c1, b.c1);
}

void sub_inplace(Ciphertext& a, const Ciphertext& b) {
    check_ct(a, b);
    ring::sub_inplace(a.c0, b.c0);
    ring::sub_inplace(a.c1, b.c1);
}

Ciphertext add_plain(const Ciphertext& a, const Plaintext& pt) {
    Ciphertext r = a;
    ring::add_inplace(r.c0, scale_plain(a.context(), pt));
    return r;
}

Ciphertext sub_plain(const Ciphertext& a, const Plaintext& pt) {
    Ciphertext r = a;
    ring::sub_inplace(r.c0, scale_plain(a.context(), pt));
    return r;
}

Ciphertext mul_plain(const Ciphertext& a, const PreparedPlain& pt) {
    Ciphertext r;
    r.c0 = ring::poly_mul(a.c0, pt.poly);
    r.c1 = ring::poly_mul(a.c1, pt.poly);
    return r;
}

Ciphertext mul_plain(const Ciphertext& a, const Plaintext& pt) { return mul_plain(a, prepare_plain(a.context(), pt)); }

void mul_plain_accumulate(Ciphertext& acc, const Ciphertext& a, const PreparedPlain& pt) {
    if (pt.zero) return;
    ring::mul_add_inplace(acc.c0, a.c0, pt.poly);
    ring::mul_add_inplace(acc.c1, a.c1, pt.poly);
}

Ciphertext apply_galois(const Ciphertext& a, uint32_t g, const KeySwitchKey& key) {
    const ContextPtr& ctx = a.context();
    const size_t n = ctx->n(), limbs = ctx->num_moduli();
    const unsigned w = ctx->params().gadget_bits;
    Ciphertext r;
    r.c0 = ring::apply_galois(a.c0, g);
    RingElement c1 = ring::apply_galois(a.c1, g);
    c1.from_ntt();
    r.c1 = RingElement(ctx, true);
    if (key.b.size() != ctx->total_digits()) throw ConfigError("key switching key has wrong digit count");

    size_t d = 0;
    RingElement digit(ctx, false);
    for (size_t i = 0; i < limbs; ++i) {
        const uint64_t* src = c1.limb(i);
        for (unsigned j = 0; j < ctx->digits_per_limb(i); ++j, ++d) {
            const unsigned shift = w * j;
            const uint64_t mask = w >= 64 ? ~0ull : ((uint64_t(1) << w) - 1);
            // Digit values are below 2^w < every q_l, so the same integers serve all limbs.
            for (size_t l = 0; l < limbs; ++l) {
                uint64_t* dst = digit.limb(l);
                for (size_t k = 0; k < n; ++k) dst[k] = (src[k] >> shift) & mask;
            }
            RingElement dn = digit;
            dn.to_ntt();
            ring::mul_add_inplace(r.c0, dn, key.b[d]);
            ring::mul_add_inplace(r.c1, dn, key.a[d]);
        }
    }
    return r;
}

Ciphertext rotate(const Ciphertext& a, long steps, const GaloisKeys& gk) {
    const size_t n = a.context()->n();
    const long rows = static_cast<long>(n / 2);
    long k = ((steps % rows) + rows) % rows;
    Ciphertext r = a;
    for (long bit = 1; bit < rows; bit <<= 1) {
        if (!(k & bit)) continue;
        uint32_t g = galois_element_for_step(n, bit);
        auto it = gk.keys.find(g);
        if (it == gk.keys.end()) throw ConfigError("missing galois key for rotation");
        r = apply_galois(r, g, it->second);
    }
    return r;
}

Ciphertext eval(OpKind op, std::span<const EvalInput> in, const GaloisKeys* gk, long steps) {
    auto need_ct = [&](size_t i) -> const Ciphertext& {
        if (i >= in.size() || !in[i].ct) throw ConfigError("eval: ciphertext operand expected");
        return *in[i].ct;
    };
    switch (op) {
        case OpKind::Add:
        case OpKind::Sub: {
            if (in.size() != 2) throw ConfigError("eval: Add/Sub take two operands");
            const Ciphertext& a = need_ct(0);
            if (in[1].ct) return op == OpKind::Add ? add(a, *in[1].ct) : sub(a, *in[1].ct);
            if (!in[1].pt) throw ConfigError("eval: missing operand");
            return op == OpKind::Add ? add_plain(a, *in[1].pt) : sub_plain(a, *in[1].pt);
        }
        case OpKind::MulPlain: {
            if (in.size() != 2 || !in[1].pt || in[1].ct) throw ConfigError("eval: MulPlain takes one ciphertext and one plaintext");
            return mul_plain(need_ct(0), *in[1].pt);
        }
        case OpKind::Rot: {
            if (in.size() != 1) throw ConfigError("eval: Rot takes one ciphertext");
            if (!gk) throw ConfigError("eval: Rot requires galois keys");
            return rotate(need_ct(0), steps, *gk);
        }
    }
    throw ConfigError("eval: unknown op");
}

}  // namespace seco::bfv
