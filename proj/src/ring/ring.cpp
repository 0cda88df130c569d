#include "seco/ring/ring.hpp"

#include <bit>
#include <boost/multiprecision/cpp_int.hpp>

#include "seco/common/error.hpp"

namespace seco::ring {

namespace {
// 60-bit NTT primes. The second prime of each profile is chosen so that q = 1 mod t:
// then delta * t = q - 1 and plaintext products add only a tiny rounding term.
constexpr uint64_t kPrime0 = 1152921504606748673ull;      // 1 mod 2^15
constexpr uint64_t kDeskPrime1 = 1152921500621443073ull;  // 1 mod 2^12
constexpr uint64_t kPaperPrime1 = 910309631168249857ull;  // 1 mod 2^14
}  // namespace

RingParams RingParams::desk() {
    RingParams p;
    p.id = 1;
    p.name = "desk";
    p.n = 2048;
    p.q_primes = {kPrime0, kDeskPrime1};
    p.t = 786433;
    return p;
}

RingParams RingParams::paper() {
    RingParams p;
    p.id = 2;
    p.name = "paper";
    p.n = 8192;
    p.q_primes = {kPrime0, kPaperPrime1};
    p.t = 2061584302081ull;
    // Rotated inputs are multiplied by full-range diagonals, so key-switch noise must stay near 2^20.
    p.gadget_bits = 10;
    return p;
}

RingParams RingParams::small(size_t n, size_t num_primes) {
    RingParams p = desk();
    p.id = static_cast<uint8_t>(0x80 | std::countr_zero(n));
    p.name = "small";
    p.n = n;
    p.q_primes.resize(num_primes);
    return p;
}

void RingParams::validate() const {
    if (n < 2 || !std::has_single_bit(n)) throw ConfigError("n must be a power of two");
    if (q_primes.empty() || q_primes.size() > 2) throw ConfigError("q must have one or two RNS primes");
    for (uint64_t q : q_primes) {
        if (!is_prime(q)) throw ConfigError("q prime is not prime");
        if ((q - 1) % (2 * n) != 0) throw ConfigError("q prime is not 1 mod 2n");
    }
    if (q_primes.size() == 2 && q_primes[0] == q_primes[1]) throw ConfigError("duplicate RNS prime");
    if (t < 2 || t >= q_primes[0]) throw ConfigError("t must satisfy 2 <= t < q");
    if (!(sigma > 0)) throw ConfigError("sigma must be positive");
    if (gadget_bits == 0 || gadget_bits > 62) throw ConfigError("bad gadget width");
}

RingContext::RingContext(const RingParams& params) : params_(params) {
    params_.validate();
    for (uint64_t q : params_.q_primes) {
        moduli_.emplace_back(q);
        ntt_.emplace_back(params_.n, moduli_.back());
    }
    t_ = Modulus(params_.t);
    if (is_prime(params_.t) && (params_.t - 1) % (2 * params_.n) == 0)
        t_ntt_ = std::make_unique<NttTables>(params_.n, t_);

    q_ = 1;
    for (auto& m : moduli_) q_ *= m.value();
    delta_ = q_ / params_.t;
    for (auto& m : moduli_) delta_mod_.push_back(static_cast<uint64_t>(delta_ % m.value()));
    if (moduli_.size() == 2) garner_ = moduli_[1].inv(moduli_[0].value() % moduli_[1].value());

    for (auto& m : moduli_) {
        unsigned d = (m.bits() + params_.gadget_bits - 1) / params_.gadget_bits;
        digits_per_limb_.push_back(d);
        total_digits_ += d;
    }
}

u128 RingContext::crt(const uint64_t* r, size_t stride) const {
    if (moduli_.size() == 1) return r[0];
    // Garner: x = r0 + q0 * ((r1 - r0) * q0^{-1} mod q1)
    const Modulus& m1 = moduli_[1];
    uint64_t diff = m1.sub(r[stride], m1.reduce(r[0]));
    uint64_t k = m1.mul(diff, garner_);
    return u128(r[0]) + u128(moduli_[0].value()) * k;
}

uint64_t RingContext::scale_round_residues(const uint64_t* r, size_t stride) const {
    const uint64_t t = params_.t;
    const uint64_t q0 = moduli_[0].value();
    if (moduli_.size() == 1) {
        u128 tb = u128(t) * r[0];
        uint64_t quo = static_cast<uint64_t>(tb / q0), rem = static_cast<uint64_t>(tb % q0);
        return (quo + (2 * u128(rem) >= q0 ? 1 : 0)) % t;
    }
    // x = b + q0 * a, so t*x/q = t*a/q1 + t*b/(q0*q1); split each term into quotient and remainder.
    const uint64_t q1 = moduli_[1].value();
    const Modulus& m1 = moduli_[1];
    uint64_t b = r[0];
    uint64_t a = m1.mul(m1.sub(r[stride], m1.reduce(b)), garner_);
    u128 ta = u128(t) * a, tb = u128(t) * b;
    uint64_t quo1 = static_cast<uint64_t>(ta / q1), rem1 = static_cast<uint64_t>(ta % q1);
    uint64_t quo2 = static_cast<uint64_t>(tb / q0), rem2 = static_cast<uint64_t>(tb % q0);
    uint64_t sum = rem1 + quo2, carry = 0;
    if (sum >= q1) {
        sum -= q1;
        carry = 1;
    }
    uint64_t up = 2 * (u128(sum) * q0 + rem2) >= u128(q0) * q1 ? 1 : 0;
    return (quo1 % t + carry + up) % t;
}

uint64_t RingContext::scale_round_to_t(u128 x) const {
    using boost::multiprecision::uint256_t;
    uint256_t num = uint256_t(static_cast<uint64_t>(x >> 64)) << 64;
    num += static_cast<uint64_t>(x);
    uint256_t q = uint256_t(static_cast<uint64_t>(q_ >> 64)) << 64;
    q += static_cast<uint64_t>(q_);
    num *= params_.t;
    num += q / 2;
    uint256_t res = num / q;
    return static_cast<uint64_t>(res % params_.t);
}

unsigned RingContext::plain_bits() const { return std::bit_width(params_.t - 1); }

ContextPtr make_context(const RingParams& params) { return std::make_shared<const RingContext>(params); }

RingElement::RingElement(ContextPtr ctx, bool ntt_form)
    : ctx_(std::move(ctx)), ntt_(ntt_form), data_(ctx_->n() * ctx_->num_moduli(), 0) {}

void RingElement::to_ntt() {
    if (ntt_) return;
    for (size_t i = 0; i < num_moduli(); ++i) ctx_->ntt(i).forward(limb(i));
    ntt_ = true;
}

void RingElement::from_ntt() {
    if (!ntt_) return;
    for (size_t i = 0; i < num_moduli(); ++i) ctx_->ntt(i).inverse(limb(i));
    ntt_ = false;
}

RingElement RingElement::ntt_copy() const {
    RingElement r = *this;
    r.to_ntt();
    return r;
}

RingElement RingElement::coeff_copy() const {
    RingElement r = *this;
    r.from_ntt();
    return r;
}

RingElement RingElement::from_signed(ContextPtr ctx, const std::vector<int64_t>& coeffs) {
    if (coeffs.size() != ctx->n()) throw ConfigError("coefficient count mismatch");
    RingElement r(ctx, false);
    for (size_t i = 0; i < r.num_moduli(); ++i) {
        const Modulus& m = ctx->modulus(i);
        uint64_t* d = r.limb(i);
        for (size_t j = 0; j < coeffs.size(); ++j) d[j] = m.from_signed(coeffs[j]);
    }
    return r;
}

int64_t RingElement::small_coeff(size_t j) const {
    if (ntt_) throw ConfigError("small_coeff needs coefficient form");
    return ctx_->modulus(0).to_signed(limb(0)[j]);
}

u128 RingElement::inf_norm() const {
    RingElement c = coeff_copy();
    u128 q = ctx_->q(), best = 0;
    for (size_t j = 0; j < n(); ++j) {
        u128 x = ctx_->crt(c.limb(0) + j, n());
        u128 mag = x > q / 2 ? q - x : x;
        if (mag > best) best = mag;
    }
    return best;
}

void check_compatible(const RingElement& a, const RingElement& b) {
    if (a.empty() || b.empty()) throw ConfigError("empty ring element");
    if (a.context() != b.context() && a.context()->params().id != b.context()->params().id)
        throw ConfigError("ring elements use different parameters");
}

namespace {
void require_same_form(const RingElement& a, const RingElement& b) {
    check_compatible(a, b);
    if (a.is_ntt() != b.is_ntt()) throw ConfigError("ring elements in different domains");
}
}  // namespace

void add_inplace(RingElement& a, const RingElement& b) {
    require_same_form(a, b);
    for (size_t i = 0; i < a.num_moduli(); ++i) {
        const Modulus& m = a.context()->modulus(i);
        uint64_t* x = a.limb(i);
        const uint64_t* y = b.limb(i);
        for (size_t j = 0; j < a.n(); ++j) x[j] = m.add(x[j], y[j]);
    }
}

void sub_inplace(RingElement& a, const RingElement& b) {
    require_same_form(a, b);
    for (size_t i = 0; i < a.num_moduli(); ++i) {
        const Modulus& m = a.context()->modulus(i);
        uint64_t* x = a.limb(i);
        const uint64_t* y = b.limb(i);
        for (size_t j = 0; j < a.n(); ++j) x[j] = m.sub(x[j], y[j]);
    }
}

void mul_add_inplace(RingElement& a, const RingElement& b, const RingElement& c) {
    require_same_form(b, c);
    require_same_form(a, b);
    if (!a.is_ntt()) throw ConfigError("mul_add_inplace needs NTT form");
    for (size_t i = 0; i < a.num_moduli(); ++i) {
        const Modulus& m = a.context()->modulus(i);
        uint64_t* x = a.limb(i);
        const uint64_t* y = b.limb(i);
        const uint64_t* z = c.limb(i);
        for (size_t j = 0; j < a.n(); ++j) x[j] = m.add(x[j], m.mul(y[j], z[j]));
    }
}

RingElement poly_add(const RingElement& a, const RingElement& b) {
    RingElement r = a;
    add_inplace(r, b);
    return r;
}

RingElement poly_sub(const RingElement& a, const RingElement& b) {
    RingElement r = a;
    sub_inplace(r, b);
    return r;
}

RingElement poly_neg(const RingElement& a) {
    RingElement r = a;
    for (size_t i = 0; i < r.num_moduli(); ++i) {
        const Modulus& m = r.context()->modulus(i);
        uint64_t* x = r.limb(i);
        for (size_t j = 0; j < r.n(); ++j) x[j] = m.neg(x[j]);
    }
    return r;
}

RingElement poly_mul(const RingElement& a, const RingElement& b) {
    check_compatible(a, b);
    bool keep_ntt = a.is_ntt() && b.is_ntt();
    RingElement x = a.ntt_copy();
    const RingElement* y = &b;
    RingElement tmp;
    if (!b.is_ntt()) {
        tmp = b.ntt_copy();
        y = &tmp;
    }
    for (size_t i = 0; i < x.num_moduli(); ++i) {
        const Modulus& m = x.context()->modulus(i);
        uint64_t* p = x.limb(i);
        const uint64_t* q = y->limb(i);
        for (size_t j = 0; j < x.n(); ++j) p[j] = m.mul(p[j], q[j]);
    }
    if (!keep_ntt) x.from_ntt();
    return x;
}

RingElement poly_mul_scalar(const RingElement& a, uint64_t scalar) {
    RingElement r = a;
    for (size_t i = 0; i < r.num_moduli(); ++i) {
        const Modulus& m = r.context()->modulus(i);
        uint64_t s = m.reduce(scalar);
        uint64_t* x = r.limb(i);
        for (size_t j = 0; j < r.n(); ++j) x[j] = m.mul(x[j], s);
    }
    return r;
}

RingElement apply_galois(const RingElement& a, uint32_t g) {
    const size_t n = a.n();
    const uint32_t two_n = static_cast<uint32_t>(2 * n);
    g %= two_n;
    if ((g & 1) == 0) throw ConfigError("galois element must be odd");
    RingElement r(a.context(), a.is_ntt());
    for (size_t i = 0; i < a.num_moduli(); ++i) {
        const uint64_t* src = a.limb(i);
        uint64_t* dst = r.limb(i);
        if (a.is_ntt()) {
            const NttTables& tab = a.context()->ntt(i);
            for (size_t k = 0; k < n; ++k) {
                uint32_t e = static_cast<uint32_t>((uint64_t(tab.eval_exponent(k)) * g) % two_n);
                dst[k] = src[tab.index_of_exponent(e)];
            }
        } else {
            const Modulus& m = a.context()->modulus(i);
            for (size_t j = 0; j < n; ++j) {
                uint64_t pos = (uint64_t(j) * g) % two_n;
                if (pos < n)
                    dst[pos] = src[j];
                else
                    dst[pos - n] = m.neg(src[j]);
            }
        }
    }
    return r;
}

namespace reference {

RingElement negacyclic_mul(const RingElement& a0, const RingElement& b0) {
    check_compatible(a0, b0);
    RingElement a = a0.coeff_copy(), b = b0.coeff_copy();
    RingElement r(a.context(), false);
    const size_t n = a.n();
    for (size_t l = 0; l < a.num_moduli(); ++l) {
        const Modulus& m = a.context()->modulus(l);
        const uint64_t* x = a.limb(l);
        const uint64_t* y = b.limb(l);
        uint64_t* z = r.limb(l);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) {
                uint64_t p = m.mul(x[i], y[j]);
                size_t k = i + j;
                if (k < n)
                    z[k] = m.add(z[k], p);
                else
                    z[k - n] = m.sub(z[k - n], p);
            }
    }
    return r;
}

}  // namespace reference

}  // namespace seco::ring
