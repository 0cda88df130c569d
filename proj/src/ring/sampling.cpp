#include <bit>
#include <cmath>
#include <mutex>

#include "seco/common/error.hpp"
#include "seco/ring/ring.hpp"

namespace seco::ring {

namespace {

// Cumulative table for |x| of a discrete Gaussian cut at 6 sigma, scaled to 2^64.
struct GaussianTable {
    double sigma = 0;
    int bound = 0;
    std::vector<uint64_t> cdf;  // cdf[k] = P(|x| <= k) * 2^64, saturated at the end

    explicit GaussianTable(double s) : sigma(s), bound(static_cast<int>(std::floor(6 * s))) {
        std::vector<long double> w(bound + 1);
        long double total = 0;
        for (int k = 0; k <= bound; ++k) {
            long double rho = std::exp(-(long double)k * k / (2.0L * s * s));
            w[k] = k == 0 ? rho : 2 * rho;
            total += w[k];
        }
        long double acc = 0;
        for (int k = 0; k <= bound; ++k) {
            acc += w[k] / total;
            long double scaled = acc * 18446744073709551616.0L;
            cdf.push_back(k == bound || scaled >= 18446744073709551615.0L ? UINT64_MAX
                                                                            : static_cast<uint64_t>(scaled));
        }
    }
};

const GaussianTable& table_for(double sigma) {
    static std::mutex mu;
    static std::vector<std::unique_ptr<GaussianTable>> tables;
    std::lock_guard<std::mutex> lock(mu);
    for (auto& t : tables)
        if (t->sigma == sigma) return *t;
    tables.push_back(std::make_unique<GaussianTable>(sigma));
    return *tables.back();
}

int64_t draw_from(const GaussianTable& tab, Prng& rng) {
    // Low bit is the sign, the rest indexes the table at 63-bit resolution.
    uint64_t r = rng.next_u64();
    uint64_t u = r & ~uint64_t(1);
    // Branch-free count over the head of the table; the tail is rarely reached.
    const uint64_t* cdf = tab.cdf.data();
    int64_t k = 0;
    if (tab.bound >= 8) {
        for (int i = 0; i < 8; ++i) k += u >= cdf[i];
        if (k == 8)
            while (k < tab.bound && u >= cdf[k]) ++k;
    } else {
        while (k < tab.bound && u >= cdf[k]) ++k;
    }
    return (r & 1) ? -k : k;
}

}  // namespace

int64_t gaussian_draw(double sigma, Prng& rng) { return draw_from(table_for(sigma), rng); }

std::vector<int64_t> ternary_draws(size_t n, Prng& rng) {
    std::vector<int64_t> out(n);
    uint8_t buf[256];
    size_t have = 0, pos = 0;
    for (size_t i = 0; i < n;) {
        if (pos == have) {
            rng.fill(buf, sizeof(buf));
            have = sizeof(buf);
            pos = 0;
        }
        uint8_t b = buf[pos++];
        if (b >= 255) continue;  // 255 = 3 * 85
        out[i++] = int64_t(b % 3) - 1;
    }
    return out;
}

RingElement sample_uniform(ContextPtr ctx, Prng& rng, bool ntt_form) {
    // Uniform residues per limb are uniform over Z_q by CRT; NTT is a bijection.
    RingElement r(ctx, ntt_form);
    for (size_t i = 0; i < r.num_moduli(); ++i) {
        uint64_t q = ctx->modulus(i).value();
        uint64_t mask = (uint64_t(1) << std::bit_width(q)) - 1;
        uint64_t* d = r.limb(i);
        for (size_t j = 0; j < r.n();) {
            uint64_t v = rng.next_u64() & mask;
            if (v < q) d[j++] = v;
        }
    }
    return r;
}

RingElement sample_ternary(ContextPtr ctx, Prng& rng) {
    return RingElement::from_signed(ctx, ternary_draws(ctx->n(), rng));
}

RingElement sample_gaussian(ContextPtr ctx, Prng& rng) {
    const GaussianTable& tab = table_for(ctx->params().sigma);
    std::vector<int64_t> c(ctx->n());
    for (auto& v : c) v = draw_from(tab, rng);
    return RingElement::from_signed(ctx, c);
}

}  // namespace seco::ring
