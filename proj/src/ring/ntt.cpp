#include "seco/ring/ntt.hpp"

#include <bit>

#include "seco/common/error.hpp"

namespace seco::ring {

uint32_t bit_reverse(uint32_t x, int bits) {
    uint32_t r = 0;
    for (int i = 0; i < bits; ++i) {
        r = (r << 1) | (x & 1);
        x >>= 1;
    }
    return r;
}

NttTables::NttTables(size_t n, const Modulus& mod) : n_(n), mod_(mod) {
    if (n < 2 || !std::has_single_bit(n)) throw ConfigError("ntt size must be a power of two");
    log_n_ = std::countr_zero(n);
    uint64_t q = mod.value();
    psi_ = find_primitive_root(2 * n, mod);
    uint64_t ipsi = mod.inv(psi_);

    psi_rev_.resize(n);
    ipsi_rev_.resize(n);
    psi_rev_shoup_.resize(n);
    ipsi_rev_shoup_.resize(n);
    uint64_t p = 1, ip = 1;
    for (size_t i = 0; i < n; ++i) {
        uint32_t r = bit_reverse(static_cast<uint32_t>(i), log_n_);
        psi_rev_[r] = p;
        ipsi_rev_[r] = ip;
        p = mod.mul(p, psi_);
        ip = mod.mul(ip, ipsi);
    }
    for (size_t i = 0; i < n; ++i) {
        psi_rev_shoup_[i] = shoup_precompute(psi_rev_[i], q);
        ipsi_rev_shoup_[i] = shoup_precompute(ipsi_rev_[i], q);
    }
    n_inv_ = mod.inv(n % q);
    n_inv_shoup_ = shoup_precompute(n_inv_, q);

    eval_exp_.resize(n);
    exp_index_.resize(n);
    for (size_t k = 0; k < n; ++k) {
        uint32_t e = 2 * bit_reverse(static_cast<uint32_t>(k), log_n_) + 1;
        eval_exp_[k] = e;
        exp_index_[e >> 1] = static_cast<uint32_t>(k);
    }
}

// Harvey butterflies: forward values stay in [0, 4q), inverse in [0, 2q); q < 2^62.
void NttTables::forward(uint64_t* a) const {
    const uint64_t q = mod_.value(), two_q = 2 * q;
    size_t t = n_;
    for (size_t m = 1; m < n_; m <<= 1) {
        t >>= 1;
        for (size_t i = 0; i < m; ++i) {
            const uint64_t w = psi_rev_[m + i], ws = psi_rev_shoup_[m + i];
            uint64_t* x = a + 2 * i * t;
            uint64_t* y = x + t;
            for (size_t j = 0; j < t; ++j) {
                uint64_t u = x[j];
                u -= (u >= two_q) ? two_q : 0;
                uint64_t v = y[j] * w - mulhi64(y[j], ws) * q;
                x[j] = u + v;
                y[j] = u + two_q - v;
            }
        }
    }
    for (size_t j = 0; j < n_; ++j) {
        uint64_t v = a[j];
        v -= (v >= two_q) ? two_q : 0;
        a[j] = v >= q ? v - q : v;
    }
}

void NttTables::inverse(uint64_t* a) const {
    const uint64_t q = mod_.value(), two_q = 2 * q;
    size_t t = 1;
    for (size_t m = n_; m > 1; m >>= 1) {
        size_t h = m >> 1;
        for (size_t i = 0; i < h; ++i) {
            const uint64_t w = ipsi_rev_[h + i], ws = ipsi_rev_shoup_[h + i];
            uint64_t* x = a + 2 * i * t;
            uint64_t* y = x + t;
            for (size_t j = 0; j < t; ++j) {
                uint64_t u = x[j], v = y[j];
                uint64_t s = u + v;
                x[j] = s >= two_q ? s - two_q : s;
                uint64_t d = u + two_q - v;
                y[j] = d * w - mulhi64(d, ws) * q;
            }
        }
        t <<= 1;
    }
    for (size_t j = 0; j < n_; ++j) a[j] = mul_shoup(a[j], n_inv_, n_inv_shoup_, q);
}

namespace reference {

std::vector<uint64_t> negacyclic_dft(const std::vector<uint64_t>& a, uint64_t psi, const Modulus& mod) {
    size_t n = a.size();
    std::vector<uint64_t> out(n);
    for (size_t j = 0; j < n; ++j) {
        uint64_t x = mod.pow(psi, 2 * j + 1), acc = 0, xp = 1;
        for (size_t i = 0; i < n; ++i) {
            acc = mod.add(acc, mod.mul(a[i], xp));
            xp = mod.mul(xp, x);
        }
        out[j] = acc;
    }
    return out;
}

}  // namespace reference

}  // namespace seco::ring
