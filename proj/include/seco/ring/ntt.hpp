#pragma once

#include <cstdint>
#include <vector>

#include "seco/ring/modarith.hpp"

namespace seco::ring {

// Negacyclic NTT over Z_q[X]/(X^n+1). Forward output is in bit-reversed order:
// slot k holds a(psi^(2*bitrev(k)+1)).
class NttTables {
public:
    NttTables() = default;
    NttTables(size_t n, const Modulus& mod);

    size_t n() const { return n_; }
    const Modulus& modulus() const { return mod_; }
    uint64_t psi() const { return psi_; }

    void forward(uint64_t* a) const;
    void inverse(uint64_t* a) const;

    // Odd exponent e with forward(a)[k] = a(psi^e).
    uint32_t eval_exponent(size_t k) const { return eval_exp_[k]; }
    // Index k with eval_exponent(k) == e, for odd e < 2n.
    uint32_t index_of_exponent(uint32_t e) const { return exp_index_[e >> 1]; }

private:
    size_t n_ = 0;
    int log_n_ = 0;
    Modulus mod_;
    uint64_t psi_ = 0;
    std::vector<uint64_t> psi_rev_, psi_rev_shoup_;
    std::vector<uint64_t> ipsi_rev_, ipsi_rev_shoup_;
    uint64_t n_inv_ = 0, n_inv_shoup_ = 0;
    std::vector<uint32_t> eval_exp_, exp_index_;
};

uint32_t bit_reverse(uint32_t x, int bits);

namespace reference {
// O(n^2) evaluation of a at psi^(2j+1) for j = 0..n-1 (natural order).
std::vector<uint64_t> negacyclic_dft(const std::vector<uint64_t>& a, uint64_t psi, const Modulus& mod);
}  // namespace reference

}  // namespace seco::ring
