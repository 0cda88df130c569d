#include "seco/bfv/bfv.hpp"
#include "seco/common/error.hpp"

namespace seco::bfv {

BatchEncoder::BatchEncoder(ContextPtr ctx) : ctx_(std::move(ctx)) {
    if (!ctx_->has_batching()) throw ConfigError("plaintext modulus does not support batching");
    const size_t n = ctx_->n(), rows = n / 2;
    const uint64_t two_n = 2 * n;
    slot_to_index_.resize(n);
    uint64_t e = 1;
    for (size_t i = 0; i < rows; ++i) {
        slot_to_index_[i] = ctx_->t_ntt().index_of_exponent(static_cast<uint32_t>(e));
        slot_to_index_[rows + i] = ctx_->t_ntt().index_of_exponent(static_cast<uint32_t>(two_n - e));
        e = (e * 3) % two_n;
    }
}

Plaintext BatchEncoder::encode(std::span<const uint64_t> slots) const {
    const size_t n = ctx_->n();
    if (slots.size() > n) throw ConfigError("too many slots");
    const uint64_t t = ctx_->params().t;
    std::vector<uint64_t> evals(n, 0);
    for (size_t i = 0; i < slots.size(); ++i) {
        if (slots[i] >= t) throw ConfigError("slot value not reduced mod t");
        evals[slot_to_index_[i]] = slots[i];
    }
    ctx_->t_ntt().inverse(evals.data());
    return Plaintext{std::move(evals)};
}

std::vector<uint64_t> BatchEncoder::decode(const Plaintext& pt) const {
    const size_t n = ctx_->n();
    if (pt.coeffs.size() != n) throw ConfigError("plaintext size mismatch");
    std::vector<uint64_t> evals = pt.coeffs;
    ctx_->t_ntt().forward(evals.data());
    std::vector<uint64_t> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = evals[slot_to_index_[i]];
    return out;
}

uint32_t galois_element_for_step(size_t n, long steps) {
    const long rows = static_cast<long>(n / 2);
    long k = ((steps % rows) + rows) % rows;
    const uint64_t two_n = 2 * n;
    uint64_t g = 1;
    for (long i = 0; i < k; ++i) g = (g * 3) % two_n;
    return static_cast<uint32_t>(g);
}

}  // namespace seco::bfv
