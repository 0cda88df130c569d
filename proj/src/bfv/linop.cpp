#include "seco/bfv/linop.hpp"

#include <bit>

#include "seco/common/error.hpp"

namespace seco::bfv {

LinOpLayout LinOpLayout::make(size_t rows, size_t cols, size_t row_size) {
    if (rows == 0 || cols == 0) throw ConfigError("empty matrix");
    LinOpLayout l;
    l.rows = rows;
    l.cols = cols;
    l.row_size = row_size;
    l.block = std::min(row_size, std::bit_ceil(cols));
    l.in_blocks = (cols + l.block - 1) / l.block;
    size_t wp = std::bit_ceil(rows);
    if (wp <= l.block) {
        l.expand = false;
        l.width = wp;
        l.rotations = wp;
        l.out_groups = 1;
        l.chunks = l.block / wp;
    } else {
        l.expand = true;
        l.width = row_size;
        l.rotations = l.block;
        l.out_groups = (rows + row_size - 1) / row_size;
        l.chunks = 1;
    }
    return l;
}

LinearOperator::LinearOperator(ContextPtr ctx, const ModMatrix& f, Mode mode, Exec exec)
    : ctx_(std::move(ctx)), f_(f), mode_(mode), exec_(exec) {
    if (f.data.size() != f.rows * f.cols) throw ConfigError("matrix storage mismatch");
    const uint64_t t = ctx_->params().t;
    for (uint64_t v : f.data)
        if (v >= t) throw ConfigError("matrix entry not reduced mod t");
    layout_ = LinOpLayout::make(f.rows, f.cols, ctx_->n() / 2);
    const size_t r = layout_.rotations;
    if (mode_ == Mode::Rotations) {
        baby_ = size_t(1) << ((std::countr_zero(r) + 1) / 2);
        giant_ = r / baby_;
    }

    BatchEncoder enc(ctx_);
    const bool packed = mode_ == Mode::PreRotated;
    const size_t total = layout_.out_groups * (packed ? packed_inputs() : layout_.in_blocks * r);
    diags_.resize(total);
    const size_t s = layout_.row_size;
    auto build = [&](size_t idx) {
        std::vector<uint64_t> d;
        if (packed) {
            d = packed_diagonal(idx / packed_inputs(), idx % packed_inputs());
        } else {
            size_t k = idx % r, rest = idx / r;
            d = diagonal(rest / layout_.in_blocks, rest % layout_.in_blocks, k);
        }
        bool zero = true;
        for (uint64_t v : d)
            if (v) {
                zero = false;
                break;
            }
        if (zero) {
            diags_[idx].zero = true;
            return;
        }
        if (!packed) {
            // Pre-shift right by the giant step so the giant rotation can be applied after the sum.
            size_t shift = ((idx % r) / baby_) * baby_;
            std::vector<uint64_t> sh(d.size(), 0);
            for (size_t j = 0; j < s; ++j) sh[(j + shift) % s] = d[j];
            d.swap(sh);
        }
        diags_[idx] = prepare_plain(ctx_, enc.encode(d));
    };
    if (exec_ == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 8)
        for (size_t i = 0; i < total; ++i) build(i);
    } else {
        for (size_t i = 0; i < total; ++i) build(i);
    }
}

LinearOperator::LinearOperator(ContextPtr ctx, size_t rows, size_t cols, Mode mode)
    : ctx_(std::move(ctx)), mode_(mode), exec_(Exec::Serial), has_matrix_(false) {
    f_.rows = rows;
    f_.cols = cols;
    layout_ = LinOpLayout::make(rows, cols, ctx_->n() / 2);
}

std::vector<uint64_t> LinearOperator::diagonal(size_t group, size_t block, size_t k) const {
    const auto& l = layout_;
    std::vector<uint64_t> d(l.row_size, 0);
    for (size_t j = 0; j < l.row_size; ++j) {
        size_t row;
        if (l.expand) {
            row = group * l.row_size + j;
        } else {
            if (j >= l.block) break;
            row = j % l.width;
        }
        size_t col = block * l.block + (j + k) % l.block;
        if (row < l.rows && col < l.cols) d[j] = f_.at(row, col);
    }
    return d;
}

std::vector<uint64_t> LinearOperator::input_slots(std::span<const uint64_t> x, size_t block, size_t rotation) const {
    if (x.size() != layout_.cols) throw ConfigError("input length does not match matrix columns");
    if (block >= layout_.in_blocks) throw ConfigError("input block out of range");
    const auto& l = layout_;
    std::vector<uint64_t> v(l.row_size, 0);
    for (size_t j = 0; j < l.row_size; ++j) {
        size_t col = block * l.block + (j + rotation) % l.block;
        if (col < l.cols) v[j] = x[col];
    }
    return v;
}

std::vector<uint64_t> LinearOperator::packed_diagonal(size_t group, size_t index) const {
    const size_t s = layout_.row_size, r = layout_.rotations;
    std::vector<uint64_t> d(2 * s, 0);
    for (size_t row = 0; row < 2; ++row) {
        size_t v = index + row * packed_inputs();
        if (v >= terms()) continue;
        auto part = diagonal(group, v / r, v % r);
        std::copy(part.begin(), part.end(), d.begin() + row * s);
    }
    return d;
}

std::vector<uint64_t> LinearOperator::packed_input_slots(std::span<const uint64_t> x, size_t index) const {
    if (index >= packed_inputs()) throw ConfigError("packed input index out of range");
    const size_t s = layout_.row_size, r = layout_.rotations;
    std::vector<uint64_t> v(2 * s, 0);
    for (size_t row = 0; row < 2; ++row) {
        size_t term = index + row * packed_inputs();
        if (term >= terms()) continue;
        auto part = input_slots(x, term / r, term % r);
        std::copy(part.begin(), part.end(), v.begin() + row * s);
    }
    return v;
}

std::vector<uint64_t> LinearOperator::gather(const std::vector<std::vector<uint64_t>>& group_slots) const {
    const auto& l = layout_;
    if (group_slots.size() != l.out_groups) throw ConfigError("output group count mismatch");
    const ring::Modulus& t = ctx_->t();
    for (auto& g : group_slots)
        if (g.size() < (mode_ == Mode::PreRotated ? 2 : 1) * l.row_size) throw ConfigError("group slot vector too short");
    std::vector<uint64_t> y(l.rows, 0);
    if (mode_ == Mode::Rotations) {
        for (size_t i = 0; i < l.rows; ++i) y[i] = group_slots[i / l.row_size][i % l.row_size];
        return y;
    }
    // Pre-rotated results: add the two rows, then the chunks of a narrow output.
    for (size_t i = 0; i < l.rows; ++i) {
        const auto& g = group_slots[l.expand ? i / l.row_size : 0];
        size_t j0 = l.expand ? i % l.row_size : i;
        for (size_t m = 0; m < l.chunks; ++m) {
            size_t j = j0 + m * l.width;
            y[i] = t.add(y[i], t.add(g[j], g[l.row_size + j]));
        }
    }
    return y;
}

std::vector<Ciphertext> LinearOperator::apply(std::span<const Ciphertext> blocks, const GaloisKeys& gk) const {
    if (mode_ != Mode::Rotations) throw ConfigError("operator was built for pre-rotated inputs");
    if (!has_matrix_) throw ConfigError("shape-only operator cannot be applied");
    const auto& l = layout_;
    if (blocks.size() != l.in_blocks) throw ConfigError("input block count mismatch");

    std::vector<std::vector<Ciphertext>> baby(l.in_blocks);
    for (size_t b = 0; b < l.in_blocks; ++b) {
        baby[b].push_back(blocks[b]);
        for (size_t j = 1; j < baby_; ++j) baby[b].push_back(rotate(baby[b].back(), 1, gk));
    }

    std::vector<Ciphertext> inner(l.out_groups * giant_);
    auto inner_sum = [&](size_t idx) {
        size_t g = idx % giant_, grp = idx / giant_;
        Ciphertext acc{RingElement(ctx_, true), RingElement(ctx_, true)};
        for (size_t b = 0; b < l.in_blocks; ++b)
            for (size_t j = 0; j < baby_; ++j)
                mul_plain_accumulate(acc, baby[b][j], diags_[diag_index(grp, b, g * baby_ + j)]);
        inner[idx] = std::move(acc);
    };
    const size_t jobs = inner.size();
    if (exec_ == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (size_t i = 0; i < jobs; ++i) inner_sum(i);
    } else {
        for (size_t i = 0; i < jobs; ++i) inner_sum(i);
    }

    std::vector<Ciphertext> out;
    for (size_t grp = 0; grp < l.out_groups; ++grp) {
        Ciphertext acc = inner[grp * giant_ + giant_ - 1];
        for (size_t g = giant_ - 1; g-- > 0;) {
            acc = rotate(acc, static_cast<long>(baby_), gk);
            add_inplace(acc, inner[grp * giant_ + g]);
        }
        if (!l.expand)
            for (size_t step = l.width; step < l.block; step <<= 1)
                add_inplace(acc, rotate(acc, static_cast<long>(step), gk));
        out.push_back(std::move(acc));
    }
    return out;
}

std::vector<Ciphertext> LinearOperator::apply_prerotated(std::span<const Ciphertext> packed) const {
    if (mode_ != Mode::PreRotated) throw ConfigError("operator was built for rotation keys");
    if (!has_matrix_) throw ConfigError("shape-only operator cannot be applied");
    const auto& l = layout_;
    const size_t p = packed_inputs();
    if (packed.size() != p) throw ConfigError("packed input count mismatch");

    // Split each group's diagonal sum into slices so the parallel kernel has enough work.
    const size_t slices = std::min<size_t>(p, 16);
    std::vector<Ciphertext> partial(l.out_groups * slices);
    auto slice_sum = [&](size_t idx) {
        size_t sl = idx % slices, grp = idx / slices;
        size_t lo = p * sl / slices, hi = p * (sl + 1) / slices;
        Ciphertext acc{RingElement(ctx_, true), RingElement(ctx_, true)};
        for (size_t i = lo; i < hi; ++i) mul_plain_accumulate(acc, packed[i], diags_[packed_index(grp, i)]);
        partial[idx] = std::move(acc);
    };
    const size_t jobs = partial.size();
    if (exec_ == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (size_t i = 0; i < jobs; ++i) slice_sum(i);
    } else {
        for (size_t i = 0; i < jobs; ++i) slice_sum(i);
    }
    std::vector<Ciphertext> out;
    for (size_t grp = 0; grp < l.out_groups; ++grp) {
        Ciphertext acc = std::move(partial[grp * slices]);
        for (size_t sl = 1; sl < slices; ++sl) add_inplace(acc, partial[grp * slices + sl]);
        out.push_back(std::move(acc));
    }
    return out;
}

std::vector<std::vector<uint64_t>> LinearOperator::apply_slots(std::span<const uint64_t> x) const {
    if (!has_matrix_) throw ConfigError("shape-only operator cannot be applied");
    const auto& l = layout_;
    const ring::Modulus& t = ctx_->t();
    const size_t n = 2 * l.row_size;
    std::vector<std::vector<uint64_t>> out(l.out_groups, std::vector<uint64_t>(n, 0));
    if (mode_ == Mode::PreRotated) {
        for (size_t grp = 0; grp < l.out_groups; ++grp)
            for (size_t i = 0; i < packed_inputs(); ++i) {
                auto d = packed_diagonal(grp, i);
                auto in = packed_input_slots(x, i);
                for (size_t j = 0; j < n; ++j) out[grp][j] = t.add(out[grp][j], t.mul(d[j], in[j]));
            }
        return out;
    }
    for (size_t grp = 0; grp < l.out_groups; ++grp)
        for (size_t b = 0; b < l.in_blocks; ++b)
            for (size_t k = 0; k < l.rotations; ++k) {
                auto d = diagonal(grp, b, k);
                auto in = input_slots(x, b, k);
                for (size_t j = 0; j < l.row_size; ++j) out[grp][j] = t.add(out[grp][j], t.mul(d[j], in[j]));
            }
    if (!l.expand) {
        // Mirror the rotate-and-sum folding within row 0.
        for (size_t step = l.width; step < l.block; step <<= 1) {
            auto cur = out[0];
            for (size_t j = 0; j < l.row_size; ++j) out[0][j] = t.add(cur[j], cur[(j + step) % l.row_size]);
        }
    }
    return out;
}

std::vector<uint64_t> matvec(const ModMatrix& f, std::span<const uint64_t> x, uint64_t tv, Exec exec) {
    if (x.size() != f.cols) throw ConfigError("matvec dimension mismatch");
    std::vector<uint64_t> y(f.rows);
    auto row = [&](size_t r) {
        ring::u128 acc = 0;
        const uint64_t* fr = f.data.data() + r * f.cols;
        // t < 2^42 so each product is < 2^84; fold every 2^16 terms to stay below 2^128.
        for (size_t c = 0; c < f.cols; ++c) {
            acc += ring::u128(fr[c]) * x[c];
            if ((c & 0xFFFF) == 0xFFFF) acc %= tv;
        }
        y[r] = static_cast<uint64_t>(acc % tv);
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (size_t r = 0; r < f.rows; ++r) row(r);
    } else {
        for (size_t r = 0; r < f.rows; ++r) row(r);
    }
    return y;
}

Ciphertext lin_op(const GaloisKeys& gk, const Ciphertext& ct_r, const LinearOperator& op) {
    if (op.layout().in_blocks != 1 || op.layout().out_groups != 1)
        throw ConfigError("lin_op: dimensions exceed one ciphertext; use LinearOperator::apply");
    return op.apply(std::span<const Ciphertext>(&ct_r, 1), gk).front();
}

}  // namespace seco::bfv
