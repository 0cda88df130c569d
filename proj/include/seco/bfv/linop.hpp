#pragma once

#include <span>
#include <vector>

#include "seco/bfv/bfv.hpp"

namespace seco::bfv {

// Dense matrix of residues mod t, row-major.
struct ModMatrix {
    size_t rows = 0, cols = 0;
    std::vector<uint64_t> data;

    ModMatrix() = default;
    ModMatrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0) {}
    uint64_t& at(size_t r, size_t c) { return data[r * cols + c]; }
    uint64_t at(size_t r, size_t c) const { return data[r * cols + c]; }
};

enum class Exec { Serial, Parallel };

// Packing plan for y = F x with F of shape rows x cols on rows of `row_size` slots.
// Inputs are split into blocks of `block` slots, replicated across the row.
// Narrow outputs (rows <= block) use `chunks` partial sums of width `width`;
// wide outputs use out_groups full-row results.
struct LinOpLayout {
    size_t rows = 0, cols = 0, row_size = 0;
    size_t block = 0, in_blocks = 0;
    bool expand = false;
    size_t width = 0, rotations = 0, out_groups = 0, chunks = 1;

    static LinOpLayout make(size_t rows, size_t cols, size_t row_size);
};

class LinearOperator {
public:
    // Rotations: ciphertext inputs are rotated with Galois keys (baby-step/giant-step)
    // and the result is dense in row 0. PreRotated: the caller supplies every rotation
    // of each input block, two rotations per ciphertext (one per slot row), and no key
    // material is needed; results stay split across rows and chunks until gather.
    enum class Mode { Rotations, PreRotated };

    LinearOperator(ContextPtr ctx, const ModMatrix& f, Mode mode, Exec exec = Exec::Parallel);
    // Shape only: packs inputs and gathers outputs for a rows x cols matrix it does not hold.
    LinearOperator(ContextPtr ctx, size_t rows, size_t cols, Mode mode);

    const LinOpLayout& layout() const { return layout_; }
    Mode mode() const { return mode_; }

    // Row-0 slot vector for input block `block`, rotated left by `rotation`.
    std::vector<uint64_t> input_slots(std::span<const uint64_t> x, size_t block, size_t rotation = 0) const;
    // Number of packed inputs apply_prerotated expects, and the full slot vector of each.
    size_t packed_inputs() const { return (terms() + 1) / 2; }
    std::vector<uint64_t> packed_input_slots(std::span<const uint64_t> x, size_t index) const;
    // Reads y (length rows) out of decoded per-group slot vectors (all n slots).
    std::vector<uint64_t> gather(const std::vector<std::vector<uint64_t>>& group_slots) const;

    std::vector<Ciphertext> apply(std::span<const Ciphertext> blocks, const GaloisKeys& gk) const;
    // packed[i] encrypts packed_input_slots(x, i).
    std::vector<Ciphertext> apply_prerotated(std::span<const Ciphertext> packed) const;

    // Plain slot-domain evaluation of exactly the same packing, for tests.
    std::vector<std::vector<uint64_t>> apply_slots(std::span<const uint64_t> x) const;

private:
    // PreRotated term v covers (block v / rotations, rotation v % rotations); packed
    // input i carries term i in row 0 and term i + packed_inputs() in row 1.
    size_t terms() const { return layout_.in_blocks * layout_.rotations; }
    std::vector<uint64_t> diagonal(size_t group, size_t block, size_t k) const;
    std::vector<uint64_t> packed_diagonal(size_t group, size_t index) const;
    size_t diag_index(size_t group, size_t block, size_t k) const {
        return (group * layout_.in_blocks + block) * layout_.rotations + k;
    }
    size_t packed_index(size_t group, size_t index) const { return group * packed_inputs() + index; }

    ContextPtr ctx_;
    ModMatrix f_;
    Mode mode_;
    Exec exec_;
    LinOpLayout layout_;
    size_t baby_ = 1, giant_ = 1;
    std::vector<PreparedPlain> diags_;
    bool has_matrix_ = true;
};

// y = F x mod t.
std::vector<uint64_t> matvec(const ModMatrix& f, std::span<const uint64_t> x, uint64_t t, Exec exec = Exec::Parallel);

// Single-block convenience: dec(result) holds F * dec(ct_r) in the first rows slots.
Ciphertext lin_op(const GaloisKeys& gk, const Ciphertext& ct_r, const LinearOperator& op);

}  // namespace seco::bfv
