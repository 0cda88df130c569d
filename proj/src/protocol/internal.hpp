#pragma once

#include <map>
#include <memory>

#include "seco/bfv/bfv.hpp"
#include "seco/bfv/linop.hpp"
#include "seco/common/msg_kind.hpp"
#include "seco/gc/circuit.hpp"
#include "seco/gc/garble.hpp"
#include "seco/gc/ot.hpp"
#include "seco/protocol/protocol.hpp"

namespace seco::protocol::detail {

// Layer tag for frames that belong to no block: key material and the output.
inline constexpr size_t kNoBlock = 0;

// Group names of the ReLU circuits.
inline constexpr const char* kUserShare = "Fr-s";
inline constexpr const char* kNextMask = "r_next";
inline constexpr const char* kGatewayShare = "Fx-Fr+s";
inline constexpr const char* kOneTimePad = "d_next";
inline constexpr const char* kShareB = "F2x-F2r+s2";
inline constexpr const char* kNextMaskB = "r2_next";
inline constexpr const char* kShareC = "F3x-F3r+s3";
inline constexpr const char* kNextMaskC = "r3_next";

// Per-thread party state shared by the three party kinds.
class PartyBase {
public:
    PartyBase(transport::Endpoint& ep, const Options& opt);

    Record take_record();

protected:
    void at(Phase ph, size_t block);
    bool recording() const { return opt_.record; }
    void record(const std::string& name, size_t block, std::vector<uint64_t> v);

    // Fresh uniform masks mod p; zero under the zero-randomness switch.
    std::vector<uint64_t> mask(size_t n);
    // One mask per slot of each of `groups` ciphertexts.
    std::vector<std::vector<uint64_t>> slot_masks(size_t groups);
    bool corrupt(size_t block) const;
    void perturb(std::vector<uint64_t>& v) const;

    void send_values(Party to, MsgKind k, std::span<const uint64_t> v);
    std::vector<uint64_t> recv_values(Party from, MsgKind k, size_t expect);
    void send_cts(Party to, MsgKind k, std::span<const bfv::Ciphertext> cts);
    std::vector<bfv::Ciphertext> recv_cts(Party from, MsgKind k, size_t expect);
    void send_labels(Party to, MsgKind k, std::span<const gc::Block> labels);
    std::vector<gc::Block> recv_labels(Party from, MsgKind k, size_t expect);

    // Encryptions of every packed input of `op` for the vector r.
    std::vector<bfv::Ciphertext> encrypt_packed(const bfv::LinearOperator& op, std::span<const uint64_t> r,
                                                const bfv::PublicKey& pk);
    // Encryptions of the input blocks of a rotation-mode operator.
    std::vector<bfv::Ciphertext> encrypt_blocks(const bfv::LinearOperator& op, std::span<const uint64_t> r,
                                                const bfv::PublicKey& pk);
    // y in consecutive slot-sized chunks.
    std::vector<bfv::Ciphertext> encrypt_vector(std::span<const uint64_t> y, const bfv::PublicKey& pk);
    std::vector<std::vector<uint64_t>> decrypt_slots(const bfv::SecretKey& sk, std::span<const bfv::Ciphertext> cts);

    std::unique_ptr<gc::OtSender> ot_sender(Party receiver);
    std::unique_ptr<gc::OtReceiver> ot_receiver(Party sender);

    const gc::BoolCircuit& relu_2pc(uint32_t shift);
    const gc::BoolCircuit& relu_3pc(uint32_t shift);

    std::vector<uint64_t> add(std::span<const uint64_t> a, std::span<const uint64_t> b) const;
    std::vector<uint64_t> sub(std::span<const uint64_t> a, std::span<const uint64_t> b) const;
    // F x + s + b over residues.
    std::vector<uint64_t> affine(const bfv::ModMatrix& f, std::span<const uint64_t> x, std::span<const uint64_t> s,
                                 std::span<const uint64_t> b) const;

    transport::Endpoint& ep_;
    const Options& opt_;
    Prng rng_;
    ring::ContextPtr ctx_;
    bfv::BatchEncoder enc_;
    uint64_t p_;
    uint32_t bitwidth_;
    Record rec_;

private:
    uint64_t nonce_ = 0;
    std::map<uint32_t, gc::BoolCircuit> relu2_, relu3_;
};

// Choice bits [instance][bit] of one word per instance.
std::vector<uint8_t> word_bits(std::span<const uint64_t> values, uint32_t width);

// Appends b to a.
template <class T>
void append(std::vector<T>& a, const std::vector<T>& b) {
    a.insert(a.end(), b.begin(), b.end());
}

}  // namespace seco::protocol::detail
