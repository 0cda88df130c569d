#pragma once

#include <array>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "seco/gc/block.hpp"
#include "seco/transport/channel.hpp"

namespace seco::gc {

using transport::Party;
using LabelPair = std::array<Block, 2>;

// Chou-Orlandi random OT over ristretto255. The sender learns both keys of every
// transfer, the receiver the key matching each choice bit. The sender sends one
// group element, the receiver one per transfer.
std::vector<LabelPair> co_random_ot_send(transport::Endpoint& ep, Party receiver, size_t count, Prng& rng);
std::vector<Block> co_random_ot_receive(transport::Endpoint& ep, Party sender, std::span<const uint8_t> choices,
                                        Prng& rng);

// Chosen-message variants: the messages are sent masked with the random-OT keys.
void base_ot_send(transport::Endpoint& ep, Party receiver, std::span<const LabelPair> msgs, Prng& rng);
std::vector<Block> base_ot_receive(transport::Endpoint& ep, Party sender, std::span<const uint8_t> choices, Prng& rng);

class OtSender {
public:
    virtual ~OtSender() = default;
    virtual void send(transport::Endpoint& ep, std::span<const LabelPair> msgs) = 0;
};

class OtReceiver {
public:
    virtual ~OtReceiver() = default;
    // One label per choice bit (choices are 0/1 bytes).
    virtual std::vector<Block> receive(transport::Endpoint& ep, std::span<const uint8_t> choices) = 0;
};

// Semi-honest IKNP extension. Construction runs 128 base OTs with the peer (the
// extension receiver acts as base-OT sender), so both sides must be built in the
// same phase. Each later send/receive pair is one message in each direction.
std::unique_ptr<OtSender> make_iknp_sender(transport::Endpoint& ep, Party receiver, Prng& rng);
std::unique_ptr<OtReceiver> make_iknp_receiver(transport::Endpoint& ep, Party sender, Prng& rng);

// Bit-matrix transpose used by the extension: `rows` is 128 rows of `cols` bits
// (cols a multiple of 128, row-major, little-endian), the result holds one
// 128-bit block per column.
std::vector<Block> transpose_128(std::span<const uint8_t> rows, size_t cols);

#ifdef SECO_INSECURE_TEST_MODES
// INSECURE, tests only: a trusted in-process dealer that takes the sender's label
// pairs and hands the receiver the chosen ones. Nothing crosses the network.
class OtDealer {
public:
    explicit OtDealer(std::chrono::milliseconds timeout = std::chrono::minutes(10)) : timeout_(timeout) {}

    void deposit(Party sender, Party receiver, std::vector<LabelPair> pairs);
    std::vector<Block> collect(Party sender, Party receiver, std::span<const uint8_t> choices);

    // Labels handed to receivers so far, for audits.
    size_t labels_released() const;

private:
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::chrono::milliseconds timeout_;
    std::map<std::pair<Party, Party>, std::deque<std::vector<LabelPair>>> queues_;
    size_t released_ = 0;
};

std::unique_ptr<OtSender> make_dealer_sender(std::shared_ptr<OtDealer> dealer, Party self, Party receiver);
std::unique_ptr<OtReceiver> make_dealer_receiver(std::shared_ptr<OtDealer> dealer, Party self, Party sender);
#endif

}  // namespace seco::gc
