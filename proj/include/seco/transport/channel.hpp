#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seco/transport/metrics.hpp"

namespace seco::transport {

inline constexpr size_t kFrameHeaderBytes = 11;

struct Frame {
    Party sender = Party::User;
    Party receiver = Party::User;
    Phase phase = Phase::Setup;
    uint16_t layer = 0;
    uint16_t kind = 0;
    std::vector<uint8_t> payload;

    size_t wire_size() const { return kFrameHeaderBytes + payload.size(); }
};

// {u32 payload length, u8 sender, u8 receiver, u8 phase, u16 layer, u16 kind}, little-endian.
std::vector<uint8_t> encode_frame(const Frame& f);
struct FrameHeader {
    uint32_t length;
    Frame meta;  // payload left empty
};
FrameHeader decode_frame_header(std::span<const uint8_t, kFrameHeaderBytes> h);

// A bidirectional byte-frame pipe to one peer.
class Link {
public:
    virtual ~Link() = default;
    virtual void write(std::vector<uint8_t> frame) = 0;
    // Next complete frame, nullopt on timeout; throws ChannelClosed once the peer is gone.
    virtual std::optional<std::vector<uint8_t>> read(std::chrono::milliseconds timeout) = 0;
    virtual void close() = 0;
};

// Two connected in-process links.
std::pair<std::unique_ptr<Link>, std::unique_ptr<Link>> make_local_pair();

struct TranscriptEntry {
    bool outgoing = false;
    Party peer = Party::User;
    Phase phase = Phase::Setup;
    uint16_t layer = 0;
    uint16_t kind = 0;
    size_t bytes = 0;
    std::vector<uint8_t> payload;  // kept only when payload recording is on
};

// One party's view of the network: a link per peer plus metering. Every byte a
// party exchanges goes through send/recv here.
class Endpoint {
public:
    explicit Endpoint(Party self, std::chrono::milliseconds timeout = std::chrono::minutes(10));
    ~Endpoint();
    Endpoint(const Endpoint&) = delete;
    Endpoint& operator=(const Endpoint&) = delete;

    Party self() const { return self_; }
    void attach(Party peer, std::unique_ptr<Link> link);
    bool connected(Party peer) const;

    // Frames are stamped with, and must arrive in, the current phase and layer.
    void set_phase(Phase p);
    Phase phase() const { return phase_; }
    void set_layer(uint16_t layer) { layer_ = layer; }
    uint16_t layer() const { return layer_; }

    void send(Party to, uint16_t kind, std::span<const uint8_t> payload);
    std::vector<uint8_t> recv(Party from, uint16_t kind);

    void record_transcript(bool payloads) {
        transcript_on_ = true;
        transcript_payloads_ = payloads;
    }
    const std::vector<TranscriptEntry>& transcript() const { return transcript_; }

    // Closes all links; peers blocked in recv see ChannelClosed.
    void close();
    // Stops the phase clock and returns the totals.
    PartyMetrics finish();
    const PartyMetrics& metrics() const { return metrics_; }

private:
    Link& link(Party peer);
    void tick();

    Party self_;
    std::chrono::milliseconds timeout_;
    std::array<std::unique_ptr<Link>, kNumParties> links_;
    std::array<bool, kNumParties> received_since_send_{};
    Phase phase_ = Phase::Setup;
    uint16_t layer_ = 0;
    std::chrono::steady_clock::time_point phase_start_;
    PartyMetrics metrics_;
    bool transcript_on_ = false, transcript_payloads_ = false;
    std::vector<TranscriptEntry> transcript_;
};

// Fully connected in-process network for the four parties.
std::array<std::unique_ptr<Endpoint>, kNumParties> make_local_network(
    std::chrono::milliseconds timeout = std::chrono::minutes(10));

}  // namespace seco::transport
