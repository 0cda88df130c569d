#include "seco/transport/channel.hpp"

#include "seco/common/error.hpp"
#include "frame_queue.hpp"

namespace seco::transport {

namespace {
std::vector<uint8_t> encode(const Frame& f, std::span<const uint8_t> payload) {
    if (payload.size() > UINT32_MAX) throw SerializationError("frame payload too large");
    std::vector<uint8_t> out(kFrameHeaderBytes + payload.size());
    uint32_t len = static_cast<uint32_t>(payload.size());
    for (int i = 0; i < 4; ++i) out[i] = static_cast<uint8_t>(len >> (8 * i));
    out[4] = static_cast<uint8_t>(f.sender);
    out[5] = static_cast<uint8_t>(f.receiver);
    out[6] = static_cast<uint8_t>(f.phase);
    out[7] = static_cast<uint8_t>(f.layer);
    out[8] = static_cast<uint8_t>(f.layer >> 8);
    out[9] = static_cast<uint8_t>(f.kind);
    out[10] = static_cast<uint8_t>(f.kind >> 8);
    std::copy(payload.begin(), payload.end(), out.begin() + kFrameHeaderBytes);
    return out;
}
}  // namespace

std::vector<uint8_t> encode_frame(const Frame& f) { return encode(f, f.payload); }

FrameHeader decode_frame_header(std::span<const uint8_t, kFrameHeaderBytes> h) {
    FrameHeader r;
    r.length = uint32_t(h[0]) | uint32_t(h[1]) << 8 | uint32_t(h[2]) << 16 | uint32_t(h[3]) << 24;
    if (h[4] >= kNumParties || h[5] >= kNumParties) throw SerializationError("frame names an unknown party");
    if (h[6] >= kNumPhases) throw SerializationError("frame names an unknown phase");
    r.meta.sender = static_cast<Party>(h[4]);
    r.meta.receiver = static_cast<Party>(h[5]);
    r.meta.phase = static_cast<Phase>(h[6]);
    r.meta.layer = static_cast<uint16_t>(h[7] | h[8] << 8);
    r.meta.kind = static_cast<uint16_t>(h[9] | h[10] << 8);
    return r;
}

namespace {

class LocalLink : public Link {
public:
    LocalLink(std::shared_ptr<FrameQueue> in, std::shared_ptr<FrameQueue> out) : in_(std::move(in)), out_(std::move(out)) {}
    ~LocalLink() override { close(); }

    void write(std::vector<uint8_t> frame) override {
        if (!out_->push(std::move(frame))) throw ChannelClosed("peer closed the channel");
    }
    std::optional<std::vector<uint8_t>> read(std::chrono::milliseconds timeout) override { return in_->pop(timeout); }
    void close() override {
        in_->close();
        out_->close();
    }

private:
    std::shared_ptr<FrameQueue> in_, out_;
};

}  // namespace

std::pair<std::unique_ptr<Link>, std::unique_ptr<Link>> make_local_pair() {
    auto ab = std::make_shared<FrameQueue>(), ba = std::make_shared<FrameQueue>();
    return {std::make_unique<LocalLink>(ba, ab), std::make_unique<LocalLink>(ab, ba)};
}

Endpoint::Endpoint(Party self, std::chrono::milliseconds timeout)
    : self_(self), timeout_(timeout), phase_start_(std::chrono::steady_clock::now()) {}

Endpoint::~Endpoint() { close(); }

void Endpoint::attach(Party peer, std::unique_ptr<Link> link) {
    if (peer == self_) throw ConfigError("cannot link a party to itself");
    links_[static_cast<size_t>(peer)] = std::move(link);
}

bool Endpoint::connected(Party peer) const { return links_[static_cast<size_t>(peer)] != nullptr; }

Link& Endpoint::link(Party peer) {
    auto& l = links_[static_cast<size_t>(peer)];
    if (!l) throw ProtocolError(std::string("no channel from ") + party_name(self_) + " to " + party_name(peer));
    return *l;
}

void Endpoint::tick() {
    auto now = std::chrono::steady_clock::now();
    metrics_.at(phase_).wall_ms += std::chrono::duration<double, std::milli>(now - phase_start_).count();
    phase_start_ = now;
}

void Endpoint::set_phase(Phase p) {
    tick();
    phase_ = p;
}

void Endpoint::send(Party to, uint16_t kind, std::span<const uint8_t> payload) {
    Frame f;
    f.sender = self_;
    f.receiver = to;
    f.phase = phase_;
    f.layer = layer_;
    f.kind = kind;
    const size_t bytes = kFrameHeaderBytes + payload.size();
    Link& l = link(to);

    size_t peer = static_cast<size_t>(to);
    auto& mine = metrics_.at(phase_);
    auto& per = metrics_.peers[peer].phases[static_cast<size_t>(phase_)];
    bool new_round = received_since_send_[peer] || per.msgs_out == 0;
    // Count before the frame can be observed by the peer.
    mine.bytes_out += bytes;
    mine.msgs_out += 1;
    per.bytes_out += bytes;
    per.msgs_out += 1;
    if (new_round) {
        mine.rounds += 1;
        per.rounds += 1;
    }
    received_since_send_[peer] = false;
    if (transcript_on_)
        transcript_.push_back({true, to, phase_, layer_, kind, bytes,
                               transcript_payloads_ ? std::vector<uint8_t>(payload.begin(), payload.end())
                                                    : std::vector<uint8_t>{}});
    l.write(encode(f, payload));
}

std::vector<uint8_t> Endpoint::recv(Party from, uint16_t kind) {
    Link& l = link(from);
    auto t0 = std::chrono::steady_clock::now();
    auto raw = l.read(timeout_);
    metrics_.at(phase_).wait_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (!raw) throw TimeoutError(std::string(party_name(self_)) + " timed out waiting for " + party_name(from));
    if (raw->size() < kFrameHeaderBytes) throw SerializationError("short frame");
    FrameHeader h = decode_frame_header(std::span<const uint8_t, kFrameHeaderBytes>(raw->data(), kFrameHeaderBytes));
    if (h.length != raw->size() - kFrameHeaderBytes) throw SerializationError("frame length mismatch");
    if (h.meta.sender != from || h.meta.receiver != self_) throw ProtocolError("frame routed to the wrong party");
    if (h.meta.phase != phase_ || h.meta.layer != layer_ || h.meta.kind != kind)
        throw ProtocolError(std::string(party_name(self_)) + " expected message " + std::to_string(kind) + " (" +
                            phase_name(phase_) + ", layer " + std::to_string(layer_) + ") from " + party_name(from) +
                            ", got " + std::to_string(h.meta.kind) + " (" + phase_name(h.meta.phase) + ", layer " +
                            std::to_string(h.meta.layer) + ")");

    size_t peer = static_cast<size_t>(from);
    auto& mine = metrics_.at(phase_);
    auto& per = metrics_.peers[peer].phases[static_cast<size_t>(phase_)];
    mine.bytes_in += raw->size();
    mine.msgs_in += 1;
    per.bytes_in += raw->size();
    per.msgs_in += 1;
    received_since_send_[peer] = true;
    std::vector<uint8_t> payload(raw->begin() + kFrameHeaderBytes, raw->end());
    if (transcript_on_)
        transcript_.push_back({false, from, phase_, layer_, kind, raw->size(),
                               transcript_payloads_ ? payload : std::vector<uint8_t>{}});
    return payload;
}

void Endpoint::close() {
    for (auto& l : links_)
        if (l) l->close();
}

PartyMetrics Endpoint::finish() {
    tick();
    return metrics_;
}

std::array<std::unique_ptr<Endpoint>, kNumParties> make_local_network(std::chrono::milliseconds timeout) {
    std::array<std::unique_ptr<Endpoint>, kNumParties> eps;
    for (size_t i = 0; i < kNumParties; ++i) eps[i] = std::make_unique<Endpoint>(static_cast<Party>(i), timeout);
    for (size_t i = 0; i < kNumParties; ++i)
        for (size_t j = i + 1; j < kNumParties; ++j) {
            auto [a, b] = make_local_pair();
            eps[i]->attach(static_cast<Party>(j), std::move(a));
            eps[j]->attach(static_cast<Party>(i), std::move(b));
        }
    return eps;
}

}  // namespace seco::transport
