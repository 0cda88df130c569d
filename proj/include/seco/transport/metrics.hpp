#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace seco::transport {

enum class Party : uint8_t { User = 0, A = 1, B = 2, C = 3 };
inline constexpr size_t kNumParties = 4;

enum class Phase : uint8_t { Setup = 0, Preprocess = 1, Online = 2 };
inline constexpr size_t kNumPhases = 3;

const char* party_name(Party p);
const char* phase_name(Phase p);
Party party_from_name(const std::string& s);

struct PhaseMetrics {
    uint64_t bytes_in = 0, bytes_out = 0;
    uint64_t msgs_in = 0, msgs_out = 0;
    // Alternations: a send counts a new round when the peer has been heard from
    // since our last send to it (or it is the first send to that peer).
    uint64_t rounds = 0;
    double wall_ms = 0;  // time spent in the phase
    double wait_ms = 0;  // part of wall_ms blocked in recv

    bool operator==(const PhaseMetrics&) const = default;
};

struct PeerMetrics {
    std::array<PhaseMetrics, kNumPhases> phases{};  // wall/wait unused per peer
    bool operator==(const PeerMetrics&) const = default;
};

struct PartyMetrics {
    std::array<PhaseMetrics, kNumPhases> phases{};
    std::array<PeerMetrics, kNumParties> peers{};

    PhaseMetrics& at(Phase p) { return phases[static_cast<size_t>(p)]; }
    const PhaseMetrics& at(Phase p) const { return phases[static_cast<size_t>(p)]; }
    bool operator==(const PartyMetrics&) const = default;
};

struct MetricsReport {
    std::string run_id;
    std::string mode;
    int l = 0;
    std::array<PartyMetrics, kNumParties> parties{};

    const PartyMetrics& party(Party p) const { return parties[static_cast<size_t>(p)]; }
    // Byte and message counts only; wall-clock fields are ignored.
    bool same_traffic(const MetricsReport& o) const;

    std::string to_json(int indent = 2) const;
    static MetricsReport from_json(const std::string& text);
    bool operator==(const MetricsReport&) const = default;
};

}  // namespace seco::transport
