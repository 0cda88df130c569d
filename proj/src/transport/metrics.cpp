#include "seco/transport/metrics.hpp"

#include <json.hpp>

#include "seco/common/error.hpp"

namespace seco::transport {

using nlohmann::json;

namespace {

constexpr const char* kPartyNames[kNumParties] = {"user", "a", "b", "c"};
constexpr const char* kPhaseNames[kNumPhases] = {"setup", "preprocess", "online"};

json phase_json(const PhaseMetrics& m, bool timing) {
    json j = {{"bytes_in", m.bytes_in}, {"bytes_out", m.bytes_out}, {"msgs", m.msgs_out},
              {"msgs_in", m.msgs_in},   {"rounds", m.rounds}};
    if (timing) {
        j["wall_ms"] = m.wall_ms;
        j["wait_ms"] = m.wait_ms;
    }
    return j;
}

PhaseMetrics phase_from(const json& j) {
    PhaseMetrics m;
    m.bytes_in = j.at("bytes_in").get<uint64_t>();
    m.bytes_out = j.at("bytes_out").get<uint64_t>();
    m.msgs_out = j.at("msgs").get<uint64_t>();
    m.msgs_in = j.at("msgs_in").get<uint64_t>();
    m.rounds = j.at("rounds").get<uint64_t>();
    if (j.contains("wall_ms")) m.wall_ms = j.at("wall_ms").get<double>();
    if (j.contains("wait_ms")) m.wait_ms = j.at("wait_ms").get<double>();
    return m;
}

bool same_counts(const PhaseMetrics& a, const PhaseMetrics& b) {
    return a.bytes_in == b.bytes_in && a.bytes_out == b.bytes_out && a.msgs_in == b.msgs_in &&
           a.msgs_out == b.msgs_out && a.rounds == b.rounds;
}

}  // namespace

const char* party_name(Party p) { return kPartyNames[static_cast<size_t>(p)]; }
const char* phase_name(Phase p) { return kPhaseNames[static_cast<size_t>(p)]; }

Party party_from_name(const std::string& s) {
    for (size_t i = 0; i < kNumParties; ++i)
        if (s == kPartyNames[i]) return static_cast<Party>(i);
    throw ConfigError("unknown party '" + s + "'");
}

bool MetricsReport::same_traffic(const MetricsReport& o) const {
    for (size_t p = 0; p < kNumParties; ++p)
        for (size_t ph = 0; ph < kNumPhases; ++ph) {
            if (!same_counts(parties[p].phases[ph], o.parties[p].phases[ph])) return false;
            for (size_t q = 0; q < kNumParties; ++q)
                if (!same_counts(parties[p].peers[q].phases[ph], o.parties[p].peers[q].phases[ph])) return false;
        }
    return true;
}

std::string MetricsReport::to_json(int indent) const {
    json j;
    j["run_id"] = run_id;
    j["mode"] = mode;
    j["l"] = l;
    json ps = json::object();
    for (size_t p = 0; p < kNumParties; ++p) {
        json pj;
        for (size_t ph = 0; ph < kNumPhases; ++ph) pj[kPhaseNames[ph]] = phase_json(parties[p].phases[ph], true);
        json peers = json::object();
        for (size_t q = 0; q < kNumParties; ++q) {
            if (q == p) continue;
            json qj;
            for (size_t ph = 0; ph < kNumPhases; ++ph)
                qj[kPhaseNames[ph]] = phase_json(parties[p].peers[q].phases[ph], false);
            peers[kPartyNames[q]] = std::move(qj);
        }
        pj["peers"] = std::move(peers);
        ps[kPartyNames[p]] = std::move(pj);
    }
    j["parties"] = std::move(ps);
    return j.dump(indent);
}

MetricsReport MetricsReport::from_json(const std::string& text) {
    MetricsReport r;
    try {
        json j = json::parse(text);
        r.run_id = j.at("run_id").get<std::string>();
        r.mode = j.at("mode").get<std::string>();
        r.l = j.at("l").get<int>();
        const json& ps = j.at("parties");
        for (size_t p = 0; p < kNumParties; ++p) {
            const json& pj = ps.at(kPartyNames[p]);
            for (size_t ph = 0; ph < kNumPhases; ++ph) r.parties[p].phases[ph] = phase_from(pj.at(kPhaseNames[ph]));
            for (size_t q = 0; q < kNumParties; ++q) {
                if (q == p) continue;
                const json& qj = pj.at("peers").at(kPartyNames[q]);
                for (size_t ph = 0; ph < kNumPhases; ++ph)
                    r.parties[p].peers[q].phases[ph] = phase_from(qj.at(kPhaseNames[ph]));
            }
        }
    } catch (const json::exception& e) {
        throw SerializationError(std::string("bad metrics report: ") + e.what());
    }
    return r;
}

}  // namespace seco::transport
