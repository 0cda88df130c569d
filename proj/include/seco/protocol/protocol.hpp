#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "seco/bfv/linop.hpp"
#include "seco/nn/model.hpp"
#include "seco/ring/ring.hpp"
#include "seco/transport/channel.hpp"

#ifdef SECO_INSECURE_TEST_MODES
#include "seco/gc/ot.hpp"
#endif

namespace seco::protocol {

using transport::Party;
using transport::Phase;

// Seco: remote ReLUs garbled by B, evaluated by C. Delphi3: same preprocessing, but
// server A evaluates the remote circuits. Delphi2: user and A only, requires l = L.
enum class Mode { Seco, Delphi3, Delphi2 };

const char* mode_name(Mode m);
Mode mode_from_name(const std::string& s);

// INSECURE switches for tests. Rejected unless built with SECO_INSECURE_TEST_MODES.
struct TestSwitches {
    bool zero_randomness = false;  // every mask r, s, d is zero
    bool dealer_ot = false;        // labels handed over by an in-process dealer
    size_t corrupt_block = 0;      // 1-based block whose preprocessed share is perturbed; 0 = off

    bool any() const { return zero_randomness || dealer_ot || corrupt_block != 0; }
};

struct Options {
    Mode mode = Mode::Seco;
    size_t l = 0;  // blocks 1..l on the gateway, l+1..L remote
    ring::RingParams params = ring::RingParams::desk();
    uint64_t seed = 1;
    TestSwitches test;
    bool record = false;              // keep per-party share records for audits
    bool transcript_payloads = false;  // keep frame payloads in the transcript
#ifdef SECO_INSECURE_TEST_MODES
    std::shared_ptr<gc::OtDealer> dealer;  // required when test.dealer_ot is set
#endif
};

// Public shape of one protocol block: fused linear map followed by an optional ReLU
// with truncation by `shift` bits.
struct BlockShape {
    uint32_t rows = 0, cols = 0, shift = 0;
    bool relu = false;
};

// What each party is given before the protocol starts.
struct UserView {
    size_t input_size = 0, output_size = 0;
    size_t num_blocks = 0;          // L, needed only to tell l = L apart
    std::vector<BlockShape> gateway;  // blocks 1..l
    std::optional<BlockShape> transition;  // block l+1 when l < L
};

struct GatewayModel {
    std::vector<BlockShape> shapes;  // all L blocks
    std::vector<bfv::ModMatrix> f;   // blocks 1..l
    std::vector<std::vector<uint64_t>> bias;
};

struct RemoteModel {
    std::vector<BlockShape> shapes;  // all L blocks
    std::vector<bfv::ModMatrix> f;   // this server's share of blocks l+1..L
    std::vector<std::vector<uint64_t>> bias;
};

struct Deployment {
    size_t l = 0;
    UserView user;
    GatewayModel a;
    RemoteModel b, c;
};

Deployment deploy(const nn::ModelSplit& split);

// Values a party held during one inference, keyed by (name, block). Filled only when
// Options::record is set; the audits read these.
struct Record {
    std::map<std::pair<std::string, size_t>, std::vector<uint64_t>> values;

    void put(const std::string& name, size_t block, std::vector<uint64_t> v) { values[{name, block}] = std::move(v); }
    bool has(const std::string& name, size_t block) const { return values.count({name, block}) != 0; }
    const std::vector<uint64_t>& get(const std::string& name, size_t block) const;
};

struct PartyOutcome {
    Party party = Party::User;
    transport::PartyMetrics metrics;
    std::vector<transport::TranscriptEntry> transcript;
    std::vector<Record> records;  // one per inference
    std::vector<std::vector<uint64_t>> predictions;  // user only
};

// Party drivers: setup, then preprocessing and online for each inference.
// The user runs one inference per input vector; servers run `inferences` of them.
PartyOutcome run_user(transport::Endpoint& ep, const Options& opt, const UserView& view,
                      const std::vector<std::vector<uint64_t>>& inputs);
PartyOutcome run_server_a(transport::Endpoint& ep, const Options& opt, const GatewayModel& model, size_t inferences);
PartyOutcome run_server_remote(transport::Endpoint& ep, const Options& opt, const RemoteModel& model,
                               size_t inferences);

struct SessionResult {
    std::vector<std::vector<uint64_t>> predictions;
    transport::MetricsReport report;
    std::array<PartyOutcome, transport::kNumParties> parties;
    nn::ModelSplit split;

    const PartyOutcome& party(Party p) const { return parties[static_cast<size_t>(p)]; }
};

// Validates options against the model: l <= L, delphi2 needs l = L, test switches
// need the insecure build.
void check_options(const Options& opt, const nn::Model& model);

// All four parties as threads, one per endpoint. The endpoints' ids must match
// their slots.
SessionResult run_session(const Options& opt, std::shared_ptr<const nn::Model> model,
                          const std::vector<std::vector<uint64_t>>& inputs,
                          const std::array<transport::Endpoint*, transport::kNumParties>& eps);
// One party of a distributed session. Every party derives the same weight split from
// Options::seed; the user reads only the shapes of its view.
PartyOutcome run_party(transport::Endpoint& ep, const Options& opt, std::shared_ptr<const nn::Model> model,
                       const std::vector<std::vector<uint64_t>>& inputs, size_t inferences);
// run_session over the in-process network.
SessionResult run_local(const Options& opt, std::shared_ptr<const nn::Model> model,
                        const std::vector<std::vector<uint64_t>>& inputs);

// Masks as the protocol draws and applies them, exposed for the uniformity audit.
std::vector<uint64_t> draw_mask(Prng& rng, uint64_t p, size_t n);
std::vector<uint64_t> apply_mask(std::span<const uint64_t> x, std::span<const uint64_t> r, uint64_t p);

}  // namespace seco::protocol
