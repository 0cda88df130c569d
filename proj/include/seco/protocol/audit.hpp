#pragma once

#include <optional>
#include <string>
#include <vector>

#include "seco/protocol/protocol.hpp"

// Checks over a recorded session (run_local with Options::record set). Each check
// walks every inference and returns the list of violations; empty means it passed.
namespace seco::protocol {

struct AuditReport {
    std::vector<std::string> failures;

    bool ok() const { return failures.empty(); }
    void fail(std::string why) { failures.push_back(std::move(why)); }
    void merge(const AuditReport& o) { failures.insert(failures.end(), o.failures.begin(), o.failures.end()); }
};

// Share recombination per layer class:
//   gateway i <= l:      user (F r - s) + A s                 = F_i r_i
//   transition l+1:      A E + B s2 + C s3                    = (F2 + F3) r_{l+1}, r from the user
//   remote i >= l+2:     A E + B s2 + C s3                    = (F2 + F3) (r1 + r2 + r3)
AuditReport audit_shares(const SessionResult& r);

// A never holds x_i for i > l in the clear: its masked values differ from x_i and
// unmask only with the full r_i, and no frame A sees carries x_i or the prediction.
AuditReport audit_gateway_view(const SessionResult& r, const std::vector<std::vector<uint64_t>>& inputs);
// B and C hold weight shares only: neither share equals the block matrix, and no
// frame they see carries a row of it or of the other server's share.
AuditReport audit_remote_view(const SessionResult& r);
// Every frame on the user's channels is tagged with block 0 (keys, output) or a
// block <= l+1, and the user's records stop at l+1.
AuditReport audit_user_view(const SessionResult& r);

// Block whose output first disagrees with the plaintext trace for inference k,
// rebuilt from the recorded masked values and masks. nullopt when all agree.
std::optional<size_t> first_divergent_block(const SessionResult& r, const std::vector<std::vector<uint64_t>>& inputs,
                                            size_t k);

// Online messages sent or received by A on blocks l+1..L, not counting the masked
// input that enters them (the user's at l = 0, the transition payload A forwards).
// Needs a recorded transcript.
size_t gateway_remote_messages(const SessionResult& r);

}  // namespace seco::protocol
