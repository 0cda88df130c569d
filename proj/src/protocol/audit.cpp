#include "seco/protocol/audit.hpp"

#include <algorithm>

#include "seco/bfv/linop.hpp"
#include "seco/common/bytes.hpp"
#include "seco/common/msg_kind.hpp"

namespace seco::protocol {

namespace {

using Vec = std::vector<uint64_t>;

Vec add(const Vec& a, const Vec& b, uint64_t p) {
    Vec out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = (a[i] + b[i]) % p;
    return out;
}

const Record* record_of(const SessionResult& r, Party p, size_t k) {
    const auto& recs = r.party(p).records;
    return k < recs.size() ? &recs[k] : nullptr;
}

size_t inferences(const SessionResult& r) { return r.party(Party::User).records.size(); }

bool remote_present(const SessionResult& r) { return r.split.l < r.split.model->num_blocks(); }

// (F2 + F3) v for remote block i (1-based).
Vec remote_product(const SessionResult& r, size_t i, const Vec& v) {
    const auto& sh = r.split.remote[i - r.split.l - 1];
    return add(bfv::matvec(sh.f2, v, r.split.p), bfv::matvec(sh.f3, v, r.split.p), r.split.p);
}

// Full mask r_i: the user's alone at the transition, the three servers' sum beyond.
Vec full_mask(const SessionResult& r, size_t k, size_t i) {
    const size_t l = r.split.l;
    if (i <= l + 1) return record_of(r, Party::User, k)->get("r", i);
    Vec m = add(record_of(r, Party::A, k)->get("r1", i), record_of(r, Party::B, k)->get("r", i), r.split.p);
    return add(m, record_of(r, Party::C, k)->get("r", i), r.split.p);
}

std::string where(size_t k, size_t i) {
    return "inference " + std::to_string(k) + " block " + std::to_string(i);
}

std::vector<uint8_t> packed(const Vec& v, uint64_t p) {
    ByteWriter w;
    w.packed(v, packed_width(p));
    return w.bytes();
}

bool contains(const std::vector<uint8_t>& hay, const std::vector<uint8_t>& needle) {
    return !needle.empty() && std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

// Needles shorter than this could match by chance inside random payload bytes.
constexpr size_t kMinNeedle = 12;

}  // namespace

AuditReport audit_shares(const SessionResult& r) {
    AuditReport rep;
    const size_t l = r.split.l, L = r.split.model->num_blocks();
    const uint64_t p = r.split.p;
    if (inferences(r) == 0) rep.fail("no recorded inferences");
    for (size_t k = 0; k < inferences(r); ++k) {
        const Record& u = *record_of(r, Party::User, k);
        const Record& a = *record_of(r, Party::A, k);
        for (size_t i = 1; i <= l; ++i) {
            const Vec want = bfv::matvec(r.split.gateway[i - 1], u.get("r", i), p);
            if (add(u.get("share", i), a.get("s", i), p) != want)
                rep.fail("gateway shares do not recombine to F r at " + where(k, i));
        }
        if (!remote_present(r)) continue;
        const Record& b = *record_of(r, Party::B, k);
        const Record& c = *record_of(r, Party::C, k);
        for (size_t i = l + 1; i <= L; ++i) {
            const Vec want = remote_product(r, i, full_mask(r, k, i));
            const Vec got = add(add(a.get("E", i), b.get("s", i), p), c.get("s", i), p);
            if (got != want)
                rep.fail(std::string(i == l + 1 ? "transition" : "remote") +
                         " shares do not recombine to (F2+F3) r at " + where(k, i));
        }
    }
    return rep;
}

AuditReport audit_gateway_view(const SessionResult& r, const std::vector<std::vector<uint64_t>>& inputs) {
    AuditReport rep;
    const size_t l = r.split.l, L = r.split.model->num_blocks();
    const uint64_t p = r.split.p;
    if (!remote_present(r)) return rep;
    const auto& transcript = r.party(Party::A).transcript;

    for (size_t k = 0; k < inferences(r) && k < inputs.size(); ++k) {
        const auto trace = nn::plaintext_trace(*r.split.model, p, inputs[k]);
        const Record& a = *record_of(r, Party::A, k);
        std::vector<std::vector<uint8_t>> secrets;
        for (size_t i = l + 1; i <= L + 1; ++i) {
            const Vec& x = trace[i - 1];  // trace[L] is the prediction
            if (i <= L && a.has("masked", i)) {
                const Vec& m = a.get("masked", i);
                if (m == x) rep.fail("A holds x in the clear at " + where(k, i));
                Vec unmasked = add(m, full_mask(r, k, i), p);
                if (unmasked != x) rep.fail("A's masked value is not x - r at " + where(k, i));
            }
            auto bytes = packed(x, p);
            if (bytes.size() >= kMinNeedle) secrets.push_back(std::move(bytes));
        }
        for (const auto& e : transcript) {
            if (e.kind == kind(MsgKind::PlainOutput))
                rep.fail("A exchanged a plaintext output with remote blocks present");
            for (const auto& s : secrets)
                if (contains(e.payload, s)) rep.fail("a frame seen by A carries an unmasked activation");
        }
    }
    return rep;
}

AuditReport audit_remote_view(const SessionResult& r) {
    AuditReport rep;
    const size_t l = r.split.l, L = r.split.model->num_blocks();
    const uint64_t p = r.split.p;
    for (size_t i = l + 1; i <= L; ++i) {
        const auto F = r.split.model->blocks[i - 1].matrix(p);
        const auto& sh = r.split.remote[i - l - 1];
        if (sh.f2.data == F.data) rep.fail("B holds the full matrix of block " + std::to_string(i));
        if (sh.f3.data == F.data) rep.fail("C holds the full matrix of block " + std::to_string(i));
        if (add(sh.f2.data, sh.f3.data, p) != F.data)
            rep.fail("weight shares of block " + std::to_string(i) + " do not sum to the matrix");

        auto row = [&](const bfv::ModMatrix& m) {
            return packed(Vec(m.data.begin(), m.data.begin() + static_cast<long>(m.cols)), p);
        };
        const auto full = row(F), b_row = row(sh.f2), c_row = row(sh.f3);
        if (full.size() < kMinNeedle) continue;
        for (const auto& e : r.party(Party::B).transcript)
            if (contains(e.payload, full) || contains(e.payload, c_row))
                rep.fail("a frame seen by B carries weights of block " + std::to_string(i));
        for (const auto& e : r.party(Party::C).transcript)
            if (contains(e.payload, full) || contains(e.payload, b_row))
                rep.fail("a frame seen by C carries weights of block " + std::to_string(i));
    }
    return rep;
}

AuditReport audit_user_view(const SessionResult& r) {
    AuditReport rep;
    const size_t l = r.split.l, L = r.split.model->num_blocks();
    const size_t limit = l < L ? l + 1 : l;
    for (const auto& e : r.party(Party::User).transcript)
        if (e.layer > limit)
            rep.fail("user channel carries a frame tagged with block " + std::to_string(e.layer) + " (limit " +
                     std::to_string(limit) + ")");
    for (const auto& rec : r.party(Party::User).records)
        for (const auto& [key, v] : rec.values)
            if (key.second > limit) rep.fail("user record '" + key.first + "' refers to block " + std::to_string(key.second));
    const auto view = deploy(r.split).user;
    if (view.gateway.size() + (view.transition ? 1 : 0) > limit)
        rep.fail("user view holds shapes beyond block " + std::to_string(limit));
    return rep;
}

std::optional<size_t> first_divergent_block(const SessionResult& r, const std::vector<std::vector<uint64_t>>& inputs,
                                            size_t k) {
    const size_t l = r.split.l, L = r.split.model->num_blocks();
    const uint64_t p = r.split.p;
    const auto trace = nn::plaintext_trace(*r.split.model, p, inputs.at(k));
    const Record& a = *record_of(r, Party::A, k);
    for (size_t i = 2; i <= L; ++i) {
        const Vec& masked = i <= l + 1 ? a.get("masked", i) : record_of(r, Party::B, k)->get("masked", i);
        if (add(masked, full_mask(r, k, i), p) != trace[i - 1]) return i - 1;
    }
    if (record_of(r, Party::User, k)->get("y", 0) != trace[L]) return L;
    return std::nullopt;
}

size_t gateway_remote_messages(const SessionResult& r) {
    size_t n = 0;
    for (const auto& e : r.party(Party::A).transcript)
        if (e.phase == transport::Phase::Online && e.layer > r.split.l && e.kind != kind(MsgKind::TransitionInput) &&
            e.kind != kind(MsgKind::MaskedInput))
            ++n;
    return n;
}

}  // namespace seco::protocol
