#include "internal.hpp"
#include "seco/bfv/serialize.hpp"
#include "seco/common/error.hpp"
#include "seco/protocol/parties.hpp"

namespace seco::protocol {

using namespace detail;

struct UserParty::Impl : PartyBase {
    Impl(transport::Endpoint& ep, const Options& opt, const UserView& v) : PartyBase(ep, opt), v_(v), l_(v.gateway.size()) {
        for (const auto& s : v_.gateway)
            gw_ops_.emplace_back(ctx_, s.rows, s.cols, bfv::LinearOperator::Mode::Rotations);
        if (v_.transition)
            tr_op_.emplace(ctx_, v_.transition->rows, v_.transition->cols, bfv::LinearOperator::Mode::PreRotated);
    }

    void preprocess();
    std::vector<uint64_t> online(std::span<const uint64_t> x);

    struct GarbledLayer {
        gc::GarbledCircuit gc;
        gc::InputLabels labels;
    };
    // One inference worth of preprocessed material; consumed by online().
    struct ShareRecord {
        std::vector<std::vector<uint64_t>> r;      // r[i], blocks 1..l+1
        std::vector<std::vector<uint64_t>> share;  // F_i r_i - s_i, blocks 1..l
        std::vector<std::optional<GarbledLayer>> gcs;
    };

    bool gateway_relu() const {
        for (const auto& s : v_.gateway)
            if (s.relu) return true;
        return false;
    }
    void keys();
    size_t cols(size_t i) const { return i <= l_ ? v_.gateway[i - 1].cols : v_.transition->cols; }

    const UserView& v_;
    size_t l_;
    std::vector<bfv::LinearOperator> gw_ops_;
    std::optional<bfv::LinearOperator> tr_op_;
    bool have_keys_ = false;
    bfv::KeyPair kp_;
    bfv::PublicKey cpk_;
    std::unique_ptr<gc::OtReceiver> ot_;
    std::optional<ShareRecord> record_;
};

void UserParty::Impl::keys() {
    at(Phase::Preprocess, kNoBlock);
    kp_ = bfv::keygen(ctx_, rng_);
    ByteWriter w;
    bfv::write_public_key(w, kp_.pk);
    ep_.send(Party::A, kind(MsgKind::UserPublicKey), w.bytes());
    if (l_ > 0) {
        ByteWriter g;
        bfv::write_galois_keys(g, bfv::make_galois_keys(kp_.sk, rng_));
        ep_.send(Party::A, kind(MsgKind::UserGaloisKeys), g.bytes());
    }
    if (v_.transition) {
        auto msg = ep_.recv(Party::A, kind(MsgKind::CommonPublicKey));
        ByteReader r(msg);
        cpk_ = bfv::read_public_key(r, ctx_);
        r.expect_done();
    }
    if (gateway_relu()) ot_ = ot_receiver(Party::A);
    have_keys_ = true;
}

void UserParty::Impl::preprocess() {
    if (!have_keys_) keys();
    ShareRecord m;
    const size_t last = v_.transition ? l_ + 1 : l_;
    m.r.resize(last + 1);
    m.share.resize(l_ + 1);
    m.gcs.resize(l_ + 1);
    for (size_t i = 1; i <= last; ++i) {
        m.r[i] = mask(cols(i));
        record("r", i, m.r[i]);
    }

    // Gateway linear layers: two additive shares of F_i r_i.
    for (size_t i = 1; i <= l_; ++i) {
        at(Phase::Preprocess, i);
        const auto& op = gw_ops_[i - 1];
        send_cts(Party::A, MsgKind::MaskCiphertext, encrypt_blocks(op, m.r[i], kp_.pk));
        auto res = recv_cts(Party::A, MsgKind::LinearResult, op.layout().out_groups);
        m.share[i] = op.gather(decrypt_slots(kp_.sk, res));
        if (corrupt(i)) perturb(m.share[i]);
        record("share", i, m.share[i]);
    }

    // Transition layer: the user alone supplies r_{l+1}, encrypted under the common key.
    if (v_.transition) {
        at(Phase::Preprocess, l_ + 1);
        send_cts(Party::A, MsgKind::MaskCiphertext, encrypt_packed(*tr_op_, m.r[l_ + 1], cpk_));
    }

    // Gateway ReLU circuits, garbled by A.
    for (size_t i = 1; i <= l_; ++i) {
        const auto& s = v_.gateway[i - 1];
        if (!s.relu) continue;
        at(Phase::Preprocess, i);
        const auto& c = relu_2pc(s.shift);
        auto tables = ep_.recv(Party::A, kind(MsgKind::GarbledTables));
        ByteReader r(tables);
        GarbledLayer g{gc::read_garbled(r, c), gc::InputLabels(c, s.rows)};
        r.expect_done();
        if (g.gc.instances != s.rows) throw ProtocolError("garbled circuit instance count mismatch");

        auto choices = word_bits(m.share[i], bitwidth_);
        append(choices, word_bits(m.r[i + 1], bitwidth_));
        auto got = ot_->receive(ep_, choices);
        const size_t half = size_t(s.rows) * bitwidth_;
        g.labels.set(c.group(kUserShare), std::span(got).first(half));
        g.labels.set(c.group(kNextMask), std::span(got).subspan(half));
        g.labels.set(c.group(kOneTimePad), recv_labels(Party::A, MsgKind::GarblerLabels, half));
        record("evaluator_labels", i, {3 * half});
        m.gcs[i].emplace(std::move(g));
    }
    record_ = std::move(m);
}

std::vector<uint64_t> UserParty::Impl::online(std::span<const uint64_t> x) {
    if (!record_) throw ProtocolError("user: preprocessed shares already consumed; preprocess before the next inference");
    ShareRecord m = std::move(*record_);
    record_.reset();
    if (x.size() != v_.input_size) throw ConfigError("input length does not match the model");

    at(Phase::Online, 1);
    send_values(Party::A, MsgKind::MaskedInput, apply_mask(x, m.r[1], p_));

    for (size_t i = 1; i <= l_; ++i) {
        const auto& s = v_.gateway[i - 1];
        if (!s.relu) break;  // final block, answered in the output step
        at(Phase::Online, i);
        auto& g = *m.gcs[i];
        const auto& c = relu_2pc(s.shift);
        g.labels.set(c.group(kGatewayShare),
                     recv_labels(Party::A, MsgKind::EvaluatorLabels, size_t(s.rows) * bitwidth_));
        auto out = gc::evaluate_words(c, g.gc, g.labels);
        record("masked_pad", i + 1, out);
        send_values(Party::A, MsgKind::MaskedOutput, out);
    }

    at(Phase::Online, kNoBlock);
    std::vector<uint64_t> y;
    if (!v_.transition) {
        auto plain = recv_values(Party::A, MsgKind::PlainOutput, v_.output_size);
        y = add(plain, m.share[l_]);
    } else {
        const size_t n = ctx_->n();
        auto cts = recv_cts(Party::A, MsgKind::OutputCiphertext, (v_.output_size + n - 1) / n);
        for (auto& slots : decrypt_slots(kp_.sk, cts)) y.insert(y.end(), slots.begin(), slots.end());
        y.resize(v_.output_size);
    }
    record("y", kNoBlock, y);
    return y;
}

UserParty::UserParty(transport::Endpoint& ep, const Options& opt, const UserView& view)
    : impl_(std::make_unique<Impl>(ep, opt, view)) {}
UserParty::~UserParty() = default;
void UserParty::preprocess() { impl_->preprocess(); }
std::vector<uint64_t> UserParty::online(std::span<const uint64_t> x) { return impl_->online(x); }
Record UserParty::take_record() { return impl_->take_record(); }

PartyOutcome run_user(transport::Endpoint& ep, const Options& opt, const UserView& view,
                      const std::vector<std::vector<uint64_t>>& inputs) {
    UserParty u(ep, opt, view);
    PartyOutcome out;
    out.party = Party::User;
    for (const auto& x : inputs) {
        u.preprocess();
        out.predictions.push_back(u.online(x));
        if (opt.record) out.records.push_back(u.take_record());
    }
    out.metrics = ep.finish();
    out.transcript = ep.transcript();
    return out;
}

}  // namespace seco::protocol
