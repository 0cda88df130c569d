#include "internal.hpp"
#include "seco/bfv/serialize.hpp"
#include "seco/common/error.hpp"
#include "seco/mphe/mphe.hpp"
#include "seco/protocol/parties.hpp"

namespace seco::protocol {

using namespace detail;

struct RemoteParty::Impl : PartyBase {
    Impl(transport::Endpoint& ep, const Options& opt, const RemoteModel& m)
        : PartyBase(ep, opt), m_(m), L_(m.shapes.size()), l_(L_ - m.f.size()) {
        if (ep.self() != Party::B && ep.self() != Party::C) throw ConfigError("remote servers are B and C");
        if (m.bias.size() != m.f.size()) throw ConfigError("remote bias count mismatch");
        ops_.resize(L_ + 1);
        for (size_t i = l_ + 1; i <= L_; ++i)
            ops_[i].emplace(ctx_, m.f[i - l_ - 1], bfv::LinearOperator::Mode::PreRotated);
    }

    void setup();
    void preprocess();
    void online();

    struct EvaluatedLayer {
        gc::GarbledCircuit gc;
        gc::InputLabels labels;
    };
    struct ShareRecord {
        std::vector<std::vector<uint64_t>> r;  // this server's part of r_i, blocks l+2..L
        std::vector<std::vector<uint64_t>> s;  // this server's s_i, blocks l+1..L
        std::vector<std::optional<gc::InputEncoding>> garbled;  // B
        std::vector<std::optional<EvaluatedLayer>> evaluated;   // C in SECO mode
    };

    bool is_b() const { return ep_.self() == Party::B; }
    bool delphi3() const { return opt_.mode == Mode::Delphi3; }
    Party evaluator() const { return delphi3() ? Party::A : Party::C; }
    const BlockShape& shape(size_t i) const { return m_.shapes[i - 1]; }
    const bfv::ModMatrix& weights(size_t i) const { return m_.f[i - l_ - 1]; }
    const std::vector<uint64_t>& bias(size_t i) const { return m_.bias[i - l_ - 1]; }
    std::vector<uint64_t> linear(size_t i, const std::vector<bfv::Ciphertext>& sums);
    void garble_layer(size_t i, ShareRecord& m);
    void receive_layer(size_t i, ShareRecord& m);

    const RemoteModel& m_;
    size_t L_, l_;
    std::vector<std::optional<bfv::LinearOperator>> ops_;
    bool setup_done_ = false, have_user_ = false;
    bfv::KeyPair kp_;
    bfv::PublicKey cpk_, user_pk_;
    std::unique_ptr<gc::OtSender> ot_a_, ot_c_;  // B
    std::unique_ptr<gc::OtReceiver> ot_b_;       // C
    std::optional<ShareRecord> record_;
};

void RemoteParty::Impl::setup() {
    if (setup_done_ || l_ == L_) return;
    at(Phase::Setup, kNoBlock);
    auto msg = ep_.recv(Party::A, kind(MsgKind::CommonSeed));
    if (msg.size() != sizeof(Prng::Key)) throw ProtocolError("bad common seed");
    Prng::Key seed;
    std::copy(msg.begin(), msg.end(), seed.begin());
    kp_ = mphe::mphe_keygen(ctx_, mphe::common_p1(ctx_, seed), rng_);
    ByteWriter w;
    bfv::write_public_key(w, kp_.pk);
    ep_.send(Party::A, kind(MsgKind::PartyPublicKey), w.bytes());
    auto cpk = ep_.recv(Party::A, kind(MsgKind::CommonPublicKey));
    ByteReader r(cpk);
    cpk_ = bfv::read_public_key(r, ctx_);
    r.expect_done();
    if (is_b()) {
        ot_a_ = ot_sender(Party::A);
        ot_c_ = ot_sender(Party::C);
    } else {
        ot_b_ = ot_receiver(Party::B);
    }
    setup_done_ = true;
}

// Applies this server's weight share to the summed encrypted mask and returns the
// share s_i it subtracted.
std::vector<uint64_t> RemoteParty::Impl::linear(size_t i, const std::vector<bfv::Ciphertext>& sums) {
    const auto& op = *ops_[i];
    auto res = op.apply_prerotated(sums);
    auto masks = slot_masks(res.size());
    for (size_t g = 0; g < res.size(); ++g) res[g] = bfv::sub_plain(res[g], enc_.encode(masks[g]));
    send_cts(Party::A, MsgKind::LinearResult, res);
    mphe::disdec_follow(ep_, kp_.sk, rng_);
    auto s = op.gather(masks);
    record("s", i, s);
    return s;
}

void RemoteParty::Impl::garble_layer(size_t i, ShareRecord& m) {
    const auto& s = shape(i);
    const auto& c = relu_3pc(s.shift);
    at(Phase::Preprocess, i);
    auto g = gc::garble(c, s.rows, rng_);
    ByteWriter w;
    gc::write_garbled(w, c, g.gc);
    ep_.send(evaluator(), kind(MsgKind::GarbledTables), w.bytes());
    auto pairs = g.encoding.label_pairs(c.group(kUserShare));
    append(pairs, g.encoding.label_pairs(c.group(kNextMask)));
    ot_a_->send(ep_, pairs);
    send_labels(evaluator(), MsgKind::GarblerLabels, g.encoding.encode(c.group(kNextMaskB), m.r[i + 1]));
    ot_c_->send(ep_, g.encoding.label_pairs(c.group(kNextMaskC)));
    record("garbler_labels", i, {2 * size_t(g.encoding.num_inputs) * s.rows});
    m.garbled[i] = std::move(g.encoding);
}

void RemoteParty::Impl::receive_layer(size_t i, ShareRecord& m) {
    const auto& s = shape(i);
    const auto& c = relu_3pc(s.shift);
    const size_t half = size_t(s.rows) * bitwidth_;
    at(Phase::Preprocess, i);
    if (delphi3()) {
        send_labels(Party::A, MsgKind::ForwardedLabels, ot_b_->receive(ep_, word_bits(m.r[i + 1], bitwidth_)));
        return;
    }
    auto tables = ep_.recv(Party::B, kind(MsgKind::GarbledTables));
    ByteReader r(tables);
    EvaluatedLayer ev{gc::read_garbled(r, c), gc::InputLabels(c, s.rows)};
    r.expect_done();
    if (ev.gc.instances != s.rows) throw ProtocolError("garbled circuit instance count mismatch");
    auto from_a = recv_labels(Party::A, MsgKind::ForwardedLabels, 2 * half);
    ev.labels.set(c.group(kUserShare), std::span(from_a).first(half));
    ev.labels.set(c.group(kNextMask), std::span(from_a).subspan(half));
    ev.labels.set(c.group(kNextMaskB), recv_labels(Party::B, MsgKind::GarblerLabels, half));
    ev.labels.set(c.group(kNextMaskC), ot_b_->receive(ep_, word_bits(m.r[i + 1], bitwidth_)));
    record("evaluator_labels", i, {4 * half});
    m.evaluated[i] = std::move(ev);
}

void RemoteParty::Impl::preprocess() {
    if (l_ == L_) return;
    setup();
    ShareRecord m;
    m.r.resize(L_ + 2);
    m.s.resize(L_ + 1);
    m.garbled.resize(L_ + 1);
    m.evaluated.resize(L_ + 1);

    for (size_t i = l_ + 2; i <= L_; ++i) {
        at(Phase::Preprocess, i);
        m.r[i] = mask(shape(i).cols);
        record("r", i, m.r[i]);
        send_cts(Party::A, MsgKind::MaskCiphertext, encrypt_packed(*ops_[i], m.r[i], cpk_));
        auto sums = recv_cts(Party::A, MsgKind::MaskCiphertextSum, ops_[i]->packed_inputs());
        m.s[i] = linear(i, sums);
    }

    if (!have_user_) {
        at(Phase::Preprocess, kNoBlock);
        auto msg = ep_.recv(Party::A, kind(MsgKind::UserPublicKey));
        ByteReader r(msg);
        user_pk_ = bfv::read_public_key(r, ctx_);
        r.expect_done();
        have_user_ = true;
    }

    at(Phase::Preprocess, l_ + 1);
    m.s[l_ + 1] = linear(l_ + 1, recv_cts(Party::A, MsgKind::MaskCiphertextSum, ops_[l_ + 1]->packed_inputs()));

    for (size_t i = l_ + 1; i < L_; ++i) {
        if (is_b())
            garble_layer(i, m);
        else
            receive_layer(i, m);
    }
    record_ = std::move(m);
}

void RemoteParty::Impl::online() {
    if (l_ == L_) return;
    if (!record_)
        throw ProtocolError(std::string("server ") + transport::party_name(ep_.self()) +
                            ": preprocessed shares already consumed; preprocess before the next inference");
    ShareRecord m = std::move(*record_);
    record_.reset();

    at(Phase::Online, l_ + 1);
    auto masked = recv_values(Party::A, MsgKind::TransitionInput, shape(l_ + 1).cols);

    for (size_t i = l_ + 1; i < L_; ++i) {
        const auto& s = shape(i);
        const auto& c = relu_3pc(s.shift);
        const size_t half = size_t(s.rows) * bitwidth_;
        at(Phase::Online, i);
        record("masked", i, masked);
        auto share = affine(weights(i), masked, m.s[i], bias(i));
        if (is_b()) {
            send_labels(evaluator(), MsgKind::EvaluatorLabels, m.garbled[i]->encode(c.group(kShareB), share));
            ot_c_->send(ep_, m.garbled[i]->label_pairs(c.group(kShareC)));
            masked = recv_values(evaluator(), MsgKind::MaskedOutput, s.rows);
        } else if (delphi3()) {
            send_labels(Party::A, MsgKind::ForwardedLabels, ot_b_->receive(ep_, word_bits(share, bitwidth_)));
            masked = recv_values(Party::A, MsgKind::MaskedOutput, s.rows);
        } else {
            auto& ev = *m.evaluated[i];
            ev.labels.set(c.group(kShareB), recv_labels(Party::B, MsgKind::EvaluatorLabels, half));
            ev.labels.set(c.group(kShareC), ot_b_->receive(ep_, word_bits(share, bitwidth_)));
            masked = gc::evaluate_words(c, ev.gc, ev.labels);
            send_values(Party::B, MsgKind::MaskedOutput, masked);
        }
    }

    record("masked", L_, masked);
    at(Phase::Online, kNoBlock);
    auto y = affine(weights(L_), masked, m.s[L_], bias(L_));
    send_cts(Party::A, MsgKind::OutputCiphertext, encrypt_vector(y, user_pk_));
}

RemoteParty::RemoteParty(transport::Endpoint& ep, const Options& opt, const RemoteModel& model)
    : impl_(std::make_unique<Impl>(ep, opt, model)) {}
RemoteParty::~RemoteParty() = default;
void RemoteParty::setup() { impl_->setup(); }
void RemoteParty::preprocess() { impl_->preprocess(); }
void RemoteParty::online() { impl_->online(); }
Record RemoteParty::take_record() { return impl_->take_record(); }

PartyOutcome run_server_remote(transport::Endpoint& ep, const Options& opt, const RemoteModel& model,
                               size_t inferences) {
    RemoteParty s(ep, opt, model);
    PartyOutcome out;
    out.party = ep.self();
    s.setup();
    for (size_t k = 0; k < inferences; ++k) {
        s.preprocess();
        s.online();
        if (opt.record) out.records.push_back(s.take_record());
    }
    out.metrics = ep.finish();
    out.transcript = ep.transcript();
    return out;
}

}  // namespace seco::protocol
