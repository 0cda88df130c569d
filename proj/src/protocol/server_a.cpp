#include "internal.hpp"
#include "seco/bfv/serialize.hpp"
#include "seco/common/error.hpp"
#include "seco/mphe/mphe.hpp"
#include "seco/protocol/parties.hpp"

namespace seco::protocol {

using namespace detail;

struct GatewayParty::Impl : PartyBase {
    Impl(transport::Endpoint& ep, const Options& opt, const GatewayModel& m)
        : PartyBase(ep, opt), m_(m), l_(m.f.size()), L_(m.shapes.size()) {
        if (m.bias.size() != l_) throw ConfigError("gateway bias count mismatch");
        for (size_t i = 0; i < l_; ++i)
            gw_ops_.emplace_back(ctx_, m.f[i], bfv::LinearOperator::Mode::Rotations);
        remote_ops_.resize(L_ + 1);
        for (size_t i = l_ + 1; i <= L_; ++i)
            remote_ops_[i].emplace(ctx_, shape(i).rows, shape(i).cols, bfv::LinearOperator::Mode::PreRotated);
    }

    void setup();
    void preprocess();
    void online();

    struct EvaluatedLayer {
        gc::GarbledCircuit gc;
        gc::InputLabels labels;
    };
    struct ShareRecord {
        std::vector<std::vector<uint64_t>> s;   // gateway blocks: A's share of F_i r_i
        std::vector<std::vector<uint64_t>> d;   // one-time pads d_{i+1}, indexed by i
        std::vector<std::optional<gc::InputEncoding>> garbled;  // gateway circuits A garbled
        std::vector<std::vector<uint64_t>> e;   // remote blocks: (F2+F3) r - s2 - s3
        std::vector<std::vector<uint64_t>> r1;  // remote blocks from l+2: A's part of r
        std::vector<std::optional<EvaluatedLayer>> evaluated;  // DELPHI-3 remote circuits
    };

    const BlockShape& shape(size_t i) const { return m_.shapes[i - 1]; }
    bool remote() const { return l_ < L_; }
    bool delphi3() const { return opt_.mode == Mode::Delphi3; }
    bool gateway_relu() const { return l_ > 0 && shape(1).relu; }
    void user_keys();
    std::vector<uint64_t> remote_linear(size_t i, std::vector<bfv::Ciphertext> masks, bool servers_contribute);
    void remote_gc(size_t i, ShareRecord& m);

    const GatewayModel& m_;
    size_t l_, L_;
    std::vector<bfv::LinearOperator> gw_ops_;
    std::vector<std::optional<bfv::LinearOperator>> remote_ops_;
    bool setup_done_ = false, have_user_ = false;
    bfv::KeyPair kp_;
    bfv::PublicKey cpk_, user_pk_;
    bfv::GaloisKeys user_gk_;
    std::unique_ptr<gc::OtSender> ot_user_;
    std::unique_ptr<gc::OtReceiver> ot_b_;
    std::optional<ShareRecord> record_;
};

void GatewayParty::Impl::setup() {
    if (setup_done_ || !remote()) return;
    at(Phase::Setup, kNoBlock);
    Prng::Key seed;
    rng_.fill(seed.data(), seed.size());
    ep_.send(Party::B, kind(MsgKind::CommonSeed), seed);
    ep_.send(Party::C, kind(MsgKind::CommonSeed), seed);
    kp_ = mphe::mphe_keygen(ctx_, mphe::common_p1(ctx_, seed), rng_);
    std::vector<bfv::PublicKey> pks{kp_.pk};
    for (Party p : {Party::B, Party::C}) {
        auto msg = ep_.recv(p, kind(MsgKind::PartyPublicKey));
        ByteReader r(msg);
        pks.push_back(bfv::read_public_key(r, ctx_));
        r.expect_done();
    }
    cpk_ = mphe::dkeygen(pks).as_public_key();
    ByteWriter w;
    bfv::write_public_key(w, cpk_);
    ep_.send(Party::B, kind(MsgKind::CommonPublicKey), w.bytes());
    ep_.send(Party::C, kind(MsgKind::CommonPublicKey), w.bytes());
    ot_b_ = ot_receiver(Party::B);
    setup_done_ = true;
}

void GatewayParty::Impl::user_keys() {
    at(Phase::Preprocess, kNoBlock);
    auto msg = ep_.recv(Party::User, kind(MsgKind::UserPublicKey));
    {
        ByteReader r(msg);
        user_pk_ = bfv::read_public_key(r, ctx_);
        r.expect_done();
    }
    if (l_ > 0) {
        auto g = ep_.recv(Party::User, kind(MsgKind::UserGaloisKeys));
        ByteReader r(g);
        user_gk_ = bfv::read_galois_keys(r, ctx_);
        r.expect_done();
    }
    if (remote()) {
        ByteWriter w;
        bfv::write_public_key(w, cpk_);
        ep_.send(Party::User, kind(MsgKind::CommonPublicKey), w.bytes());
        ep_.send(Party::B, kind(MsgKind::UserPublicKey), msg);
        ep_.send(Party::C, kind(MsgKind::UserPublicKey), msg);
    }
    if (gateway_relu()) ot_user_ = ot_sender(Party::User);
    have_user_ = true;
}

// Remote linear preprocessing, A's side: sum the encrypted mask contributions, let B
// and C apply their weight shares, decrypt the sum jointly. Returns E_i.
std::vector<uint64_t> GatewayParty::Impl::remote_linear(size_t i, std::vector<bfv::Ciphertext> masks,
                                                        bool servers_contribute) {
    const auto& op = *remote_ops_[i];
    const size_t count = op.packed_inputs();
    if (servers_contribute)
        for (Party p : {Party::B, Party::C}) {
            auto cts = recv_cts(p, MsgKind::MaskCiphertext, count);
            for (size_t k = 0; k < count; ++k) bfv::add_inplace(masks[k], cts[k]);
        }
    send_cts(Party::B, MsgKind::MaskCiphertextSum, masks);
    send_cts(Party::C, MsgKind::MaskCiphertextSum, masks);
    masks.clear();

    const size_t groups = op.layout().out_groups;
    auto sum = recv_cts(Party::B, MsgKind::LinearResult, groups);
    auto other = recv_cts(Party::C, MsgKind::LinearResult, groups);
    for (size_t g = 0; g < groups; ++g) bfv::add_inplace(sum[g], other[g]);
    auto pts = mphe::disdec_lead(ep_, sum, kp_.sk, rng_);
    std::vector<std::vector<uint64_t>> slots;
    for (const auto& pt : pts) slots.push_back(enc_.decode(pt));
    auto e = op.gather(slots);
    if (corrupt(i)) perturb(e);
    record("E", i, e);
    return e;
}

void GatewayParty::Impl::remote_gc(size_t i, ShareRecord& m) {
    const auto& s = shape(i);
    const auto& c = relu_3pc(s.shift);
    const size_t half = size_t(s.rows) * bitwidth_;
    at(Phase::Preprocess, i);
    std::optional<EvaluatedLayer> ev;
    if (delphi3()) {
        auto tables = ep_.recv(Party::B, kind(MsgKind::GarbledTables));
        ByteReader r(tables);
        ev.emplace(EvaluatedLayer{gc::read_garbled(r, c), gc::InputLabels(c, s.rows)});
        r.expect_done();
        if (ev->gc.instances != s.rows) throw ProtocolError("garbled circuit instance count mismatch");
    }
    auto choices = word_bits(m.e[i], bitwidth_);
    append(choices, word_bits(m.r1[i + 1], bitwidth_));
    auto got = ot_b_->receive(ep_, choices);
    if (!delphi3()) {
        send_labels(Party::C, MsgKind::ForwardedLabels, got);
        return;
    }
    ev->labels.set(c.group(kUserShare), std::span(got).first(half));
    ev->labels.set(c.group(kNextMask), std::span(got).subspan(half));
    ev->labels.set(c.group(kNextMaskB), recv_labels(Party::B, MsgKind::GarblerLabels, half));
    ev->labels.set(c.group(kNextMaskC), recv_labels(Party::C, MsgKind::ForwardedLabels, half));
    m.evaluated[i] = std::move(ev);
}

void GatewayParty::Impl::preprocess() {
    setup();
    ShareRecord m;
    m.s.resize(L_ + 1);
    m.d.resize(L_ + 1);
    m.garbled.resize(L_ + 1);
    m.e.resize(L_ + 1);
    m.r1.resize(L_ + 2);
    m.evaluated.resize(L_ + 1);

    // Remote linear layers past the transition need no user and run first.
    for (size_t i = l_ + 2; i <= L_; ++i) {
        at(Phase::Preprocess, i);
        m.r1[i] = mask(shape(i).cols);
        record("r1", i, m.r1[i]);
        m.e[i] = remote_linear(i, encrypt_packed(*remote_ops_[i], m.r1[i], cpk_), true);
    }

    if (!have_user_) user_keys();

    for (size_t i = 1; i <= l_; ++i) {
        at(Phase::Preprocess, i);
        const auto& op = gw_ops_[i - 1];
        auto cts = recv_cts(Party::User, MsgKind::MaskCiphertext, op.layout().in_blocks);
        auto res = op.apply(cts, user_gk_);
        auto masks = slot_masks(res.size());
        for (size_t g = 0; g < res.size(); ++g) res[g] = bfv::sub_plain(res[g], enc_.encode(masks[g]));
        send_cts(Party::User, MsgKind::LinearResult, res);
        m.s[i] = op.gather(masks);
        record("s", i, m.s[i]);
    }

    if (remote()) {
        at(Phase::Preprocess, l_ + 1);
        auto cts = recv_cts(Party::User, MsgKind::MaskCiphertext, remote_ops_[l_ + 1]->packed_inputs());
        m.e[l_ + 1] = remote_linear(l_ + 1, std::move(cts), false);
    }

    for (size_t i = 1; i <= l_; ++i) {
        const auto& s = shape(i);
        if (!s.relu) continue;
        at(Phase::Preprocess, i);
        const auto& c = relu_2pc(s.shift);
        auto g = gc::garble(c, s.rows, rng_);
        ByteWriter w;
        gc::write_garbled(w, c, g.gc);
        ep_.send(Party::User, kind(MsgKind::GarbledTables), w.bytes());
        auto pairs = g.encoding.label_pairs(c.group(kUserShare));
        append(pairs, g.encoding.label_pairs(c.group(kNextMask)));
        ot_user_->send(ep_, pairs);
        m.d[i] = mask(s.rows);
        record("d", i + 1, m.d[i]);
        send_labels(Party::User, MsgKind::GarblerLabels, g.encoding.encode(c.group(kOneTimePad), m.d[i]));
        record("garbler_labels", i, {2 * size_t(g.encoding.num_inputs) * s.rows});
        m.garbled[i] = std::move(g.encoding);
    }

    for (size_t i = l_ + 1; i < L_; ++i) remote_gc(i, m);
    record_ = std::move(m);
}

void GatewayParty::Impl::online() {
    if (!record_) throw ProtocolError("server A: preprocessed shares already consumed; preprocess before the next inference");
    ShareRecord m = std::move(*record_);
    record_.reset();

    at(Phase::Online, 1);
    auto masked = recv_values(Party::User, MsgKind::MaskedInput, shape(1).cols);

    for (size_t i = 1; i <= l_; ++i) {
        const auto& s = shape(i);
        at(Phase::Online, i);
        record("masked", i, masked);
        auto share = affine(m_.f[i - 1], masked, m.s[i], m_.bias[i - 1]);
        if (!s.relu) {
            at(Phase::Online, kNoBlock);
            send_values(Party::User, MsgKind::PlainOutput, share);
            return;
        }
        const auto& c = relu_2pc(s.shift);
        send_labels(Party::User, MsgKind::EvaluatorLabels, m.garbled[i]->encode(c.group(kGatewayShare), share));
        masked = add(recv_values(Party::User, MsgKind::MaskedOutput, s.rows), m.d[i]);
    }

    // Transition: x_{l+1} - r_{l+1} to both remote servers.
    at(Phase::Online, l_ + 1);
    record("masked", l_ + 1, masked);
    send_values(Party::B, MsgKind::TransitionInput, masked);
    send_values(Party::C, MsgKind::TransitionInput, masked);

    if (delphi3())
        for (size_t i = l_ + 1; i < L_; ++i) {
            const auto& s = shape(i);
            const auto& c = relu_3pc(s.shift);
            const size_t half = size_t(s.rows) * bitwidth_;
            at(Phase::Online, i);
            auto& ev = *m.evaluated[i];
            ev.labels.set(c.group(kShareB), recv_labels(Party::B, MsgKind::EvaluatorLabels, half));
            ev.labels.set(c.group(kShareC), recv_labels(Party::C, MsgKind::ForwardedLabels, half));
            masked = gc::evaluate_words(c, ev.gc, ev.labels);
            record("masked", i + 1, masked);
            send_values(Party::B, MsgKind::MaskedOutput, masked);
            send_values(Party::C, MsgKind::MaskedOutput, masked);
        }

    // Output: B's and C's shares arrive under the user's key; A adds its own.
    at(Phase::Online, kNoBlock);
    const size_t n = ctx_->n(), rows = shape(L_).rows, cts = (rows + n - 1) / n;
    auto out = recv_cts(Party::B, MsgKind::OutputCiphertext, cts);
    auto other = recv_cts(Party::C, MsgKind::OutputCiphertext, cts);
    const auto& e = m.e[L_];
    for (size_t k = 0; k < cts; ++k) {
        bfv::add_inplace(out[k], other[k]);
        const size_t lo = k * n, hi = std::min(rows, lo + n);
        out[k] = bfv::add_plain(out[k], enc_.encode(std::span(e).subspan(lo, hi - lo)));
    }
    send_cts(Party::User, MsgKind::OutputCiphertext, out);
}

GatewayParty::GatewayParty(transport::Endpoint& ep, const Options& opt, const GatewayModel& model)
    : impl_(std::make_unique<Impl>(ep, opt, model)) {}
GatewayParty::~GatewayParty() = default;
void GatewayParty::setup() { impl_->setup(); }
void GatewayParty::preprocess() { impl_->preprocess(); }
void GatewayParty::online() { impl_->online(); }
Record GatewayParty::take_record() { return impl_->take_record(); }

PartyOutcome run_server_a(transport::Endpoint& ep, const Options& opt, const GatewayModel& model, size_t inferences) {
    GatewayParty a(ep, opt, model);
    PartyOutcome out;
    out.party = Party::A;
    a.setup();
    for (size_t k = 0; k < inferences; ++k) {
        a.preprocess();
        a.online();
        if (opt.record) out.records.push_back(a.take_record());
    }
    out.metrics = ep.finish();
    out.transcript = ep.transcript();
    return out;
}

}  // namespace seco::protocol
