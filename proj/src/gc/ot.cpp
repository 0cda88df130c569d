#include "seco/gc/ot.hpp"

#include <sodium.h>

#include <cstring>

#include "seco/common/bytes.hpp"
#include "seco/common/error.hpp"
#include "seco/common/msg_kind.hpp"

namespace seco::gc {

namespace {

constexpr size_t kPoint = crypto_core_ristretto255_BYTES;
constexpr size_t kScalar = crypto_core_ristretto255_SCALARBYTES;
constexpr size_t kKappa = 128;

using Point = std::array<uint8_t, kPoint>;
using Scalar = std::array<uint8_t, kScalar>;

void ensure_sodium() {
    static const bool ok = sodium_init() >= 0;
    if (!ok) throw Error("libsodium failed to initialise");
}

Scalar random_scalar(Prng& rng) {
    uint8_t wide[crypto_core_ristretto255_NONREDUCEDSCALARBYTES];
    rng.fill(wide, sizeof(wide));
    Scalar s;
    crypto_core_ristretto255_scalar_reduce(s.data(), wide);
    return s;
}

Point base_mul(const Scalar& s) {
    Point p;
    if (crypto_scalarmult_ristretto255_base(p.data(), s.data()) != 0) throw Error("degenerate OT scalar");
    return p;
}

Point mul(const Scalar& s, const Point& p) {
    Point out;
    if (crypto_scalarmult_ristretto255(out.data(), s.data(), p.data()) != 0)
        throw ProtocolError("OT peer sent an invalid group element");
    return out;
}

// Key for transfer i, bound to the two public values.
Block derive_key(uint64_t i, const Point& a, const Point& b, const Point& shared) {
    crypto_generichash_state st;
    crypto_generichash_init(&st, nullptr, 0, sizeof(Block));
    static constexpr char kDomain[] = "seco-co-ot";
    crypto_generichash_update(&st, reinterpret_cast<const uint8_t*>(kDomain), sizeof(kDomain));
    uint8_t idx[8];
    std::memcpy(idx, &i, 8);
    crypto_generichash_update(&st, idx, 8);
    crypto_generichash_update(&st, a.data(), a.size());
    crypto_generichash_update(&st, b.data(), b.size());
    crypto_generichash_update(&st, shared.data(), shared.size());
    Block k;
    crypto_generichash_final(&st, reinterpret_cast<uint8_t*>(&k), sizeof(k));
    return k;
}

// Row expansion G(seed, session) for the extension matrix.
void expand(const Block& seed, uint64_t session, uint8_t* out, size_t len) {
    Prng::Key key{};
    std::memcpy(key.data(), &seed, 16);
    std::memcpy(key.data() + 16, &session, 8);
    Prng(key).fill(out, len);
}

// Tweakable correlation-robust hash of extension rows: H(j, q) = pi(2q ^ j) ^ (2q ^ j).
void hash_rows(std::vector<Block>& q, uint64_t first_index) {
    for (size_t j = 0; j < q.size(); ++j) q[j] = gf_double(q[j]) ^ Block{first_index + j, 0x4f54ull << 48};
    hash_blocks(q.data(), q.size());
}

void transpose64(uint64_t a[64]) {
    uint64_t m = 0x00000000FFFFFFFFull;
    for (unsigned j = 32; j != 0; j >>= 1, m ^= (m << j)) {
        for (unsigned k = 0; k < 64; k = ((k | j) + 1) & ~j) {
            const uint64_t t = ((a[k] >> j) ^ a[k | j]) & m;
            a[k] ^= t << j;
            a[k | j] ^= t;
        }
    }
}

size_t round_up(size_t m) { return (m + kKappa - 1) / kKappa * kKappa; }

}  // namespace

std::vector<Block> transpose_128(std::span<const uint8_t> rows, size_t cols) {
    if (cols % kKappa != 0 || rows.size() != kKappa * cols / 8) throw ConfigError("transpose needs 128 x (128k) bits");
    const size_t row_bytes = cols / 8;
    std::vector<Block> out(cols);
    uint64_t tile[64];
    for (size_t c = 0; c < cols; c += 64) {
        for (unsigned half = 0; half < 2; ++half) {
            for (unsigned r = 0; r < 64; ++r)
                std::memcpy(&tile[r], rows.data() + (64 * half + r) * row_bytes + c / 8, 8);
            transpose64(tile);
            for (unsigned k = 0; k < 64; ++k) (half ? out[c + k].hi : out[c + k].lo) = tile[k];
        }
    }
    return out;
}

std::vector<LabelPair> co_random_ot_send(transport::Endpoint& ep, Party receiver, size_t count, Prng& rng) {
    ensure_sodium();
    const Scalar a = random_scalar(rng);
    const Point A = base_mul(a);
    ep.send(receiver, kind(MsgKind::BaseOtSetup), A);

    auto msg = ep.recv(receiver, kind(MsgKind::BaseOtReply));
    if (msg.size() != count * kPoint) throw ProtocolError("base OT reply has the wrong size");
    const Point aA = mul(a, A);
    std::vector<LabelPair> keys(count);
    for (size_t i = 0; i < count; ++i) {
        Point B;
        std::memcpy(B.data(), msg.data() + i * kPoint, kPoint);
        const Point aB = mul(a, B);
        Point aB_minus_aA;
        crypto_core_ristretto255_sub(aB_minus_aA.data(), aB.data(), aA.data());
        keys[i] = {derive_key(i, A, B, aB), derive_key(i, A, B, aB_minus_aA)};
    }
    return keys;
}

std::vector<Block> co_random_ot_receive(transport::Endpoint& ep, Party sender, std::span<const uint8_t> choices,
                                        Prng& rng) {
    ensure_sodium();
    auto msg = ep.recv(sender, kind(MsgKind::BaseOtSetup));
    if (msg.size() != kPoint) throw ProtocolError("base OT setup has the wrong size");
    Point A;
    std::memcpy(A.data(), msg.data(), kPoint);
    if (!crypto_core_ristretto255_is_valid_point(A.data())) throw ProtocolError("OT peer sent an invalid group element");

    std::vector<uint8_t> reply(choices.size() * kPoint);
    std::vector<Block> keys(choices.size());
    for (size_t i = 0; i < choices.size(); ++i) {
        const Scalar b = random_scalar(rng);
        Point B = base_mul(b);
        if (choices[i] & 1) crypto_core_ristretto255_add(B.data(), A.data(), B.data());
        std::memcpy(reply.data() + i * kPoint, B.data(), kPoint);
        keys[i] = derive_key(i, A, B, mul(b, A));
    }
    ep.send(sender, kind(MsgKind::BaseOtReply), reply);
    return keys;
}

void base_ot_send(transport::Endpoint& ep, Party receiver, std::span<const LabelPair> msgs, Prng& rng) {
    auto keys = co_random_ot_send(ep, receiver, msgs.size(), rng);
    std::vector<Block> masked(2 * msgs.size());
    for (size_t i = 0; i < msgs.size(); ++i) {
        masked[2 * i] = msgs[i][0] ^ keys[i][0];
        masked[2 * i + 1] = msgs[i][1] ^ keys[i][1];
    }
    ByteWriter w;
    w.raw(masked.data(), masked.size() * sizeof(Block));
    ep.send(receiver, kind(MsgKind::BaseOtPayload), w.bytes());
}

std::vector<Block> base_ot_receive(transport::Endpoint& ep, Party sender, std::span<const uint8_t> choices, Prng& rng) {
    auto keys = co_random_ot_receive(ep, sender, choices, rng);
    auto msg = ep.recv(sender, kind(MsgKind::BaseOtPayload));
    if (msg.size() != 2 * choices.size() * sizeof(Block)) throw ProtocolError("base OT payload has the wrong size");
    std::vector<Block> out(choices.size());
    for (size_t i = 0; i < choices.size(); ++i) {
        Block m;
        std::memcpy(&m, msg.data() + (2 * i + (choices[i] & 1)) * sizeof(Block), sizeof(Block));
        out[i] = m ^ keys[i];
    }
    return out;
}

namespace {

class IknpSender final : public OtSender {
public:
    IknpSender(transport::Endpoint& ep, Party receiver, Prng& rng) : peer_(receiver) {
        s_ = Block::random(rng);
        std::vector<uint8_t> bits(kKappa);
        for (size_t i = 0; i < kKappa; ++i) bits[i] = (i < 64 ? s_.lo >> i : s_.hi >> (i - 64)) & 1;
        s_bits_ = bits;
        seeds_ = co_random_ot_receive(ep, peer_, bits, rng);
    }

    void send(transport::Endpoint& ep, std::span<const LabelPair> msgs) override {
        auto msg = ep.recv(peer_, kind(MsgKind::OtExtension));
        ByteReader r(msg);
        const size_t m = r.u32();
        if (m != msgs.size()) throw ProtocolError("OT extension size disagrees with the sender");
        const size_t M = round_up(m), row_bytes = M / 8;
        auto u = r.raw(kKappa * row_bytes);
        r.expect_done();

        std::vector<uint8_t> q(kKappa * row_bytes);
        for (size_t i = 0; i < kKappa; ++i) {
            uint8_t* qi = q.data() + i * row_bytes;
            expand(seeds_[i], session_, qi, row_bytes);
            if (s_bits_[i])
                for (size_t k = 0; k < row_bytes; ++k) qi[k] ^= u[i * row_bytes + k];
        }
        auto cols = transpose_128(q, M);
        cols.resize(m);
        auto h0 = cols, h1 = cols;
        for (auto& b : h1) b ^= s_;
        hash_rows(h0, offset_);
        hash_rows(h1, offset_);

        std::vector<Block> y(2 * m);
        for (size_t j = 0; j < m; ++j) {
            y[2 * j] = msgs[j][0] ^ h0[j];
            y[2 * j + 1] = msgs[j][1] ^ h1[j];
        }
        ByteWriter w(y.size() * sizeof(Block));
        w.raw(y.data(), y.size() * sizeof(Block));
        ep.send(peer_, kind(MsgKind::OtExtensionReply), w.bytes());
        ++session_;
        offset_ += m;
    }

private:
    Party peer_;
    Block s_;
    std::vector<uint8_t> s_bits_;
    std::vector<Block> seeds_;
    uint64_t session_ = 0, offset_ = 0;
};

class IknpReceiver final : public OtReceiver {
public:
    IknpReceiver(transport::Endpoint& ep, Party sender, Prng& rng)
        : peer_(sender), seeds_(co_random_ot_send(ep, sender, kKappa, rng)) {}

    std::vector<Block> receive(transport::Endpoint& ep, std::span<const uint8_t> choices) override {
        const size_t m = choices.size();
        const size_t M = round_up(m), row_bytes = M / 8;
        std::vector<uint8_t> r(row_bytes, 0);
        for (size_t j = 0; j < m; ++j) r[j / 8] |= uint8_t((choices[j] & 1) << (j % 8));

        std::vector<uint8_t> t(kKappa * row_bytes), u(kKappa * row_bytes);
        for (size_t i = 0; i < kKappa; ++i) {
            uint8_t* ti = t.data() + i * row_bytes;
            uint8_t* ui = u.data() + i * row_bytes;
            expand(seeds_[i][0], session_, ti, row_bytes);
            expand(seeds_[i][1], session_, ui, row_bytes);
            for (size_t k = 0; k < row_bytes; ++k) ui[k] ^= ti[k] ^ r[k];
        }
        ByteWriter w(4 + u.size());
        w.u32(static_cast<uint32_t>(m));
        w.raw(u);
        ep.send(peer_, kind(MsgKind::OtExtension), w.bytes());

        auto cols = transpose_128(t, M);
        cols.resize(m);
        hash_rows(cols, offset_);
        auto msg = ep.recv(peer_, kind(MsgKind::OtExtensionReply));
        if (msg.size() != 2 * m * sizeof(Block)) throw ProtocolError("OT extension reply has the wrong size");
        std::vector<Block> out(m);
        for (size_t j = 0; j < m; ++j) {
            Block y;
            std::memcpy(&y, msg.data() + (2 * j + (choices[j] & 1)) * sizeof(Block), sizeof(Block));
            out[j] = y ^ cols[j];
        }
        ++session_;
        offset_ += m;
        return out;
    }

private:
    Party peer_;
    std::vector<LabelPair> seeds_;
    uint64_t session_ = 0, offset_ = 0;
};

}  // namespace

std::unique_ptr<OtSender> make_iknp_sender(transport::Endpoint& ep, Party receiver, Prng& rng) {
    return std::make_unique<IknpSender>(ep, receiver, rng);
}

std::unique_ptr<OtReceiver> make_iknp_receiver(transport::Endpoint& ep, Party sender, Prng& rng) {
    return std::make_unique<IknpReceiver>(ep, sender, rng);
}

#ifdef SECO_INSECURE_TEST_MODES

void OtDealer::deposit(Party sender, Party receiver, std::vector<LabelPair> pairs) {
    {
        std::lock_guard<std::mutex> lock(mu_);
        queues_[{sender, receiver}].push_back(std::move(pairs));
    }
    cv_.notify_all();
}

std::vector<Block> OtDealer::collect(Party sender, Party receiver, std::span<const uint8_t> choices) {
    std::unique_lock<std::mutex> lock(mu_);
    auto& q = queues_[{sender, receiver}];
    if (!cv_.wait_for(lock, timeout_, [&] { return !q.empty(); })) throw TimeoutError("OT dealer: sender never deposited");
    auto pairs = std::move(q.front());
    q.pop_front();
    if (pairs.size() != choices.size()) throw ProtocolError("OT dealer: choice count does not match the deposit");
    std::vector<Block> out(choices.size());
    for (size_t i = 0; i < choices.size(); ++i) out[i] = pairs[i][choices[i] & 1];
    released_ += out.size();
    return out;
}

size_t OtDealer::labels_released() const {
    std::lock_guard<std::mutex> lock(mu_);
    return released_;
}

namespace {

class DealerSender final : public OtSender {
public:
    DealerSender(std::shared_ptr<OtDealer> d, Party self, Party peer) : d_(std::move(d)), self_(self), peer_(peer) {}
    void send(transport::Endpoint&, std::span<const LabelPair> msgs) override {
        d_->deposit(self_, peer_, std::vector<LabelPair>(msgs.begin(), msgs.end()));
    }

private:
    std::shared_ptr<OtDealer> d_;
    Party self_, peer_;
};

class DealerReceiver final : public OtReceiver {
public:
    DealerReceiver(std::shared_ptr<OtDealer> d, Party self, Party peer) : d_(std::move(d)), self_(self), peer_(peer) {}
    std::vector<Block> receive(transport::Endpoint&, std::span<const uint8_t> choices) override {
        return d_->collect(peer_, self_, choices);
    }

private:
    std::shared_ptr<OtDealer> d_;
    Party self_, peer_;
};

}  // namespace

std::unique_ptr<OtSender> make_dealer_sender(std::shared_ptr<OtDealer> dealer, Party self, Party receiver) {
    return std::make_unique<DealerSender>(std::move(dealer), self, receiver);
}

std::unique_ptr<OtReceiver> make_dealer_receiver(std::shared_ptr<OtDealer> dealer, Party self, Party sender) {
    return std::make_unique<DealerReceiver>(std::move(dealer), self, sender);
}

#endif

}  // namespace seco::gc
