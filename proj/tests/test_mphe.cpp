#include <doctest.h>

#include <thread>

#include "seco/bfv/serialize.hpp"
#include "seco/common/error.hpp"
#include "seco/common/msg_kind.hpp"
#include "seco/mphe/mphe.hpp"

using namespace seco;
using namespace seco::mphe;
using transport::Party;

namespace {

ContextPtr desk() {
    static ContextPtr ctx = ring::make_context(ring::RingParams::desk());
    return ctx;
}

struct Parties {
    RingElement p1;
    std::vector<KeyPair> keys;
    CommonPublicKey cpk;
    SecretKey csk;  // aggregate-key oracle
};

Parties make_parties(ContextPtr ctx, size_t n, Prng& rng) {
    Parties p;
    Prng::Key seed;
    rng.fill(seed.data(), seed.size());
    p.p1 = common_p1(ctx, seed);
    std::vector<PublicKey> pks;
    for (size_t i = 0; i < n; ++i) {
        p.keys.push_back(mphe_keygen(ctx, p.p1, rng));
        pks.push_back(p.keys.back().pk);
    }
    p.cpk = dkeygen(pks);
    p.csk.s = p.keys[0].sk.s;
    for (size_t i = 1; i < n; ++i) ring::add_inplace(p.csk.s, p.keys[i].sk.s);
    return p;
}

Plaintext random_plain(const ContextPtr& ctx, Prng& rng) {
    Plaintext pt{std::vector<uint64_t>(ctx->n())};
    for (auto& c : pt.coeffs) c = rng.uniform(ctx->params().t);
    return pt;
}

std::vector<PartialDecryption> all_partials(const Parties& p, const Ciphertext& ct, Prng& rng) {
    std::vector<PartialDecryption> pds;
    for (size_t i = 0; i < p.keys.size(); ++i) pds.push_back(reconstruct(ct, p.keys[i].sk, uint8_t(i + 1), rng));
    return pds;
}

std::vector<uint8_t> ids(size_t n) {
    std::vector<uint8_t> v;
    for (size_t i = 0; i < n; ++i) v.push_back(uint8_t(i + 1));
    return v;
}

}  // namespace

TEST_CASE("dkeygen aggregates public keys") {
    auto ctx = desk();
    Prng rng(31);
    auto p = make_parties(ctx, 3, rng);
    CHECK(p.cpk.p1 == p.p1);
    // p0_sum + csk * p1 is the summed key error.
    RingElement e = ring::poly_add(p.cpk.p0_sum, ring::poly_mul(p.csk.s, p.cpk.p1));
    CHECK(e.inf_norm() <= 3 * 6 * 3.2);

    std::vector<PublicKey> pks = {p.keys[0].pk, p.keys[1].pk, p.keys[2].pk};
    std::vector<PublicKey> perm = {p.keys[2].pk, p.keys[0].pk, p.keys[1].pk};
    CHECK(dkeygen(perm).p0_sum == dkeygen(pks).p0_sum);
    std::vector<PublicKey> one = {p.keys[1].pk};
    CHECK(dkeygen(one).p0_sum == p.keys[1].pk.p0);

    KeyPair stranger = bfv::keygen(ctx, rng);
    pks.push_back(stranger.pk);
    CHECK_THROWS_AS(dkeygen(pks), ConfigError);
    CHECK_THROWS_AS(dkeygen(std::span<const PublicKey>()), ConfigError);
}

TEST_CASE("common p1 is a function of the seed") {
    auto ctx = desk();
    Prng::Key a{}, b{};
    b[0] = 1;
    CHECK(common_p1(ctx, a) == common_p1(ctx, a));
    CHECK_FALSE(common_p1(ctx, a) == common_p1(ctx, b));
}

TEST_CASE("threshold decryption equals decryption under the summed key") {
    auto ctx = desk();
    Prng rng(32);
    auto p = make_parties(ctx, 3, rng);
    auto parties = ids(3);
    for (int trial = 0; trial < 100; ++trial) {
        Plaintext m = random_plain(ctx, rng);
        Ciphertext ct = bfv::encrypt(p.cpk.as_public_key(), m, rng);
        auto pds = all_partials(p, ct, rng);
        Plaintext got = mphe_dec(ct, pds, parties);
        REQUIRE(got.coeffs == bfv::decrypt(p.csk, ct).coeffs);
        REQUIRE(got.coeffs == m.coeffs);
    }
}

TEST_CASE("threshold decryption after homomorphic evaluation") {
    auto ctx = desk();
    bfv::BatchEncoder enc(ctx);
    Prng rng(33);
    auto p = make_parties(ctx, 3, rng);
    auto parties = ids(3);
    const ring::Modulus& t = ctx->t();
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<uint64_t> a(ctx->n()), b(ctx->n()), f(ctx->n());
        for (auto* v : {&a, &b, &f})
            for (auto& x : *v) x = rng.uniform(t.value());
        auto pk = p.cpk.as_public_key();
        Ciphertext ca = bfv::encrypt(pk, enc.encode(a), rng), cb = bfv::encrypt(pk, enc.encode(b), rng);
        Ciphertext sum = bfv::add(ca, cb);
        Ciphertext prod = bfv::mul_plain(bfv::mul_plain(sum, enc.encode(f)), enc.encode(f));
        auto s = enc.decode(mphe_dec(sum, all_partials(p, sum, rng), parties));
        auto q = enc.decode(mphe_dec(prod, all_partials(p, prod, rng), parties));
        for (size_t i = 0; i < a.size(); ++i) {
            REQUIRE(s[i] == t.add(a[i], b[i]));
            REQUIRE(q[i] == t.mul(t.mul(t.add(a[i], b[i]), f[i]), f[i]));
        }
        CHECK(enc.decode(bfv::decrypt(p.csk, prod)) == q);
    }
}

TEST_CASE("a missing partial decryption gives a wrong plaintext") {
    auto ctx = desk();
    Prng rng(34);
    auto p = make_parties(ctx, 3, rng);
    std::vector<uint8_t> two = {1, 2};
    for (int trial = 0; trial < 100; ++trial) {
        Plaintext m = random_plain(ctx, rng);
        Ciphertext ct = bfv::encrypt(p.cpk.as_public_key(), m, rng);
        auto pds = all_partials(p, ct, rng);
        pds.pop_back();
        REQUIRE(mphe_dec(ct, pds, two).coeffs != m.coeffs);
        CHECK_THROWS_AS(mphe_dec(ct, pds, ids(3)), ProtocolError);
    }
}

TEST_CASE("partial decryption bookkeeping") {
    auto ctx = desk();
    Prng rng(35);
    auto p = make_parties(ctx, 3, rng);
    Ciphertext ct = bfv::encrypt(p.cpk.as_public_key(), random_plain(ctx, rng), rng);
    auto pds = all_partials(p, ct, rng);
    auto dup = pds;
    dup[2] = dup[1];
    CHECK_THROWS_AS(mphe_dec(ct, dup, ids(3)), ProtocolError);
    std::vector<uint8_t> wrong = {1, 2, 9};
    CHECK_THROWS_AS(mphe_dec(ct, pds, wrong), ProtocolError);

    // A zero secret contributes only its error term.
    SecretKey zero{RingElement(ctx, true)};
    auto pd = reconstruct(ct, zero, 7, rng);
    CHECK(pd.pd.inf_norm() <= 6 * 3.2);
    CHECK(pd.party == 7);

    ByteWriter w;
    write_partial(w, pds[0]);
    ByteReader r(w.bytes());
    auto back = read_partial(r, ctx);
    r.expect_done();
    CHECK(back.pd == pds[0].pd);
    CHECK(back.party == pds[0].party);
}

TEST_CASE("one party reduces to plain decryption") {
    auto ctx = desk();
    Prng rng(36);
    auto p = make_parties(ctx, 1, rng);
    for (int trial = 0; trial < 10; ++trial) {
        Plaintext m = random_plain(ctx, rng);
        Ciphertext ct = bfv::encrypt(p.cpk.as_public_key(), m, rng);
        auto pds = all_partials(p, ct, rng);
        CHECK(mphe_dec(ct, pds, ids(1)).coeffs == bfv::decrypt(p.keys[0].sk, ct).coeffs);
    }
}

TEST_CASE("disdec among three servers") {
    auto ctx = desk();
    Prng rng(37);
    auto p = make_parties(ctx, 3, rng);
    std::vector<Plaintext> ms;
    std::vector<Ciphertext> cts;
    for (int i = 0; i < 3; ++i) {
        ms.push_back(random_plain(ctx, rng));
        cts.push_back(bfv::encrypt(p.cpk.as_public_key(), ms.back(), rng));
    }

    auto eps = transport::make_local_network();
    std::vector<Plaintext> out;
    std::thread b([&] {
        Prng r(1);
        disdec_follow(*eps[2], p.keys[1].sk, r);
    });
    std::thread c([&] {
        Prng r(2);
        disdec_follow(*eps[3], p.keys[2].sk, r);
    });
    Prng ra(3);
    out = disdec_lead(*eps[1], cts, p.keys[0].sk, ra);
    b.join();
    c.join();
    REQUIRE(out.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(out[i].coeffs == ms[i].coeffs);

    auto a = eps[1]->finish();
    CHECK(a.at(transport::Phase::Setup).msgs_out == 2);
    CHECK(a.at(transport::Phase::Setup).msgs_in == 2);
    CHECK(eps[0]->finish().at(transport::Phase::Setup).msgs_in == 0);
}

TEST_CASE("disdec with server B offline fails at A") {
    auto ctx = desk();
    Prng rng(38);
    auto p = make_parties(ctx, 3, rng);
    std::vector<Ciphertext> cts = {bfv::encrypt(p.cpk.as_public_key(), random_plain(ctx, rng), rng)};
    auto eps = transport::make_local_network(std::chrono::milliseconds(500));
    eps[2]->close();
    std::thread c([&] {
        Prng r(2);
        try {
            disdec_follow(*eps[3], p.keys[2].sk, r);
        } catch (const ProtocolError&) {
        }
    });
    Prng ra(3);
    CHECK_THROWS_AS(disdec_lead(*eps[1], cts, p.keys[0].sk, ra), ProtocolError);
    c.join();
}
