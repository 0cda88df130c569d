#include <numeric>

#include "doctest.h"
#include "seco/bfv/bfv.hpp"
#include "seco/bfv/linop.hpp"
#include "seco/bfv/serialize.hpp"
#include "seco/common/error.hpp"
#include "stats.hpp"

using namespace seco;
using namespace seco::bfv;

namespace {

ContextPtr desk() {
    static ContextPtr ctx = ring::make_context(ring::RingParams::desk());
    return ctx;
}

std::vector<uint64_t> random_slots(const ContextPtr& ctx, Prng& rng, size_t count = 0) {
    std::vector<uint64_t> v(count ? count : ctx->n());
    for (auto& x : v) x = rng.uniform(ctx->params().t);
    return v;
}

ModMatrix random_matrix(size_t rows, size_t cols, uint64_t t, Prng& rng) {
    ModMatrix f(rows, cols);
    for (auto& v : f.data) v = rng.uniform(t);
    return f;
}

}  // namespace

TEST_CASE("keygen noise and determinism") {
    auto ctx = desk();
    Prng rng(11);
    KeyPair kp = keygen(ctx, rng);
    RingElement e = ring::poly_add(kp.pk.p0, ring::poly_mul(kp.sk.s, kp.pk.p1));
    CHECK(e.inf_norm() <= 6 * 3.2);
    RingElement s = kp.sk.s.coeff_copy();
    for (size_t j = 0; j < ctx->n(); ++j) CHECK(std::abs(s.small_coeff(j)) <= 1);
    Prng a(12), b(12);
    KeyPair k1 = keygen(ctx, a), k2 = keygen(ctx, b);
    CHECK(k1.pk.p0 == k2.pk.p0);
    CHECK(k1.sk.s == k2.sk.s);
}

TEST_CASE("slot encoding round trip") {
    auto ctx = desk();
    BatchEncoder enc(ctx);
    Prng rng(13);
    auto v = random_slots(ctx, rng);
    CHECK(enc.decode(enc.encode(v)) == v);
    std::vector<uint64_t> ones(ctx->n(), 1);
    Plaintext one = enc.encode(ones);
    CHECK(one.coeffs[0] == 1);
    for (size_t j = 1; j < ctx->n(); ++j) CHECK(one.coeffs[j] == 0);
}

TEST_CASE("encrypt and decrypt") {
    auto ctx = desk();
    BatchEncoder enc(ctx);
    Prng rng(14);
    KeyPair kp = keygen(ctx, rng);
    Plaintext zero{std::vector<uint64_t>(ctx->n(), 0)};
    CHECK(decrypt(kp.sk, encrypt(kp.pk, zero, rng)) == zero);
    auto v = random_slots(ctx, rng);
    Plaintext pt = enc.encode(v);
    Ciphertext c1 = encrypt(kp.pk, pt, rng), c2 = encrypt(kp.pk, pt, rng);
    CHECK_FALSE(c1.c0 == c2.c0);
    for (int i = 0; i < 100; ++i) {
        auto m = enc.encode(random_slots(ctx, rng));
        REQUIRE(decrypt(kp.sk, encrypt(kp.pk, m, rng)) == m);
    }
}

TEST_CASE("homomorphic operations follow slot arithmetic") {
    auto ctx = desk();
    BatchEncoder enc(ctx);
    const ring::Modulus& t = ctx->t();
    Prng rng(15);
    KeyPair kp = keygen(ctx, rng);
    GaloisKeys gk = make_galois_keys(kp.sk, rng);
    const size_t n = ctx->n(), rows = n / 2;

    auto a = random_slots(ctx, rng), b = random_slots(ctx, rng);
    Ciphertext ca = encrypt(kp.pk, enc.encode(a), rng), cb = encrypt(kp.pk, enc.encode(b), rng);
    Ciphertext c0 = encrypt_zero(kp.pk, rng);

    CHECK(enc.decode(decrypt(kp.sk, add(ca, c0))) == a);
    std::vector<uint64_t> ones(n, 1);
    CHECK(enc.decode(decrypt(kp.sk, mul_plain(ca, enc.encode(ones)))) == a);

    std::vector<uint64_t> sum(n), diff(n), prod(n);
    for (size_t i = 0; i < n; ++i) {
        sum[i] = t.add(a[i], b[i]);
        diff[i] = t.sub(a[i], b[i]);
        prod[i] = t.mul(a[i], b[i]);
    }
    CHECK(enc.decode(decrypt(kp.sk, add(ca, cb))) == sum);
    CHECK(enc.decode(decrypt(kp.sk, sub(ca, cb))) == diff);
    CHECK(enc.decode(decrypt(kp.sk, mul_plain(ca, enc.encode(b)))) == prod);
    CHECK(enc.decode(decrypt(kp.sk, add_plain(ca, enc.encode(b)))) == sum);

    std::vector<uint64_t> seq(n);
    std::iota(seq.begin(), seq.end(), 1);
    Ciphertext cs = encrypt(kp.pk, enc.encode(seq), rng);
    for (long k : {1L, 5L, 100L, -3L}) {
        auto got = enc.decode(decrypt(kp.sk, rotate(cs, k, gk)));
        long kk = ((k % long(rows)) + long(rows)) % long(rows);
        for (size_t i = 0; i < rows; ++i) {
            REQUIRE(got[i] == seq[(i + kk) % rows]);
            REQUIRE(got[rows + i] == seq[rows + (i + kk) % rows]);
        }
    }
    auto rot1 = enc.decode(decrypt(kp.sk, rotate(cs, 1, gk)));
    CHECK(rot1[0] == 2);
    CHECK(rot1[rows - 1] == 1);

    EvalInput in1[] = {{&cs, nullptr}};
    CHECK_THROWS_AS(eval(OpKind::Rot, in1, nullptr, 1), ConfigError);
    Plaintext pb = enc.encode(b);
    EvalInput bad[] = {{&ca, nullptr}, {&cb, nullptr}};
    CHECK_THROWS_AS(eval(OpKind::MulPlain, bad), ConfigError);
    EvalInput good[] = {{&ca, nullptr}, {nullptr, &pb}};
    CHECK(enc.decode(decrypt(kp.sk, eval(OpKind::MulPlain, good))) == prod);

    auto other = ring::make_context(ring::RingParams::paper());
    Prng r2(1);
    KeyPair kq = keygen(other, r2);
    Ciphertext cq = encrypt_zero(kq.pk, r2);
    CHECK_THROWS_AS(add(ca, cq), ConfigError);
}

TEST_CASE("plaintext multiplication depth within the documented budget") {
    auto ctx = desk();
    BatchEncoder enc(ctx);
    const ring::Modulus& t = ctx->t();
    Prng rng(16);
    KeyPair kp = keygen(ctx, rng);
    auto m = random_slots(ctx, rng);
    Ciphertext c = encrypt(kp.pk, enc.encode(m), rng);
    // Full-range slot multipliers grow noise by about t*sqrt(n) per step; three fit in delta/2.
    for (int depth = 1; depth <= 3; ++depth) {
        auto f = random_slots(ctx, rng);
        c = mul_plain(c, enc.encode(f));
        for (size_t i = 0; i < m.size(); ++i) m[i] = t.mul(m[i], f[i]);
        REQUIRE(enc.decode(decrypt(kp.sk, c)) == m);
    }
}

TEST_CASE("lin_op on small matrices") {
    auto ctx = desk();
    BatchEncoder enc(ctx);
    Prng rng(17);
    KeyPair kp = keygen(ctx, rng);
    GaloisKeys gk = make_galois_keys(kp.sk, rng);
    const uint64_t t = ctx->params().t;

    ModMatrix id(8, 8), zero(8, 8);
    for (size_t i = 0; i < 8; ++i) id.at(i, i) = 1;
    ModMatrix rnd = random_matrix(8, 8, t, rng);
    auto x = random_slots(ctx, rng, 8);
    for (const ModMatrix* f : {&id, &zero, &rnd}) {
        LinearOperator op(ctx, *f, LinearOperator::Mode::Rotations);
        Ciphertext ct = encrypt(kp.pk, enc.encode(op.input_slots(x, 0)), rng);
        auto slots = enc.decode(decrypt(kp.sk, lin_op(gk, ct, op)));
        CHECK(op.gather({slots}) == matvec(*f, x, t));
    }
    CHECK(matvec(id, x, t) == x);
    ModMatrix wide(3000, 8);
    LinearOperator big(ctx, wide, LinearOperator::Mode::Rotations);
    Ciphertext ct = encrypt_zero(kp.pk, rng);
    CHECK_THROWS_AS(lin_op(gk, ct, big), ConfigError);
}

TEST_CASE("lin_op matches the matrix-vector oracle for model shapes") {
    auto ctx = desk();
    BatchEncoder enc(ctx);
    Prng rng(18);
    KeyPair kp = keygen(ctx, rng);
    GaloisKeys gk = make_galois_keys(kp.sk, rng);
    const uint64_t t = ctx->params().t;

    // (rows, cols) of fused blocks in the bundled models, plus odd sizes.
    std::vector<std::pair<size_t, size_t>> shapes = {{2304, 784}, {256, 2304}, {100, 256}, {10, 100},
                                                     {2880, 784}, {800, 2880}, {500, 800}, {10, 500},
                                                     {5, 3},      {1, 1},      {33, 1025}};
    for (auto [rows, cols] : shapes) {
        CAPTURE(rows);
        CAPTURE(cols);
        ModMatrix f = random_matrix(rows, cols, t, rng);
        auto x = random_slots(ctx, rng, cols);
        auto expect = matvec(f, x, t);
        CHECK(matvec(f, x, t, Exec::Serial) == expect);

        for (auto mode : {LinearOperator::Mode::Rotations, LinearOperator::Mode::PreRotated}) {
            LinearOperator op(ctx, f, mode);
            const auto& l = op.layout();
            CHECK(op.gather(op.apply_slots(x)) == expect);
            std::vector<Ciphertext> res;
            if (mode == LinearOperator::Mode::Rotations) {
                std::vector<Ciphertext> in;
                for (size_t b = 0; b < l.in_blocks; ++b)
                    in.push_back(encrypt(kp.pk, enc.encode(op.input_slots(x, b)), rng));
                res = op.apply(in, gk);
            } else {
                if (rows * cols > 300000) continue;  // covered by the protocol tests
                CHECK(op.packed_inputs() == (l.in_blocks * l.rotations + 1) / 2);
                std::vector<Ciphertext> in;
                for (size_t i = 0; i < op.packed_inputs(); ++i)
                    in.push_back(encrypt(kp.pk, enc.encode(op.packed_input_slots(x, i)), rng));
                res = op.apply_prerotated(in);
            }
            std::vector<std::vector<uint64_t>> slots;
            for (auto& c : res) slots.push_back(enc.decode(decrypt(kp.sk, c)));
            CHECK(op.gather(slots) == expect);
        }
    }
}

TEST_CASE("serial and parallel lin_op kernels agree") {
    auto ctx = desk();
    BatchEncoder enc(ctx);
    Prng rng(19);
    KeyPair kp = keygen(ctx, rng);
    GaloisKeys gk = make_galois_keys(kp.sk, rng);
    ModMatrix f = random_matrix(40, 70, ctx->params().t, rng);
    auto x = random_slots(ctx, rng, 70);
    LinearOperator par(ctx, f, LinearOperator::Mode::Rotations, Exec::Parallel);
    LinearOperator ser(ctx, f, LinearOperator::Mode::Rotations, Exec::Serial);
    Ciphertext ct = encrypt(kp.pk, enc.encode(par.input_slots(x, 0)), rng);
    Ciphertext a = lin_op(gk, ct, par), b = lin_op(gk, ct, ser);
    CHECK(a.c0 == b.c0);
    CHECK(a.c1 == b.c1);
}

TEST_CASE("serialization is lossless and bit-exact") {
    auto ctx = desk();
    Prng rng(20);
    KeyPair kp = keygen(ctx, rng);
    Ciphertext ct = encrypt_zero(kp.pk, rng);
    ByteWriter w;
    write_ciphertext(w, ct);
    write_public_key(w, kp.pk);
    ByteWriter one;
    write_ciphertext(one, ct);
    CHECK(one.size() == ciphertext_bytes(ctx));
    Bytes bytes = w.take();
    ByteReader r(bytes);
    Ciphertext back = read_ciphertext(r, ctx);
    PublicKey pk = read_public_key(r, ctx);
    CHECK(r.done());
    CHECK(back.c0 == ct.c0);
    CHECK(back.c1 == ct.c1);
    CHECK(pk.p0 == kp.pk.p0);
    ByteWriter w2;
    write_ciphertext(w2, back);
    CHECK(std::equal(w2.bytes().begin(), w2.bytes().end(), bytes.begin()));

    auto paper = ring::make_context(ring::RingParams::paper());
    ByteReader r2(bytes);
    CHECK_THROWS_AS(read_ciphertext(r2, paper), SerializationError);
    Bytes cut(bytes.begin(), bytes.begin() + 100);
    ByteReader r3(cut);
    CHECK_THROWS_AS(read_ciphertext(r3, ctx), SerializationError);
}

TEST_CASE("ciphertext coefficients do not depend on the message") {
    auto ctx = desk();
    BatchEncoder enc(ctx);
    Prng rng(21);
    KeyPair kp = keygen(ctx, rng);
    Plaintext m0 = enc.encode(random_slots(ctx, rng)), m1 = enc.encode(random_slots(ctx, rng));
    const int trials = 10000, bins = 64;
    std::vector<uint64_t> h0(bins, 0), h1(bins, 0);
    const uint64_t q0 = ctx->modulus(0).value();
    auto bin = [&](uint64_t v) { return static_cast<size_t>(ring::u128(v) * bins / q0); };
    for (int i = 0; i < trials; ++i) {
        RingElement a = encrypt(kp.pk, m0, rng).c0.coeff_copy();
        RingElement b = encrypt(kp.pk, m1, rng).c0.coeff_copy();
        h0[bin(a.limb(0)[7])]++;
        h1[bin(b.limb(0)[7])]++;
    }
    CHECK(test::chi_square_two_sample_p(h0, h1) > 0.01);
}
