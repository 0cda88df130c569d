#include <cmath>
#include <map>

#include "doctest.h"
#include "seco/common/error.hpp"
#include "seco/ring/ring.hpp"
#include "stats.hpp"

using namespace seco;
using namespace seco::ring;

TEST_CASE("barrett reduction matches 128-bit remainder") {
    Prng rng(1);
    for (uint64_t qv : {1152921504606748673ull, 786433ull, 2061584302081ull, 97ull}) {
        Modulus m(qv);
        for (int i = 0; i < 20000; ++i) {
            uint64_t a = rng.uniform(qv), b = rng.uniform(qv);
            CHECK(m.mul(a, b) == static_cast<uint64_t>(u128(a) * b % qv));
        }
        CHECK(m.mul(qv - 1, qv - 1) == 1);
    }
}

TEST_CASE("parameter profiles validate") {
    CHECK_NOTHROW(RingParams::desk().validate());
    CHECK_NOTHROW(RingParams::paper().validate());
    auto ctx = make_context(RingParams::paper());
    CHECK(ctx->has_batching());
    CHECK(ctx->params().t == 2061584302081ull);
    CHECK(ctx->delta() == ctx->q() / ctx->params().t);
    for (const RingParams& p : {RingParams::desk(), RingParams::paper()}) {
        auto c = make_context(p);
        CHECK(c->q() % p.t == 1);
    }
    RingParams bad = RingParams::desk();
    bad.n = 3000;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = RingParams::desk();
    bad.q_primes = {1152921504606748673ull + 2};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("ntt output order matches the reference dft") {
    for (size_t n : {4, 8, 16, 64}) {
        Modulus m(1152921504606748673ull);
        NttTables tab(n, m);
        Prng rng(n);
        std::vector<uint64_t> a(n);
        for (auto& x : a) x = rng.uniform(m.value());
        auto ref = reference::negacyclic_dft(a, tab.psi(), m);
        auto f = a;
        tab.forward(f.data());
        for (size_t k = 0; k < n; ++k) CHECK(f[k] == ref[tab.eval_exponent(k) >> 1]);
        tab.inverse(f.data());
        CHECK(f == a);
    }
}

TEST_CASE("ntt round trip is the identity") {
    auto ctx = make_context(RingParams::desk());
    Prng rng(2);
    for (int i = 0; i < 1000; ++i) {
        RingElement a = sample_uniform(ctx, rng, false);
        RingElement b = a;
        b.to_ntt();
        b.from_ntt();
        REQUIRE(a == b);
    }
}

TEST_CASE("poly_mul matches schoolbook and negacyclic identities") {
    auto ctx = make_context(RingParams::small(8));
    Prng rng(3);
    for (int i = 0; i < 50; ++i) {
        RingElement a = sample_uniform(ctx, rng, false), b = sample_uniform(ctx, rng, false);
        CHECK(poly_mul(a, b) == reference::negacyclic_mul(a, b));
        RingElement c = sample_uniform(ctx, rng, false);
        CHECK(poly_add(a, b) == poly_add(b, a));
        CHECK(poly_mul(a, poly_add(b, c)) == poly_add(poly_mul(a, b), poly_mul(a, c)));
    }
    std::vector<int64_t> xn1(8, 0), x(8, 0), one(8, 0), minus_one(8, 0);
    xn1[7] = 1;
    x[1] = 1;
    one[0] = 1;
    minus_one[0] = -1;
    CHECK(poly_mul(RingElement::from_signed(ctx, xn1), RingElement::from_signed(ctx, x)) ==
          RingElement::from_signed(ctx, minus_one));
    RingElement a = sample_uniform(ctx, rng, false);
    CHECK(poly_mul(a, RingElement::from_signed(ctx, one)) == a);
    RingElement prod = poly_mul(RingElement::from_signed(ctx, xn1), RingElement::from_signed(ctx, x));
    CHECK(prod.limb(0)[0] == ctx->modulus(0).value() - 1);
}

TEST_CASE("galois automorphism agrees in both domains") {
    auto ctx = make_context(RingParams::small(16));
    Prng rng(4);
    RingElement a = sample_uniform(ctx, rng, false);
    for (uint32_t g : {3u, 9u, 31u}) {
        RingElement c = apply_galois(a, g);
        RingElement d = apply_galois(a.ntt_copy(), g);
        d.from_ntt();
        CHECK(c == d);
    }
}

TEST_CASE("ternary sampler") {
    auto ctx = make_context(RingParams::small(4));
    Prng rng(5);
    RingElement r = sample_ternary(ctx, rng);
    uint64_t q0 = ctx->modulus(0).value();
    for (size_t j = 0; j < 4; ++j) {
        uint64_t v = r.limb(0)[j];
        CHECK((v == 0 || v == 1 || v == q0 - 1));
    }
    auto draws = ternary_draws(100000, rng);
    std::vector<uint64_t> counts(3, 0);
    for (auto v : draws) counts[v + 1]++;
    for (auto c : counts) CHECK(std::abs(double(c) / 1e5 - 1.0 / 3) < 0.01);
    CHECK(test::chi_square_uniform_p(counts) > 0.01);

    Prng a(6), b(6);
    CHECK(sample_ternary(ctx, a) == sample_ternary(ctx, b));
}

TEST_CASE("gaussian sampler moments and tail bound") {
    Prng rng(7);
    const double sigma = 3.2;
    double sum = 0, sq = 0;
    int64_t maxabs = 0;
    for (int i = 0; i < 100000; ++i) {
        int64_t v = gaussian_draw(sigma, rng);
        sum += double(v);
        sq += double(v) * double(v);
        maxabs = std::max<int64_t>(maxabs, std::abs(v));
    }
    double mean = sum / 1e5, var = sq / 1e5 - mean * mean;
    CHECK(std::abs(mean) < 0.05);
    CHECK(std::abs(var - sigma * sigma) < 0.05 * sigma * sigma);
    CHECK(maxabs <= 6 * sigma);

    auto ctx = make_context(RingParams::desk());
    RingElement e = sample_gaussian(ctx, rng);
    for (size_t j = 0; j < ctx->n(); ++j) CHECK(std::abs(e.small_coeff(j)) <= 19);
    Prng a(8), b(8);
    CHECK(sample_gaussian(ctx, a) == sample_gaussian(ctx, b));
}

TEST_CASE("rns scale-and-round agrees with the wide-integer path") {
    for (const RingParams& p : {RingParams::desk(), RingParams::paper(), RingParams::small(16, 1)}) {
        auto ctx = make_context(p);
        Prng rng(21);
        const size_t k = ctx->num_moduli();
        for (int trial = 0; trial < 20000; ++trial) {
            uint64_t r[2];
            for (size_t i = 0; i < k; ++i) r[i] = rng.uniform(ctx->modulus(i).value());
            if (trial < 4) {
                // Boundary residues: zero and q - 1.
                for (size_t i = 0; i < k; ++i) r[i] = trial % 2 ? ctx->modulus(i).value() - 1 : 0;
            }
            REQUIRE(ctx->scale_round_residues(r, 1) == ctx->scale_round_to_t(ctx->crt(r, 1)));
        }
    }
}
