// Measures BFV noise for the operations the protocol performs and prints
// log2 of the worst coefficient next to log2(delta/2).
//
//   seco_noise_report [desk|paper]

#include <cmath>
#include <cstdio>
#include <string>

#include "seco/bfv/bfv.hpp"
#include "seco/bfv/linop.hpp"

using namespace seco;
using namespace seco::bfv;

namespace {

double lg(ring::u128 v) { return v == 0 ? 0.0 : std::log2(static_cast<double>(v)); }

std::vector<uint64_t> random_vec(size_t len, uint64_t t, Prng& rng) {
    std::vector<uint64_t> v(len);
    for (auto& x : v) x = rng.uniform(t);
    return v;
}

ModMatrix random_matrix(size_t rows, size_t cols, uint64_t t, Prng& rng) {
    ModMatrix f(rows, cols);
    for (auto& v : f.data) v = rng.uniform(t);
    return f;
}

}  // namespace

int main(int argc, char** argv) {
    std::string profile = argc > 1 ? argv[1] : "desk";
    if (profile != "desk" && profile != "paper") {
        std::fprintf(stderr, "usage: %s [desk|paper]\n", argv[0]);
        return 2;
    }
    auto ctx = ring::make_context(profile == "paper" ? ring::RingParams::paper() : ring::RingParams::desk());
    const uint64_t t = ctx->params().t;
    Prng rng(5);
    BatchEncoder enc(ctx);

    // Three parties on a shared p1; the common key is the sum of their keys.
    auto p1 = ring::sample_uniform(ctx, rng);
    KeyPair party[3];
    for (auto& k : party) k = keygen_with_p1(ctx, p1, rng);
    KeyPair common = party[0];
    for (int i = 1; i < 3; ++i) {
        ring::add_inplace(common.sk.s, party[i].sk.s);
        ring::add_inplace(common.pk.p0, party[i].pk.p0);
    }
    const KeyPair& user = party[0];
    GaloisKeys gk = make_galois_keys(user.sk, rng);

    std::printf("profile %s: n=%zu log2(q)=%.1f t=%llu gadget=%u bits\n", profile.c_str(), ctx->n(),
                std::log2(static_cast<double>(ctx->q())), static_cast<unsigned long long>(t),
                ctx->params().gadget_bits);
    std::printf("%-40s %8.1f\n", "budget log2(delta/2)", lg(ctx->delta() / 2));

    auto m = random_vec(ctx->n(), t, rng);
    Plaintext pt = enc.encode(m);
    double fresh = 0, fresh_common = 0;
    for (int i = 0; i < 20; ++i) {
        fresh = std::max(fresh, lg(noise_norm(user.sk, encrypt(user.pk, pt, rng), pt)));
        fresh_common = std::max(fresh_common, lg(noise_norm(common.sk, encrypt(common.pk, pt, rng), pt)));
    }
    std::printf("%-40s %8.1f\n", "fresh, single key", fresh);
    std::printf("%-40s %8.1f\n", "fresh, common key", fresh_common);

    const size_t row = ctx->n() / 2;
    std::vector<uint64_t> rm(m.size());
    for (size_t j = 0; j < row; ++j) {
        rm[j] = m[(j + 1) % row];
        rm[row + j] = m[row + (j + 1) % row];
    }
    Ciphertext rot = rotate(encrypt(user.pk, pt, rng), 1, gk);
    std::printf("%-40s %8.1f\n", "one rotation", lg(noise_norm(user.sk, rot, enc.encode(rm))));

    Ciphertext cur = encrypt(user.pk, pt, rng);
    auto cm = m;
    for (int d = 1; d <= 4; ++d) {
        auto f = random_vec(ctx->n(), t, rng);
        cur = mul_plain(cur, enc.encode(f));
        for (size_t j = 0; j < cm.size(); ++j) cm[j] = ctx->t().mul(cm[j], f[j]);
        bool ok = enc.decode(decrypt(user.sk, cur)) == cm;
        std::printf("MulPlain depth %-25d %8.1f %s\n", d, lg(noise_norm(user.sk, cur, enc.encode(cm))),
                    ok ? "ok" : "FAIL");
    }

    // Gateway lin-op: user key, rotations. Remote lin-op: sum of three common-key
    // encryptions per packed input, plaintext diagonals only.
    const std::pair<size_t, size_t> shapes[] = {{2880, 784}, {256, 2304}, {100, 256}, {800, 2880}};
    for (auto mode : {LinearOperator::Mode::Rotations, LinearOperator::Mode::PreRotated}) {
        for (auto [rows, cols] : shapes) {
            ModMatrix f = random_matrix(rows, cols, t, rng);
            auto x = random_vec(cols, t, rng);
            LinearOperator op(ctx, f, mode);
            std::vector<Ciphertext> res;
            const SecretKey* sk = &user.sk;
            if (mode == LinearOperator::Mode::Rotations) {
                std::vector<Ciphertext> in;
                for (size_t b = 0; b < op.layout().in_blocks; ++b)
                    in.push_back(encrypt(user.pk, enc.encode(op.input_slots(x, b)), rng));
                res = op.apply(in, gk);
            } else {
                if (op.packed_inputs() > 2048) continue;
                sk = &common.sk;
                std::vector<Ciphertext> in;
                for (size_t i = 0; i < op.packed_inputs(); ++i) {
                    Ciphertext c = encrypt(common.pk, enc.encode(op.packed_input_slots(x, i)), rng);
                    add_inplace(c, encrypt_zero(common.pk, rng));
                    add_inplace(c, encrypt_zero(common.pk, rng));
                    in.push_back(std::move(c));
                }
                res = op.apply_prerotated(in);
            }
            auto expect = op.apply_slots(x);
            double worst = 0;
            std::vector<std::vector<uint64_t>> slots;
            for (size_t g = 0; g < res.size(); ++g) {
                worst = std::max(worst, lg(noise_norm(*sk, res[g], enc.encode(expect[g]))));
                slots.push_back(enc.decode(decrypt(*sk, res[g])));
            }
            bool ok = op.gather(slots) == matvec(f, x, t);
            char label[64];
            std::snprintf(label, sizeof(label), "%s %zux%zu",
                          mode == LinearOperator::Mode::Rotations ? "gateway lin-op" : "remote lin-op", rows, cols);
            std::printf("%-40s %8.1f %s\n", label, worst, ok ? "ok" : "FAIL");
        }
    }
    return 0;
}
