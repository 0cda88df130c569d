// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Runtime limits are part of each criterion. Progress goes to stderr.

#include <bit>
#include <chrono>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "seco/bfv/bfv.hpp"
#include "seco/gc/garble.hpp"
#include "seco/mphe/mphe.hpp"
#include "seco/protocol/audit.hpp"
#include "stats.hpp"

using namespace seco;
using protocol::Mode;
using transport::Party;
using transport::Phase;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& why) {
        if (!ok && pass) detail = why;
        pass = pass && ok;
    }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void report(int id, const std::string& name, Verdict v, double secs, double limit) {
    v.require(secs < limit, "runtime " + std::to_string(secs) + " s over the " + std::to_string(limit) + " s limit");
    std::ostringstream line;
    line.precision(1);
    line << std::fixed << (v.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << " (" << secs << " s)";
    if (!v.detail.empty()) line << ": " << v.detail;
    std::cout << line.str() << std::endl;
}

std::vector<uint64_t> random_slots(const ring::ContextPtr& ctx, Prng& rng) {
    std::vector<uint64_t> v(ctx->n());
    for (auto& x : v) x = rng.uniform(ctx->params().t);
    return v;
}

struct Committee {
    std::vector<bfv::KeyPair> keys;
    mphe::CommonPublicKey cpk;
    bfv::SecretKey csk;
};

Committee committee(const ring::ContextPtr& ctx, Prng& rng) {
    Committee c;
    Prng::Key seed;
    rng.fill(seed.data(), seed.size());
    auto p1 = mphe::common_p1(ctx, seed);
    std::vector<bfv::PublicKey> pks;
    for (int i = 0; i < 3; ++i) {
        c.keys.push_back(mphe::mphe_keygen(ctx, p1, rng));
        pks.push_back(c.keys.back().pk);
    }
    c.cpk = mphe::dkeygen(pks);
    c.csk.s = c.keys[0].sk.s;
    for (int i = 1; i < 3; ++i) ring::add_inplace(c.csk.s, c.keys[i].sk.s);
    return c;
}

bfv::Plaintext threshold_decrypt(const Committee& c, const bfv::Ciphertext& ct, Prng& rng) {
    std::vector<mphe::PartialDecryption> pds;
    const std::vector<uint8_t> ids{1, 2, 3};
    for (size_t i = 0; i < 3; ++i) pds.push_back(mphe::reconstruct(ct, c.keys[i].sk, ids[i], rng));
    return mphe::mphe_dec(ct, pds, ids);
}

// [1] Desk BFV and three-party threshold decryption.
Verdict he_correctness() {
    Verdict v;
    auto ctx = ring::make_context(ring::RingParams::desk());
    bfv::BatchEncoder enc(ctx);
    const auto& t = ctx->t();
    Prng rng(1001);
    auto kp = bfv::keygen(ctx, rng);
    auto gk = bfv::make_galois_keys(kp.sk, rng);

    size_t bad = 0;
    for (int i = 0; i < 1000; ++i) {
        auto m = enc.encode(random_slots(ctx, rng));
        bad += !(bfv::decrypt(kp.sk, bfv::encrypt(kp.pk, m, rng)) == m);
    }
    v.require(bad == 0, std::to_string(bad) + " of 1000 round trips inexact");

    const size_t n = ctx->n(), row = n / 2;
    size_t op_bad = 0;
    for (int trial = 0; trial < 25; ++trial) {
        auto a = random_slots(ctx, rng), b = random_slots(ctx, rng);
        auto ca = bfv::encrypt(kp.pk, enc.encode(a), rng), cb = bfv::encrypt(kp.pk, enc.encode(b), rng);
        std::vector<uint64_t> sum(n), diff(n), prod(n), rot(n);
        const long k = long(rng.uniform(row - 1)) + 1;
        for (size_t i = 0; i < n; ++i) {
            sum[i] = t.add(a[i], b[i]);
            diff[i] = t.sub(a[i], b[i]);
            prod[i] = t.mul(a[i], b[i]);
            const size_t base = i < row ? 0 : row;
            rot[i] = a[base + (i - base + size_t(k)) % row];
        }
        op_bad += enc.decode(bfv::decrypt(kp.sk, bfv::add(ca, cb))) != sum;
        op_bad += enc.decode(bfv::decrypt(kp.sk, bfv::sub(ca, cb))) != diff;
        op_bad += enc.decode(bfv::decrypt(kp.sk, bfv::mul_plain(ca, enc.encode(b)))) != prod;
        op_bad += enc.decode(bfv::decrypt(kp.sk, bfv::rotate(ca, k, gk))) != rot;
    }
    v.require(op_bad == 0, std::to_string(op_bad) + " homomorphic results differ from slot arithmetic");

    auto c = committee(ctx, rng);
    size_t dis_bad = 0;
    for (int i = 0; i < 100; ++i) {
        auto m = enc.encode(random_slots(ctx, rng));
        auto ct = bfv::encrypt(c.cpk.as_public_key(), m, rng);
        auto got = threshold_decrypt(c, ct, rng);
        dis_bad += !(got == bfv::decrypt(c.csk, ct)) || !(got == m);
    }
    v.require(dis_bad == 0, std::to_string(dis_bad) + " of 100 threshold decryptions differ from the summed key");
    v.detail = v.pass ? "1000 round trips, 100 ops, 100 threshold decryptions exact" : v.detail;
    return v;
}

// [2] Paper profile: one encrypt / evaluate / threshold decrypt round trip.
Verdict paper_smoke() {
    Verdict v;
    const auto params = ring::RingParams::paper();
    auto ctx = ring::make_context(params);
    v.require(ctx->n() == 8192 && params.t == 2061584302081ULL, "paper profile is not n=8192, t=2061584302081");
    bfv::BatchEncoder enc(ctx);
    const auto& t = ctx->t();
    Prng rng(1002);
    auto c = committee(ctx, rng);
    auto a = random_slots(ctx, rng), b = random_slots(ctx, rng), d = random_slots(ctx, rng);
    auto ct = bfv::encrypt(c.cpk.as_public_key(), enc.encode(a), rng);
    auto res = bfv::add_plain(bfv::mul_plain(ct, enc.encode(b)), enc.encode(d));
    std::vector<uint64_t> want(ctx->n());
    for (size_t i = 0; i < want.size(); ++i) want[i] = t.add(t.mul(a[i], b[i]), d[i]);
    v.require(enc.decode(threshold_decrypt(c, res, rng)) == want, "a*b + d did not decrypt exactly");
    if (v.pass) v.detail = "n=8192, MulPlain + AddPlain under the common key, threshold decryption exact";
    return v;
}

uint64_t relu_oracle(std::span<const uint64_t> shares, std::span<const uint64_t> masks, uint64_t p, uint32_t shift) {
    uint64_t x = 0;
    for (uint64_t s : shares) x = (x + s) % p;
    uint64_t y = nn::relu_truncate(x, p, shift);
    for (uint64_t m : masks) y = (y + p - m) % p;
    return y;
}

std::vector<uint64_t> garbled_eval(const gc::BoolCircuit& c, const std::vector<std::vector<uint64_t>>& rows, Prng& rng) {
    auto g = gc::garble(c, rows.size(), rng);
    gc::InputLabels in(c, rows.size());
    for (size_t k = 0; k < c.inputs.size(); ++k) {
        std::vector<uint64_t> col;
        for (const auto& r : rows) col.push_back(r[k]);
        in.set(c.inputs[k], g.encoding.encode(c.inputs[k], col));
    }
    return gc::evaluate_words(c, g.gc, in);
}

// [3] Garbled ReLU circuits against the share-recombination oracle.
Verdict gc_oracle() {
    Verdict v;
    const uint64_t p = ring::RingParams::desk().t;
    const uint32_t bits = std::bit_width(p), shift = 6;
    Prng rng(1003);

    auto c2 = gc::build_relu_circuit_2pc(bits, p, shift);
    std::vector<std::vector<uint64_t>> rows;
    std::vector<uint64_t> want;
    for (int i = 0; i < 1000; ++i) {
        std::vector<uint64_t> r(4);  // user share, next mask, A share, one-time pad
        for (auto& x : r) x = rng.uniform(p);
        if (i % 2) r[2] = (rng.uniform(p / 4) + p - r[0]) % p;
        const uint64_t sh[] = {r[0], r[2]}, mk[] = {r[1], r[3]};
        want.push_back(relu_oracle(sh, mk, p, shift));
        rows.push_back(r);
    }
    auto got = garbled_eval(c2, rows, rng);
    size_t bad2 = 0;
    for (size_t i = 0; i < want.size(); ++i) bad2 += got[i] != want[i];
    v.require(bad2 == 0, std::to_string(bad2) + " of 1000 relu_2pc tuples wrong");

    auto c3 = gc::build_relu_circuit_3pc(bits, p, shift);
    rows.clear();
    want.clear();
    for (int i = 0; i < 1000; ++i) {
        std::vector<uint64_t> r(6);  // (share, next mask) for A, B, C
        for (auto& x : r) x = rng.uniform(p);
        if (i % 2) r[4] = (rng.uniform(p / 4) + 2 * p - r[0] - r[2]) % p;
        const uint64_t sh[] = {r[0], r[2], r[4]}, mk[] = {r[1], r[3], r[5]};
        want.push_back(relu_oracle(sh, mk, p, shift));
        rows.push_back(r);
    }
    got = garbled_eval(c3, rows, rng);
    size_t bad3 = 0;
    for (size_t i = 0; i < want.size(); ++i) bad3 += got[i] != want[i];
    v.require(bad3 == 0, std::to_string(bad3) + " of 1000 relu_3pc tuples wrong");

    auto adder = gc::build_adder_circuit(8);
    rows.clear();
    for (uint64_t x = 0; x < 256; ++x)
        for (uint64_t y = 0; y < 256; ++y) rows.push_back({x, y});
    got = garbled_eval(adder, rows, rng);
    size_t bad_add = 0;
    for (size_t i = 0; i < rows.size(); ++i) bad_add += got[i] != rows[i][0] + rows[i][1];
    v.require(bad_add == 0, std::to_string(bad_add) + " of 65536 adder cases wrong");
    if (v.pass) v.detail = "2x1000 garbled ReLU tuples and 65536 adder cases exact";
    return v;
}

// Per (model, l, mode) session facts kept from the end-to-end sweep.
struct RunFacts {
    std::vector<std::vector<uint64_t>> predictions;
    uint64_t online_bytes = 0;
    size_t gateway_remote_msgs = 0;
    bool remote_relu = false;
};
using FactKey = std::tuple<std::string, size_t, Mode>;

uint64_t total_online_bytes(const transport::MetricsReport& r) {
    uint64_t s = 0;
    for (const auto& p : r.parties) s += p.at(Phase::Online).bytes_out;
    return s;
}

// [4] Every split of MiniONN and LeNet, 20 inputs, all modes. Also collects the
// share-recombination audit for every preprocessing run, used by [8].
Verdict end_to_end(std::map<FactKey, RunFacts>& facts, protocol::AuditReport& table1, size_t& table1_runs) {
    Verdict v;
    size_t sessions = 0;
    for (const std::string kind : {"minionn", "lenet"}) {
        auto model = std::make_shared<const nn::Model>(nn::make_model(kind, 1));
        const size_t L = model->num_blocks();
        const uint64_t p = ring::RingParams::desk().t;
        Prng in_rng = Prng(2024).derive(kind);
        std::vector<std::vector<uint64_t>> xs;
        for (int i = 0; i < 20; ++i) xs.push_back(nn::random_input(*model, p, in_rng));
        std::vector<std::vector<uint64_t>> want;
        for (const auto& x : xs) want.push_back(nn::plaintext_infer(*model, p, x));

        for (size_t l = 0; l <= L; ++l)
            for (Mode mode : {Mode::Seco, Mode::Delphi3, Mode::Delphi2}) {
                if (mode == Mode::Delphi2 && l != L) continue;
                const auto t0 = Clock::now();
                protocol::Options opt;
                opt.mode = mode;
                opt.l = l;
                opt.seed = 77;
                opt.record = true;
                auto res = protocol::run_local(opt, model, xs);
                ++sessions;
                size_t wrong = 0;
                for (size_t k = 0; k < xs.size(); ++k) wrong += res.predictions[k] != want[k];
                v.require(wrong == 0, kind + " l=" + std::to_string(l) + " " + protocol::mode_name(mode) + ": " +
                                          std::to_string(wrong) + " of 20 predictions differ from the oracle");
                table1.merge(protocol::audit_shares(res));
                table1_runs += res.party(Party::User).records.size();

                RunFacts f;
                f.predictions = res.predictions;
                f.online_bytes = total_online_bytes(res.report);
                f.gateway_remote_msgs = protocol::gateway_remote_messages(res);
                for (size_t i = l + 1; i <= L; ++i) f.remote_relu = f.remote_relu || model->blocks[i - 1].relu;
                facts[{kind, l, mode}] = std::move(f);
                std::cerr << "  " << kind << " l=" << l << " " << protocol::mode_name(mode) << " "
                          << (wrong ? "MISMATCH" : "ok") << " " << seconds_since(t0) << " s" << std::endl;
            }
    }
    if (v.pass) v.detail = std::to_string(sessions) + " sessions x 20 inputs equal the fixed-point oracle";
    return v;
}

// [5] User online bytes (sent + received) across split points of the 10-block model.
Verdict metering() {
    Verdict v;
    auto model = std::make_shared<const nn::Model>(nn::make_model("mlp10", 1));
    const size_t L = model->num_blocks();
    Prng rng(1005);
    std::vector<std::vector<uint64_t>> xs{nn::random_input(*model, ring::RingParams::desk().t, rng)};
    std::vector<uint64_t> bytes(L + 1);
    std::ostringstream series;
    for (size_t l = L + 1; l-- > 0;) {
        protocol::Options opt;
        opt.l = l;
        opt.seed = 5;
        auto res = protocol::run_local(opt, model, xs);
        const auto& u = res.report.party(Party::User).at(Phase::Online);
        bytes[l] = u.bytes_in + u.bytes_out;
        series << (l == L ? "" : " ") << "l=" << l << ":" << bytes[l];
    }
    std::vector<std::string> rises;
    for (size_t l = L; l-- > 0;)
        if (bytes[l] > bytes[l + 1])
            rises.push_back("l=" + std::to_string(l + 1) + "->" + std::to_string(l) + " +" +
                            std::to_string(bytes[l] - bytes[l + 1]));
    std::string rise_list;
    for (const auto& r : rises) rise_list += (rise_list.empty() ? "" : ", ") + r;
    v.require(rises.empty(), "user online bytes rise at " + rise_list + " [" + series.str() + "]");
    const double ratio = double(bytes[L]) / double(bytes[2]);
    v.require(ratio >= 3.0, "l=L / l=2 ratio " + std::to_string(ratio) + " < 3");
    if (!v.pass) {
        v.detail += "; l=L/l=2 ratio " + std::to_string(ratio);
    } else {
        v.detail = "non-increasing, l=L/l=2 ratio " + std::to_string(ratio);
    }
    return v;
}

// [6] SECO against DELPHI-3, from the end-to-end sessions.
Verdict seco_vs_delphi3(const std::map<FactKey, RunFacts>& facts) {
    Verdict v;
    size_t compared = 0;
    for (const auto& [key, seco] : facts) {
        const auto& [kind, l, mode] = key;
        if (mode != Mode::Seco) continue;
        const auto& d3 = facts.at({kind, l, Mode::Delphi3});
        const std::string where = kind + " l=" + std::to_string(l);
        v.require(seco.predictions == d3.predictions, where + ": predictions differ");
        if (!seco.remote_relu) continue;
        ++compared;
        v.require(seco.online_bytes < d3.online_bytes, where + ": SECO online bytes " + std::to_string(seco.online_bytes) +
                                                           " not below DELPHI-3 " + std::to_string(d3.online_bytes));
        v.require(seco.gateway_remote_msgs == 0,
                  where + ": A exchanged " + std::to_string(seco.gateway_remote_msgs) + " messages on remote blocks");
        v.require(d3.gateway_remote_msgs > 0, where + ": DELPHI-3 A idle on remote blocks");
    }
    v.require(compared > 0, "no configuration with a remote ReLU");
    if (v.pass) v.detail = std::to_string(compared) + " configurations with remote ReLUs compared";
    return v;
}

// [7] Transcript and state audits with payloads kept, plus the masking uniformity test.
Verdict view_hygiene() {
    Verdict v;
    auto model = std::make_shared<const nn::Model>(nn::make_model("minionn", 1));
    const size_t L = model->num_blocks();
    const uint64_t p = ring::RingParams::desk().t;
    Prng in_rng(1007);
    std::vector<std::vector<uint64_t>> xs;
    for (int i = 0; i < 2; ++i) xs.push_back(nn::random_input(*model, p, in_rng));
    size_t runs = 0;
    for (size_t l = 0; l <= L; ++l)
        for (Mode mode : {Mode::Seco, Mode::Delphi3, Mode::Delphi2}) {
            if (mode == Mode::Delphi2 && l != L) continue;
            protocol::Options opt;
            opt.mode = mode;
            opt.l = l;
            opt.seed = 8;
            opt.record = opt.transcript_payloads = true;
            auto res = protocol::run_local(opt, model, xs);
            ++runs;
            const std::string where = "l=" + std::to_string(l) + " " + protocol::mode_name(mode) + ": ";
            auto a = protocol::audit_gateway_view(res, xs);
            auto bc = protocol::audit_remote_view(res);
            auto u = protocol::audit_user_view(res);
            v.require(a.ok(), where + "(a) " + (a.ok() ? "" : a.failures.front()));
            v.require(bc.ok(), where + "(b) " + (bc.ok() ? "" : bc.failures.front()));
            v.require(u.ok(), where + "(c) " + (u.ok() ? "" : u.failures.front()));
        }

    // (d) fixed x, 10^4 fresh masks from the protocol's sampler, 64 equal-width bins.
    Prng mask_rng = Prng(1007).derive("party", 2);
    const std::vector<uint64_t> x{0, p / 3, p - 1};
    constexpr size_t kBins = 64;
    std::vector<std::vector<uint64_t>> counts(x.size(), std::vector<uint64_t>(kBins, 0));
    for (int trial = 0; trial < 10000; ++trial) {
        auto m = protocol::apply_mask(x, protocol::draw_mask(mask_rng, p, x.size()), p);
        for (size_t j = 0; j < x.size(); ++j) ++counts[j][m[j] * kBins / p];
    }
    double min_p = 1;
    for (const auto& c : counts) min_p = std::min(min_p, test::chi_square_uniform_p(c));
    v.require(min_p > 0.01, "(d) uniformity p-value " + std::to_string(min_p) + " <= 0.01");
    if (v.pass)
        v.detail = "(a)-(c) clean on " + std::to_string(runs) + " MiniONN sessions; (d) min p = " + std::to_string(min_p);
    return v;
}

}  // namespace

int main() {
    bool all = true;
    auto run = [&](int id, const std::string& name, double limit, const std::function<Verdict()>& body) {
        std::cerr << "[" << id << "] " << name << " ..." << std::endl;
        const auto t0 = Clock::now();
        Verdict v;
        try {
            v = body();
        } catch (const std::exception& e) {
            v.require(false, std::string("threw: ") + e.what());
        }
        const double secs = seconds_since(t0);
        report(id, name, v, secs, limit);
        all = all && v.pass && secs < limit;
    };

    std::map<FactKey, RunFacts> facts;
    protocol::AuditReport table1;
    size_t table1_runs = 0;
    double e2e_secs = 0;

    run(1, "BFV/MPHE correctness (desk)", 60, he_correctness);
    run(2, "paper-profile smoke", 120, paper_smoke);
    run(3, "GC oracle equivalence", 300, gc_oracle);
    run(4, "end-to-end equivalence, MiniONN and LeNet, all splits and modes", 1200, [&] {
        const auto t0 = Clock::now();
        auto v = end_to_end(facts, table1, table1_runs);
        e2e_secs = seconds_since(t0);
        return v;
    });
    run(5, "metering direction on the 10-block model", 600, metering);
    run(6, "SECO vs DELPHI-3", 60, [&] { return seco_vs_delphi3(facts); });
    run(7, "view hygiene", 600, view_hygiene);
    run(8, "share recombination per layer class", 60, [&] {
        Verdict v;
        v.require(table1_runs > 0, "no preprocessing runs recorded");
        v.require(table1.ok(), table1.ok() ? "" : table1.failures.front());
        if (v.pass) v.detail = "all " + std::to_string(table1_runs) + " preprocessing runs recombine exactly";
        return v;
    });
    std::cerr << "end-to-end sweep took " << e2e_secs << " s" << std::endl;
    return all ? 0 : 1;
}
