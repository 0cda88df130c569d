// Parallel kernels against their serial references. Benchmarks taking a thread
// count run the same kernel with OpenMP limited to that many threads.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "seco/bfv/linop.hpp"
#include "seco/gc/garble.hpp"
#include "seco/ring/ring.hpp"

using namespace seco;

namespace {

ring::ContextPtr desk() {
    static auto ctx = ring::make_context(ring::RingParams::desk());
    return ctx;
}

bfv::ModMatrix random_matrix(size_t rows, size_t cols, uint64_t t, Prng& rng) {
    bfv::ModMatrix f(rows, cols);
    for (auto& v : f.data) v = rng.uniform(t);
    return f;
}

std::vector<uint64_t> random_vec(size_t n, uint64_t t, Prng& rng) {
    std::vector<uint64_t> v(n);
    for (auto& x : v) x = rng.uniform(t);
    return v;
}

void poly_mul_ntt(benchmark::State& st) {
    auto ctx = desk();
    Prng rng(1);
    auto a = ring::sample_uniform(ctx, rng, false), b = ring::sample_uniform(ctx, rng, false);
    for (auto _ : st) benchmark::DoNotOptimize(ring::poly_mul(a, b));
}
BENCHMARK(poly_mul_ntt)->Unit(benchmark::kMicrosecond);

void poly_mul_schoolbook(benchmark::State& st) {
    auto ctx = desk();
    Prng rng(1);
    auto a = ring::sample_uniform(ctx, rng, false), b = ring::sample_uniform(ctx, rng, false);
    for (auto _ : st) benchmark::DoNotOptimize(ring::reference::negacyclic_mul(a, b));
}
BENCHMARK(poly_mul_schoolbook)->Unit(benchmark::kMillisecond);

// Second LeNet block: 800 x 2880.
void matvec(benchmark::State& st) {
    const auto exec = st.range(0) ? bfv::Exec::Parallel : bfv::Exec::Serial;
    const uint64_t t = desk()->params().t;
    Prng rng(2);
    auto f = random_matrix(800, 2880, t, rng);
    auto x = random_vec(2880, t, rng);
    for (auto _ : st) benchmark::DoNotOptimize(bfv::matvec(f, x, t, exec));
}
BENCHMARK(matvec)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

// Homomorphic matrix-vector product for a 100 x 256 block, both packings.
void linop(benchmark::State& st) {
    auto ctx = desk();
    const auto exec = st.range(0) ? bfv::Exec::Parallel : bfv::Exec::Serial;
    const auto mode = st.range(1) ? bfv::LinearOperator::Mode::PreRotated : bfv::LinearOperator::Mode::Rotations;
    bfv::BatchEncoder enc(ctx);
    Prng rng(3);
    auto kp = bfv::keygen(ctx, rng);
    auto f = random_matrix(100, 256, ctx->params().t, rng);
    auto x = random_vec(256, ctx->params().t, rng);
    bfv::LinearOperator op(ctx, f, mode, exec);
    std::vector<bfv::Ciphertext> in;
    if (mode == bfv::LinearOperator::Mode::Rotations) {
        auto gk = bfv::make_galois_keys(kp.sk, rng);
        for (size_t b = 0; b < op.layout().in_blocks; ++b)
            in.push_back(bfv::encrypt(kp.pk, enc.encode(op.input_slots(x, b)), rng));
        for (auto _ : st) benchmark::DoNotOptimize(op.apply(in, gk));
    } else {
        for (size_t i = 0; i < op.packed_inputs(); ++i)
            in.push_back(bfv::encrypt(kp.pk, enc.encode(op.packed_input_slots(x, i)), rng));
        for (auto _ : st) benchmark::DoNotOptimize(op.apply_prerotated(in));
    }
}
BENCHMARK(linop)->ArgNames({"parallel", "prerotated"})->ArgsProduct({{0, 1}, {0, 1}})->Unit(benchmark::kMillisecond);

// Garbling and evaluation of the two-party ReLU over 1000 instances.
void relu_garble(benchmark::State& st) {
    const int saved = omp_get_max_threads();
    omp_set_num_threads(int(st.range(0)));
    const uint64_t p = desk()->params().t;
    auto c = gc::build_relu_circuit_2pc(desk()->plain_bits(), p, 6);
    Prng rng(4);
    for (auto _ : st) benchmark::DoNotOptimize(gc::garble(c, 1000, rng));
    omp_set_num_threads(saved);
}
BENCHMARK(relu_garble)->ArgName("threads")->Arg(1)->Arg(omp_get_num_procs())->Unit(benchmark::kMillisecond);

void relu_evaluate(benchmark::State& st) {
    const int saved = omp_get_max_threads();
    omp_set_num_threads(int(st.range(0)));
    const uint64_t p = desk()->params().t;
    auto c = gc::build_relu_circuit_2pc(desk()->plain_bits(), p, 6);
    Prng rng(5);
    auto g = gc::garble(c, 1000, rng);
    gc::InputLabels in(c, 1000);
    for (const auto& group : c.inputs) in.set(group, g.encoding.encode(group, random_vec(1000, p, rng)));
    for (auto _ : st) benchmark::DoNotOptimize(gc::evaluate_words(c, g.gc, in));
    omp_set_num_threads(saved);
}
BENCHMARK(relu_evaluate)->ArgName("threads")->Arg(1)->Arg(omp_get_num_procs())->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
