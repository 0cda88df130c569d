#include <exception>
#include <thread>

#include "seco/common/error.hpp"
#include "seco/protocol/protocol.hpp"

namespace seco::protocol {

Deployment deploy(const nn::ModelSplit& split) {
    const nn::Model& model = *split.model;
    const size_t L = model.num_blocks(), l = split.l;
    std::vector<BlockShape> shapes;
    for (const auto& b : model.blocks)
        shapes.push_back(BlockShape{static_cast<uint32_t>(b.rows), static_cast<uint32_t>(b.cols), b.shift, b.relu});

    Deployment d;
    d.l = l;
    d.user.input_size = model.input_size();
    d.user.output_size = model.output_size();
    d.user.gateway.assign(shapes.begin(), shapes.begin() + static_cast<long>(l));
    if (l < L) d.user.transition = shapes[l];

    d.a.shapes = shapes;
    d.a.f = split.gateway;
    d.a.bias = split.gateway_bias;
    d.b.shapes = d.c.shapes = shapes;
    for (const auto& r : split.remote) {
        d.b.f.push_back(r.f2);
        d.b.bias.push_back(r.b2);
        d.c.f.push_back(r.f3);
        d.c.bias.push_back(r.b3);
    }
    return d;
}

void check_options(const Options& opt, const nn::Model& model) {
    const size_t L = model.num_blocks();
    if (opt.l > L)
        throw ConfigError("split point l=" + std::to_string(opt.l) + " exceeds the block count L=" + std::to_string(L));
    if (opt.mode == Mode::Delphi2 && opt.l != L)
        throw ConfigError("delphi2 runs the whole model on the gateway and requires l = L = " + std::to_string(L));
    opt.params.validate();
    if (opt.params.t >= (uint64_t(1) << 62)) throw ConfigError("plaintext modulus too large for the circuits");
    if (opt.test.corrupt_block > L) throw ConfigError("corrupt block index exceeds the block count");
#ifdef SECO_INSECURE_TEST_MODES
    if (opt.test.dealer_ot && !opt.dealer) throw ConfigError("dealer OT selected but no dealer supplied");
#else
    if (opt.test.any()) throw ConfigError("test switches need a build with SECO_INSECURE_TEST_MODES");
#endif
}

SessionResult run_session(const Options& opt_in, std::shared_ptr<const nn::Model> model,
                          const std::vector<std::vector<uint64_t>>& inputs,
                          const std::array<transport::Endpoint*, transport::kNumParties>& eps) {
    if (!model) throw ConfigError("no model");
    Options opt = opt_in;
#ifdef SECO_INSECURE_TEST_MODES
    if (opt.test.dealer_ot && !opt.dealer) opt.dealer = std::make_shared<gc::OtDealer>();
#endif
    check_options(opt, *model);
    for (const auto& x : inputs)
        if (x.size() != model->input_size()) throw ConfigError("input length does not match the model");

    SessionResult result;
    Prng split_rng = Prng(opt.seed).derive("weight-shares");
    result.split = nn::split_model(model, opt.l, opt.params.t, split_rng);
    const Deployment dep = deploy(result.split);

    for (auto* ep : eps)
        if (!ep) throw ConfigError("session needs an endpoint for every party");
    for (auto* ep : eps)
        if (opt.record) ep->record_transcript(opt.transcript_payloads);

    std::array<std::exception_ptr, transport::kNumParties> errors{};
    auto guarded = [&](Party p, auto body) {
        const size_t i = static_cast<size_t>(p);
        try {
            result.parties[i] = body();
        } catch (...) {
            errors[i] = std::current_exception();
            eps[i]->close();
        }
    };

    const bool servers = opt.mode != Mode::Delphi2;
    std::vector<std::thread> threads;
    threads.emplace_back(guarded, Party::User, [&] { return run_user(*eps[0], opt, dep.user, inputs); });
    threads.emplace_back(guarded, Party::A, [&] { return run_server_a(*eps[1], opt, dep.a, inputs.size()); });
    if (servers) {
        threads.emplace_back(guarded, Party::B, [&] { return run_server_remote(*eps[2], opt, dep.b, inputs.size()); });
        threads.emplace_back(guarded, Party::C, [&] { return run_server_remote(*eps[3], opt, dep.c, inputs.size()); });
    }
    for (auto& t : threads) t.join();
    if (!servers)
        for (Party p : {Party::B, Party::C}) result.parties[static_cast<size_t>(p)].party = p;

    // Report the failure that started the cascade, not the closed channels it caused.
    std::exception_ptr first;
    for (auto& e : errors) {
        if (!e) continue;
        try {
            std::rethrow_exception(e);
        } catch (const ChannelClosed&) {
            if (!first) first = e;
        } catch (...) {
            std::rethrow_exception(e);
        }
    }
    if (first) std::rethrow_exception(first);

    result.predictions = result.party(Party::User).predictions;
    result.report.run_id = "seed-" + std::to_string(opt.seed);
    result.report.mode = mode_name(opt.mode);
    result.report.l = static_cast<int>(opt.l);
    for (size_t i = 0; i < transport::kNumParties; ++i) result.report.parties[i] = result.parties[i].metrics;
    return result;
}

PartyOutcome run_party(transport::Endpoint& ep, const Options& opt, std::shared_ptr<const nn::Model> model,
                       const std::vector<std::vector<uint64_t>>& inputs, size_t inferences) {
    if (!model) throw ConfigError("no model");
    check_options(opt, *model);
    Prng split_rng = Prng(opt.seed).derive("weight-shares");
    const Deployment dep = deploy(nn::split_model(model, opt.l, opt.params.t, split_rng));
    if (opt.record) ep.record_transcript(opt.transcript_payloads);
    switch (ep.self()) {
        case Party::User:
            for (const auto& x : inputs)
                if (x.size() != model->input_size()) throw ConfigError("input length does not match the model");
            return run_user(ep, opt, dep.user, inputs);
        case Party::A: return run_server_a(ep, opt, dep.a, inferences);
        case Party::B: return run_server_remote(ep, opt, dep.b, inferences);
        case Party::C: return run_server_remote(ep, opt, dep.c, inferences);
    }
    throw ConfigError("unknown party");
}

SessionResult run_local(const Options& opt, std::shared_ptr<const nn::Model> model,
                        const std::vector<std::vector<uint64_t>>& inputs) {
    auto net = transport::make_local_network();
    std::array<transport::Endpoint*, transport::kNumParties> eps{};
    for (size_t i = 0; i < eps.size(); ++i) eps[i] = net[i].get();
    return run_session(opt, std::move(model), inputs, eps);
}

}  // namespace seco::protocol
