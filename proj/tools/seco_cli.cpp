// seco: run, verify and sweep split-model inference sessions.
//
//   seco make-model --kind minionn --out minionn.json
//   seco run --model minionn --l 2 --mode seco --inputs 3 --out metrics.json
//   seco run --model m.json --l 2 --transport tcp --party b --addrs hosts.json
//   seco verify --model lenet
//   seco sweep --model mlp10 --l 0,2,4,6,8,10 --out sweep.json
//
// --model takes a model file or the name of a bundled structure (minionn, lenet,
// mlp10; a ".toy" suffix is accepted), generated from --model-seed.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "seco/common/error.hpp"
#include "seco/protocol/audit.hpp"
#include "seco/transport/tcp.hpp"

using namespace seco;
using protocol::Mode;
using transport::Party;

namespace {

constexpr int kConfigExit = 2;
constexpr int kProtocolExit = 1;

struct Common {
    std::string model = "minionn";
    uint64_t model_seed = 1;
    std::string profile = "desk";
    std::string mode = "seco";
    uint64_t seed = 1;
    std::string input;
    size_t inputs = 1;
    bool zero_randomness = false, dealer_ot = false;
    size_t corrupt_block = 0;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--model", c.model, "model file or bundled structure name");
    cmd->add_option("--model-seed", c.model_seed, "seed for a bundled structure's weights");
    cmd->add_option("--profile", c.profile, "parameter profile")->check(CLI::IsMember({"desk", "paper"}));
    cmd->add_option("--seed", c.seed, "session seed (masks, keys, weight shares)");
    cmd->add_option("--input", c.input, "file with one fixed-point input vector per line");
    cmd->add_option("--inputs", c.inputs, "number of random inputs when --input is absent");
#ifdef SECO_INSECURE_TEST_MODES
    auto* g = cmd->add_option_group("insecure test switches");
    g->add_flag("--zero-randomness", c.zero_randomness, "all masks zero");
    g->add_flag("--dealer-ot", c.dealer_ot, "trusted-dealer OT instead of IKNP");
    g->add_option("--corrupt-block", c.corrupt_block, "perturb one block's preprocessed share");
#endif
}

std::shared_ptr<const nn::Model> load(const Common& c) {
    if (std::filesystem::exists(c.model)) return std::make_shared<const nn::Model>(nn::load_model(c.model));
    std::string kind = c.model;
    if (kind.ends_with(".toy")) kind.resize(kind.size() - 4);
    for (const auto& k : nn::model_kinds())
        if (k == kind) return std::make_shared<const nn::Model>(nn::make_model(kind, c.model_seed));
    throw ConfigError("no model file or bundled structure named '" + c.model + "'");
}

ring::RingParams params(const Common& c) { return c.profile == "paper" ? ring::RingParams::paper() : ring::RingParams::desk(); }

protocol::Options options(const Common& c, size_t l) {
    protocol::Options o;
    o.mode = protocol::mode_from_name(c.mode);
    o.l = l;
    o.params = params(c);
    o.seed = c.seed;
    o.test.zero_randomness = c.zero_randomness;
    o.test.dealer_ot = c.dealer_ot;
    o.test.corrupt_block = c.corrupt_block;
    return o;
}

std::vector<std::vector<uint64_t>> read_inputs(const Common& c, const nn::Model& m, uint64_t p) {
    std::vector<std::vector<uint64_t>> xs;
    if (c.input.empty()) {
        Prng rng = Prng(c.seed).derive("cli-inputs");
        for (size_t i = 0; i < c.inputs; ++i) xs.push_back(nn::random_input(m, p, rng));
        return xs;
    }
    std::ifstream f(c.input);
    if (!f) throw ConfigError("cannot open input file " + c.input);
    std::string line;
    while (std::getline(f, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        for (char& ch : line)
            if (ch == ',') ch = ' ';
        std::istringstream in(line);
        std::vector<uint64_t> x;
        int64_t v;
        while (in >> v) x.push_back(static_cast<uint64_t>(((v % int64_t(p)) + int64_t(p)) % int64_t(p)));
        if (!in.eof()) throw ConfigError("input file: not an integer in '" + line + "'");
        if (x.empty()) continue;
        if (x.size() != m.input_size())
            throw ConfigError("input file: vector of " + std::to_string(x.size()) + " values, model takes " +
                              std::to_string(m.input_size()));
        xs.push_back(std::move(x));
    }
    if (xs.empty()) throw ConfigError("input file has no vectors");
    return xs;
}

void print_predictions(const std::vector<std::vector<uint64_t>>& ys, const nn::Model& m, uint64_t p) {
    const nn::FixedPoint fp{m.scale, p};
    for (const auto& y : ys) {
        for (size_t i = 0; i < y.size(); ++i) std::cout << (i ? " " : "") << fp.centered(y[i]);
        std::cout << "\n";
    }
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path);
    f << text << "\n";
}

std::vector<size_t> parse_splits(const std::string& spec, size_t L) {
    std::vector<size_t> ls;
    if (spec.empty() || spec == "all") {
        for (size_t l = 0; l <= L; ++l) ls.push_back(l);
        return ls;
    }
    std::istringstream in(spec);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        try {
            size_t used = 0;
            const size_t l = std::stoul(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            ls.push_back(l);
        } catch (const std::logic_error&) {
            throw ConfigError("bad split list '" + spec + "'");
        }
    }
    return ls;
}

int cmd_run(const Common& c, size_t l, const std::string& out, const std::string& transport_kind,
            const std::string& party, const std::string& addrs) {
    auto model = load(c);
    auto opt = options(c, l);
    const uint64_t p = opt.params.t;
    auto xs = read_inputs(c, *model, p);

    if (transport_kind == "local") {
        auto res = protocol::run_local(opt, model, xs);
        print_predictions(res.predictions, *model, p);
        if (!out.empty()) write_file(out, res.report.to_json());
        return 0;
    }
    if (party.empty() || addrs.empty()) throw ConfigError("tcp transport needs --party and --addrs");
    const Party self = transport::party_from_name(party);
    const auto map = std::filesystem::exists(addrs) ? transport::AddressMap::load(addrs) : transport::AddressMap::parse(addrs);
    protocol::check_options(opt, *model);
    auto ep = transport::connect_tcp(self, map);
    auto outcome = protocol::run_party(*ep, opt, model, xs, xs.size());
    if (self == Party::User) print_predictions(outcome.predictions, *model, p);
    if (!out.empty()) {
        transport::MetricsReport rep;
        rep.run_id = "seed-" + std::to_string(opt.seed);
        rep.mode = c.mode;
        rep.l = static_cast<int>(l);
        rep.parties[static_cast<size_t>(self)] = outcome.metrics;
        write_file(out, rep.to_json());
    }
    return 0;
}

int cmd_verify(const Common& c, const std::string& splits, const std::string& modes) {
    auto model = load(c);
    const size_t L = model->num_blocks();
    const auto base = options(c, 0);
    const uint64_t p = base.params.t;
    auto xs = read_inputs(c, *model, p);
    std::vector<Mode> ms;
    if (modes == "all")
        ms = {Mode::Seco, Mode::Delphi3, Mode::Delphi2};
    else
        ms = {protocol::mode_from_name(modes)};

    bool all_ok = true;
    for (size_t l : parse_splits(splits, L))
        for (Mode mode : ms) {
            if (mode == Mode::Delphi2 && l != L) continue;
            auto opt = base;
            opt.mode = mode;
            opt.l = l;
            opt.record = opt.transcript_payloads = true;
            auto res = protocol::run_local(opt, model, xs);

            std::string verdict = "PASS";
            for (size_t k = 0; k < xs.size(); ++k) {
                if (res.predictions[k] == nn::plaintext_infer(*model, p, xs[k])) continue;
                auto at = protocol::first_divergent_block(res, xs, k);
                verdict = "FAIL output mismatch on input " + std::to_string(k) + ", first divergent block " +
                          (at ? std::to_string(*at) : std::string("unknown"));
                break;
            }
            protocol::AuditReport audits;
            audits.merge(protocol::audit_shares(res));
            audits.merge(protocol::audit_gateway_view(res, xs));
            audits.merge(protocol::audit_remote_view(res));
            audits.merge(protocol::audit_user_view(res));
            if (verdict == "PASS" && !audits.ok()) verdict = "FAIL audit: " + audits.failures.front();
            all_ok = all_ok && verdict == "PASS";
            std::cout << model->name << " l=" << l << " " << protocol::mode_name(mode) << " " << verdict << std::endl;
        }
    return all_ok ? 0 : kProtocolExit;
}

int cmd_sweep(const Common& c, const std::string& splits, const std::string& out) {
    auto model = load(c);
    auto xs = read_inputs(c, *model, params(c).t);
    nlohmann::json reports = nlohmann::json::array();
    for (size_t l : parse_splits(splits, model->num_blocks())) {
        auto res = protocol::run_local(options(c, l), model, xs);
        reports.push_back(nlohmann::json::parse(res.report.to_json()));
        const auto& u = res.report.party(Party::User).at(transport::Phase::Online);
        std::cout << "l=" << l << " user_online_bytes=" << u.bytes_in + u.bytes_out << std::endl;
    }
    if (!out.empty()) write_file(out, reports.dump(2));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Split-model secure inference: a user, gateway server A and remote servers B and C"};
    app.require_subcommand(1);

    Common c;
    size_t l = 0;
    std::string out, transport_kind = "local", party, addrs, splits = "all", modes = "all";
    auto* run = app.add_subcommand("run", "run a session and print predictions, one vector per line");
    add_common(run, c);
    run->add_option("--mode", c.mode, "seco, delphi3 or delphi2");
    run->add_option("--l", l, "split point: blocks 1..l on the gateway")->required();
    run->add_option("--out", out, "metrics report (JSON)");
    run->add_option("--transport", transport_kind, "local or tcp")->check(CLI::IsMember({"local", "tcp"}));
    run->add_option("--party", party, "tcp: which party this process runs (user, a, b, c)");
    run->add_option("--addrs", addrs, "tcp: address map file or user=h:p,a=h:p,b=h:p,c=h:p");

    auto* verify = app.add_subcommand("verify", "compare with the plaintext oracle and audit every run");
    add_common(verify, c);
    verify->add_option("--l", splits, "comma-separated split points or 'all'");
    verify->add_option("--mode", modes, "seco, delphi3, delphi2 or all");

    auto* sweep = app.add_subcommand("sweep", "metrics for a list of split points");
    add_common(sweep, c);
    sweep->add_option("--mode", c.mode, "seco, delphi3 or delphi2");
    sweep->add_option("--l", splits, "comma-separated split points or 'all'");
    sweep->add_option("--out", out, "JSON array of metrics reports");

    std::string kind, model_out;
    uint64_t kind_seed = 1;
    auto* make = app.add_subcommand("make-model", "write a bundled structure with synthetic weights");
    make->add_option("--kind", kind, "minionn, lenet or mlp10")->required();
    make->add_option("--seed", kind_seed, "weight seed");
    make->add_option("--out", model_out, "output file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigExit;
    }

    try {
        if (*run) return cmd_run(c, l, out, transport_kind, party, addrs);
        if (*verify) return cmd_verify(c, splits, modes);
        if (*sweep) return cmd_sweep(c, splits, out);
        nn::save_model(nn::make_model(kind, kind_seed), model_out);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigExit;
    } catch (const std::exception& e) {
        std::cerr << "protocol error: " << e.what() << "\n";
        return kProtocolExit;
    }
}
