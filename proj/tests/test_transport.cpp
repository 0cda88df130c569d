#include <doctest.h>

#include <thread>

#include "seco/common/error.hpp"
#include "seco/transport/channel.hpp"
#include "seco/transport/tcp.hpp"

using namespace seco;
using namespace seco::transport;

namespace {

// A small scripted exchange: A and B ping-pong, then A broadcasts to C.
void script(Endpoint& ep) {
    std::vector<uint8_t> payload(64, 0x5a);
    ep.set_phase(Phase::Online);
    ep.set_layer(3);
    switch (ep.self()) {
        case Party::A:
            for (int i = 0; i < 5; ++i) {
                ep.send(Party::B, 7, payload);
                ep.recv(Party::B, 8);
            }
            ep.send(Party::C, 9, payload);
            ep.send(Party::C, 9, payload);
            break;
        case Party::B:
            for (int i = 0; i < 5; ++i) {
                auto got = ep.recv(Party::A, 7);
                REQUIRE(got == payload);
                ep.send(Party::A, 8, std::vector<uint8_t>(10, 1));
            }
            break;
        case Party::C:
            ep.recv(Party::A, 9);
            ep.recv(Party::A, 9);
            break;
        default:
            break;
    }
}

MetricsReport run_script(std::array<std::unique_ptr<Endpoint>, kNumParties>& eps) {
    std::vector<std::thread> threads;
    for (auto& ep : eps) threads.emplace_back([&ep] { script(*ep); });
    for (auto& t : threads) t.join();
    MetricsReport r;
    r.run_id = "script";
    r.mode = "test";
    for (size_t i = 0; i < kNumParties; ++i) r.parties[i] = eps[i]->finish();
    return r;
}

uint16_t free_port_base() {
    // Spread test runs over a range to avoid collisions with lingering sockets.
    return static_cast<uint16_t>(20000 + (std::chrono::steady_clock::now().time_since_epoch().count() / 1000) % 20000);
}

std::array<std::unique_ptr<Endpoint>, kNumParties> tcp_network(uint16_t base) {
    AddressMap m;
    for (size_t i = 0; i < kNumParties; ++i) m.at[i] = Address{"127.0.0.1", static_cast<uint16_t>(base + i)};
    std::array<std::unique_ptr<Endpoint>, kNumParties> eps;
    std::vector<std::thread> threads;
    for (size_t i = 0; i < kNumParties; ++i)
        threads.emplace_back([&, i] { eps[i] = connect_tcp(static_cast<Party>(i), m, std::chrono::seconds(10)); });
    for (auto& t : threads) t.join();
    return eps;
}

}  // namespace

TEST_CASE("frame header round trip") {
    Frame f;
    f.sender = Party::B;
    f.receiver = Party::C;
    f.phase = Phase::Preprocess;
    f.layer = 0x1234;
    f.kind = 0xBEEF;
    f.payload = {1, 2, 3};
    auto bytes = encode_frame(f);
    REQUIRE(bytes.size() == kFrameHeaderBytes + 3);
    auto h = decode_frame_header(std::span<const uint8_t, kFrameHeaderBytes>(bytes.data(), kFrameHeaderBytes));
    CHECK(h.length == 3);
    CHECK(h.meta.sender == Party::B);
    CHECK(h.meta.receiver == Party::C);
    CHECK(h.meta.phase == Phase::Preprocess);
    CHECK(h.meta.layer == 0x1234);
    CHECK(h.meta.kind == 0xBEEF);
    bytes[6] = 9;
    CHECK_THROWS_AS(decode_frame_header(std::span<const uint8_t, kFrameHeaderBytes>(bytes.data(), kFrameHeaderBytes)),
                    SerializationError);
}

TEST_CASE("byte accounting counts header and payload") {
    auto eps = make_local_network();
    std::vector<uint8_t> p(64, 0);
    for (int i = 0; i < 100; ++i) eps[1]->send(Party::B, 1, p);
    for (int i = 0; i < 100; ++i) eps[2]->recv(Party::A, 1);
    auto a = eps[1]->finish(), b = eps[2]->finish();
    CHECK(a.at(Phase::Setup).bytes_out == 100 * (64 + kFrameHeaderBytes));
    CHECK(a.at(Phase::Setup).msgs_out == 100);
    CHECK(b.at(Phase::Setup).bytes_in == 100 * (64 + kFrameHeaderBytes));
    CHECK(a.peers[2].phases[0].bytes_out == 100 * (64 + kFrameHeaderBytes));
    // A one-way burst is one round.
    CHECK(a.at(Phase::Setup).rounds == 1);
}

TEST_CASE("rounds count alternations per directed pair") {
    auto eps = make_local_network();
    auto r = run_script(eps);
    const auto& a = r.party(Party::A);
    CHECK(a.peers[2].phases[2].rounds == 5);  // five ping-pongs with B
    CHECK(a.peers[3].phases[2].rounds == 1);  // one burst to C
    CHECK(r.party(Party::B).peers[1].phases[2].rounds == 5);
    CHECK(r.party(Party::User).at(Phase::Online).msgs_out == 0);
}

TEST_CASE("phase and layer mismatches are rejected") {
    auto eps = make_local_network();
    eps[1]->set_layer(2);
    eps[1]->send(Party::B, 5, std::vector<uint8_t>{1});
    eps[2]->set_layer(3);
    CHECK_THROWS_AS(eps[2]->recv(Party::A, 5), ProtocolError);
    eps[1]->send(Party::B, 5, std::vector<uint8_t>{1});
    eps[2]->set_layer(2);
    CHECK_THROWS_AS(eps[2]->recv(Party::A, 6), ProtocolError);
}

TEST_CASE("recv on a closed channel fails instead of hanging") {
    auto eps = make_local_network();
    eps[1]->close();
    CHECK_THROWS_AS(eps[2]->recv(Party::A, 1), ChannelClosed);
    auto fast = make_local_network(std::chrono::milliseconds(50));
    CHECK_THROWS_AS(fast[3]->recv(Party::B, 1), TimeoutError);
}

TEST_CASE("queued frames drain before the close is reported") {
    auto eps = make_local_network();
    eps[1]->send(Party::B, 1, std::vector<uint8_t>{4});
    eps[1]->close();
    CHECK(eps[2]->recv(Party::A, 1) == std::vector<uint8_t>{4});
    CHECK_THROWS_AS(eps[2]->recv(Party::A, 1), ChannelClosed);
}

TEST_CASE("tcp and in-process transports meter identically") {
    auto local = make_local_network();
    auto r_local = run_script(local);
    auto tcp = tcp_network(free_port_base());
    auto r_tcp = run_script(tcp);
    CHECK(r_local.same_traffic(r_tcp));
    for (auto& e : tcp) e->close();
}

TEST_CASE("tcp recv after the peer closes reports ChannelClosed") {
    auto tcp = tcp_network(free_port_base());
    tcp[1]->close();
    CHECK_THROWS_AS(tcp[2]->recv(Party::A, 1), ChannelClosed);
    for (auto& e : tcp) e->close();
}

TEST_CASE("transcript records direction, layer and payload") {
    auto eps = make_local_network();
    eps[0]->record_transcript(true);
    eps[0]->set_layer(4);
    eps[1]->set_layer(4);
    eps[0]->send(Party::A, 2, std::vector<uint8_t>{9, 9});
    eps[1]->recv(Party::User, 2);
    REQUIRE(eps[0]->transcript().size() == 1);
    const auto& t = eps[0]->transcript()[0];
    CHECK(t.outgoing);
    CHECK(t.peer == Party::A);
    CHECK(t.layer == 4);
    CHECK(t.bytes == 2 + kFrameHeaderBytes);
    CHECK(t.payload == std::vector<uint8_t>{9, 9});
}

TEST_CASE("metrics report json round trip") {
    auto eps = make_local_network();
    auto r = run_script(eps);
    r.l = 3;
    auto back = MetricsReport::from_json(r.to_json());
    CHECK(back == r);
    CHECK_THROWS_AS(MetricsReport::from_json("{\"run_id\": 1}"), SerializationError);
}

TEST_CASE("address map parsing") {
    auto m = AddressMap::parse("user=127.0.0.1:7000,a=localhost:7001");
    REQUIRE(m.at[0]);
    CHECK(m.at[0]->port == 7000);
    CHECK(m.at[1]->host == "localhost");
    CHECK_FALSE(m.at[2]);
    CHECK_THROWS_AS(AddressMap::parse("x=1.2.3.4:5"), ConfigError);
    CHECK_THROWS_AS(AddressMap::parse("a=1.2.3.4"), ConfigError);
    CHECK_THROWS_AS(AddressMap::parse("a=1.2.3.4:99999"), ConfigError);
}
