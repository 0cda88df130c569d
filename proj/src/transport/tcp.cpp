#include "seco/transport/tcp.hpp"

#include <boost/asio.hpp>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "frame_queue.hpp"
#include "seco/common/error.hpp"

namespace seco::transport {

namespace asio = boost::asio;
using asio::ip::tcp;

namespace {

Address parse_address(const std::string& s) {
    auto colon = s.rfind(':');
    if (colon == std::string::npos || colon == 0) throw ConfigError("address '" + s + "' is not host:port");
    Address a;
    a.host = s.substr(0, colon);
    unsigned long port = 0;
    try {
        port = std::stoul(s.substr(colon + 1));
    } catch (const std::exception&) {
        throw ConfigError("bad port in '" + s + "'");
    }
    if (port == 0 || port > 65535) throw ConfigError("bad port in '" + s + "'");
    a.port = static_cast<uint16_t>(port);
    return a;
}

// Frames in, frames out over one socket. A reader thread drains the socket into a
// queue so two parties sending large payloads at each other cannot deadlock.
class TcpLink : public Link {
public:
    TcpLink(std::shared_ptr<asio::io_context> io, tcp::socket sock) : io_(std::move(io)), sock_(std::move(sock)) {
        sock_.set_option(tcp::no_delay(true));
        reader_ = std::thread([this] { read_loop(); });
    }
    ~TcpLink() override {
        close();
        if (reader_.joinable()) reader_.join();
        boost::system::error_code ec;
        sock_.close(ec);
    }

    void write(std::vector<uint8_t> frame) override {
        std::lock_guard<std::mutex> lock(write_mu_);
        boost::system::error_code ec;
        asio::write(sock_, asio::buffer(frame), ec);
        if (ec) throw ChannelClosed("tcp write failed: " + ec.message());
    }

    std::optional<std::vector<uint8_t>> read(std::chrono::milliseconds timeout) override { return in_.pop(timeout); }

    void close() override {
        std::lock_guard<std::mutex> lock(write_mu_);
        if (closed_) return;
        closed_ = true;
        // Shutdown unblocks the reader; the descriptor is released after it exits.
        boost::system::error_code ec;
        sock_.shutdown(tcp::socket::shutdown_both, ec);
    }

private:
    void read_loop() {
        try {
            for (;;) {
                std::vector<uint8_t> frame(kFrameHeaderBytes);
                asio::read(sock_, asio::buffer(frame));
                auto h = decode_frame_header(std::span<const uint8_t, kFrameHeaderBytes>(frame.data(), kFrameHeaderBytes));
                frame.resize(kFrameHeaderBytes + h.length);
                asio::read(sock_, asio::buffer(frame.data() + kFrameHeaderBytes, h.length));
                if (!in_.push(std::move(frame))) return;
            }
        } catch (const std::exception& e) {
            in_.close(std::string("tcp peer closed: ") + e.what());
        }
    }

    std::shared_ptr<asio::io_context> io_;  // outlives the socket
    tcp::socket sock_;
    std::mutex write_mu_;
    bool closed_ = false;
    FrameQueue in_;
    std::thread reader_;
};

tcp::endpoint resolve(asio::io_context& io, const Address& a) {
    tcp::resolver r(io);
    auto results = r.resolve(a.host, std::to_string(a.port));
    if (results.empty()) throw ConfigError("cannot resolve " + a.host);
    return *results.begin();
}

}  // namespace

AddressMap AddressMap::parse(const std::string& spec) {
    AddressMap m;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("address entry '" + item + "' is not party=host:port");
        m.at[static_cast<size_t>(party_from_name(item.substr(0, eq)))] = parse_address(item.substr(eq + 1));
    }
    return m;
}

AddressMap AddressMap::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open address map " + path);
    AddressMap m;
    try {
        auto j = nlohmann::json::parse(in);
        for (auto& [name, v] : j.items())
            m.at[static_cast<size_t>(party_from_name(name))] = parse_address(v.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad address map: ") + e.what());
    }
    return m;
}

std::unique_ptr<Endpoint> connect_tcp(Party self, const AddressMap& addrs, std::chrono::milliseconds connect_timeout,
                                      std::chrono::milliseconds recv_timeout) {
    const size_t me = static_cast<size_t>(self);
    if (!addrs.at[me]) throw ConfigError(std::string("no address for party ") + party_name(self));
    auto io = std::make_shared<asio::io_context>();
    auto& ioc = *io;
    auto ep = std::make_unique<Endpoint>(self, recv_timeout);

    size_t expected_in = 0;
    for (size_t j = me + 1; j < kNumParties; ++j)
        if (addrs.at[j]) ++expected_in;

    std::optional<tcp::acceptor> acceptor;
    if (expected_in > 0) {
        acceptor.emplace(ioc);
        tcp::endpoint local = resolve(ioc, *addrs.at[me]);
        acceptor->open(local.protocol());
        acceptor->set_option(tcp::acceptor::reuse_address(true));
        acceptor->bind(local);
        acceptor->listen();
        acceptor->non_blocking(true);
    }

    // Dial the lower-numbered parties, then accept the higher-numbered ones.
    const auto deadline = std::chrono::steady_clock::now() + connect_timeout;
    for (size_t j = 0; j < me; ++j) {
        if (!addrs.at[j]) continue;
        tcp::endpoint remote = resolve(ioc, *addrs.at[j]);
        for (;;) {
            tcp::socket sock(ioc);
            boost::system::error_code ec;
            sock.connect(remote, ec);
            if (!ec) {
                uint8_t hello = static_cast<uint8_t>(me);
                asio::write(sock, asio::buffer(&hello, 1));
                ep->attach(static_cast<Party>(j), std::make_unique<TcpLink>(io, std::move(sock)));
                break;
            }
            if (std::chrono::steady_clock::now() > deadline)
                throw TimeoutError(std::string("cannot reach party ") + party_name(static_cast<Party>(j)));
            std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
    }
    for (size_t k = 0; k < expected_in; ++k) {
        tcp::socket sock(ioc);
        for (;;) {
            boost::system::error_code ec;
            acceptor->accept(sock, ec);
            if (!ec) break;
            if (ec != asio::error::would_block && ec != asio::error::try_again)
                throw ProtocolError("tcp accept failed: " + ec.message());
            if (std::chrono::steady_clock::now() > deadline) throw TimeoutError("peers did not connect in time");
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
        }
        sock.non_blocking(false);
        uint8_t hello = 0;
        asio::read(sock, asio::buffer(&hello, 1));
        if (hello <= me || hello >= kNumParties || !addrs.at[hello])
            throw ProtocolError("unexpected tcp peer id " + std::to_string(hello));
        Party peer = static_cast<Party>(hello);
        if (ep->connected(peer)) throw ProtocolError("duplicate tcp connection");
        ep->attach(peer, std::make_unique<TcpLink>(io, std::move(sock)));
    }
    return ep;
}

}  // namespace seco::transport
