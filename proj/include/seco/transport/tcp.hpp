#pragma once

#include <array>
#include <chrono>
#include <memory>
#include <optional>
#include <string>

#include "seco/transport/channel.hpp"

namespace seco::transport {

struct Address {
    std::string host;
    uint16_t port = 0;
};

// Where each party listens. Parsed from "user=h:p,a=h:p,b=h:p,c=h:p" or from a
// JSON file {"user": "h:p", ...}.
struct AddressMap {
    std::array<std::optional<Address>, kNumParties> at;

    static AddressMap parse(const std::string& spec);
    static AddressMap load(const std::string& path);
};

// Connects `self` to every other party listed in the map: parties with lower ids
// accept, higher ids dial (retrying until `connect_timeout`).
std::unique_ptr<Endpoint> connect_tcp(Party self, const AddressMap& addrs,
                                      std::chrono::milliseconds connect_timeout = std::chrono::seconds(30),
                                      std::chrono::milliseconds recv_timeout = std::chrono::minutes(10));

}  // namespace seco::transport
