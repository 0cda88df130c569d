#pragma once

#include <memory>
#include <span>
#include <vector>

#include "seco/protocol/protocol.hpp"

namespace seco::protocol {

// Step-wise party state machines. Each online() consumes the share record left by the
// preceding preprocess(); calling it again without preprocessing throws ProtocolError
// before any message is sent.

class UserParty {
public:
    UserParty(transport::Endpoint& ep, const Options& opt, const UserView& view);
    ~UserParty();
    void preprocess();
    std::vector<uint64_t> online(std::span<const uint64_t> x);
    Record take_record();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

class GatewayParty {
public:
    GatewayParty(transport::Endpoint& ep, const Options& opt, const GatewayModel& model);
    ~GatewayParty();
    void setup();
    void preprocess();
    void online();
    Record take_record();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Server B or C, by the endpoint's identity.
class RemoteParty {
public:
    RemoteParty(transport::Endpoint& ep, const Options& opt, const RemoteModel& model);
    ~RemoteParty();
    void setup();
    void preprocess();
    void online();
    Record take_record();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace seco::protocol
