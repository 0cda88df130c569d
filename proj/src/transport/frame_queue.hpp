#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <optional>
#include <vector>

#include "seco/common/error.hpp"

namespace seco::transport {

// Blocking FIFO of frames. After close, queued frames still drain; then pop throws.
class FrameQueue {
public:
    bool push(std::vector<uint8_t> frame) {
        {
            std::lock_guard<std::mutex> lock(mu_);
            if (closed_) return false;
            q_.push_back(std::move(frame));
        }
        cv_.notify_one();
        return true;
    }

    std::optional<std::vector<uint8_t>> pop(std::chrono::milliseconds timeout) {
        std::unique_lock<std::mutex> lock(mu_);
        if (!cv_.wait_for(lock, timeout, [&] { return !q_.empty() || closed_; })) return std::nullopt;
        if (q_.empty()) throw ChannelClosed(reason_.empty() ? "channel closed" : reason_);
        auto f = std::move(q_.front());
        q_.pop_front();
        return f;
    }

    void close(std::string reason = {}) {
        {
            std::lock_guard<std::mutex> lock(mu_);
            if (closed_) return;
            closed_ = true;
            reason_ = std::move(reason);
        }
        cv_.notify_all();
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<std::vector<uint8_t>> q_;
    bool closed_ = false;
    std::string reason_;
};

}  // namespace seco::transport
