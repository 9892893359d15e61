#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <utility>

#include "auditshare/bytes.hpp"

namespace auditshare {

// Ordered reliable byte stream. Implementations: in-process loopback pipe
// and TCP sockets. recv_exact blocks; a closed peer raises ChannelClosed.
class ByteChannel {
  public:
    virtual ~ByteChannel() = default;
    virtual void send(BytesView data) = 0;
    virtual Bytes recv_exact(size_t n) = 0;
    virtual void close() = 0;
};

using ChannelPtr = std::unique_ptr<ByteChannel>;

// Two connected in-process endpoints backed by a pair of byte queues.
std::pair<ChannelPtr, ChannelPtr> make_loopback_pair();

// --- TCP ------------------------------------------------------------------

class TcpListener {
  public:
    // binds 127.0.0.1; port 0 picks a free port
    explicit TcpListener(uint16_t port);
    ~TcpListener();
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    uint16_t port() const { return port_; }
    ChannelPtr accept();

  private:
    int fd_ = -1;
    uint16_t port_ = 0;
};

ChannelPtr tcp_connect(const std::string& host, uint16_t port);

// --- test instrumentation ---------------------------------------------------

// Flips one byte of the Nth outbound send() call; used by the tamper suites.
class FaultInjectingChannel final : public ByteChannel {
  public:
    FaultInjectingChannel(ChannelPtr inner, size_t target_send, size_t byte_offset)
        : inner_(std::move(inner)), target_send_(target_send), byte_offset_(byte_offset) {}

    void send(BytesView data) override;
    Bytes recv_exact(size_t n) override { return inner_->recv_exact(n); }
    void close() override { inner_->close(); }

  private:
    ChannelPtr inner_;
    size_t target_send_;
    size_t byte_offset_;
    size_t sends_seen_ = 0;
};

// Records the sizes of outbound send() calls (one per frame).
class RecordingChannel final : public ByteChannel {
  public:
    RecordingChannel(ChannelPtr inner, std::vector<Bytes>* log)
        : inner_(std::move(inner)), log_(log) {}

    void send(BytesView data) override;
    Bytes recv_exact(size_t n) override { return inner_->recv_exact(n); }
    void close() override { inner_->close(); }

  private:
    ChannelPtr inner_;
    std::vector<Bytes>* log_;
};

}  // namespace auditshare
