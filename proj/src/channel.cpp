#include "auditshare/channel.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

#include "auditshare/errors.hpp"

namespace auditshare {

namespace {

// One direction of a loopback pipe.
struct Pipe {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<uint8_t> data;
    bool closed = false;

    void write(BytesView b) {
        std::lock_guard lk(mu);
        if (closed) fail(Err::ChannelClosed, "peer closed");
        data.insert(data.end(), b.begin(), b.end());
        cv.notify_all();
    }

    Bytes read_exact(size_t n) {
        std::unique_lock lk(mu);
        cv.wait(lk, [&] { return data.size() >= n || closed; });
        if (data.size() < n) fail(Err::ChannelClosed, "peer closed");
        Bytes out(data.begin(), data.begin() + long(n));
        data.erase(data.begin(), data.begin() + long(n));
        return out;
    }

    void close_side() {
        std::lock_guard lk(mu);
        closed = true;
        cv.notify_all();
    }
};

class LoopbackChannel final : public ByteChannel {
  public:
    LoopbackChannel(std::shared_ptr<Pipe> out, std::shared_ptr<Pipe> in)
        : out_(std::move(out)), in_(std::move(in)) {}

    ~LoopbackChannel() override { close(); }

    void send(BytesView data) override { out_->write(data); }
    Bytes recv_exact(size_t n) override { return in_->read_exact(n); }

    void close() override {
        out_->close_side();
        in_->close_side();
    }

  private:
    std::shared_ptr<Pipe> out_;
    std::shared_ptr<Pipe> in_;
};

class TcpChannel final : public ByteChannel {
  public:
    explicit TcpChannel(int fd) : fd_(fd) {}
    ~TcpChannel() override { close(); }

    void send(BytesView data) override {
        size_t off = 0;
        while (off < data.size()) {
            ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
            if (n <= 0) fail(Err::ChannelClosed, "tcp send failed");
            off += size_t(n);
        }
    }

    Bytes recv_exact(size_t n) override {
        Bytes out(n);
        size_t off = 0;
        while (off < n) {
            ssize_t r = ::recv(fd_, out.data() + off, n - off, 0);
            if (r <= 0) fail(Err::ChannelClosed, "tcp recv failed");
            off += size_t(r);
        }
        return out;
    }

    void close() override {
        if (fd_ >= 0) {
            ::shutdown(fd_, SHUT_RDWR);
            ::close(fd_);
            fd_ = -1;
        }
    }

  private:
    int fd_ = -1;
};

}  // namespace

std::pair<ChannelPtr, ChannelPtr> make_loopback_pair() {
    auto a_to_b = std::make_shared<Pipe>();
    auto b_to_a = std::make_shared<Pipe>();
    ChannelPtr a = std::make_unique<LoopbackChannel>(a_to_b, b_to_a);
    ChannelPtr b = std::make_unique<LoopbackChannel>(b_to_a, a_to_b);
    return {std::move(a), std::move(b)};
}

TcpListener::TcpListener(uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) fail(Err::IoError, "socket failed");
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
        ::listen(fd_, 8) != 0) {
        ::close(fd_);
        fail(Err::IoError, "bind/listen failed");
    }
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
    if (fd_ >= 0) ::close(fd_);
}

ChannelPtr TcpListener::accept() {
    int cfd = ::accept(fd_, nullptr, nullptr);
    if (cfd < 0) fail(Err::IoError, "accept failed");
    int one = 1;
    ::setsockopt(cfd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return std::make_unique<TcpChannel>(cfd);
}

ChannelPtr tcp_connect(const std::string& host, uint16_t port) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) fail(Err::IoError, "socket failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        fail(Err::IoError, "bad address: " + host);
    }
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        ::close(fd);
        fail(Err::ChannelClosed, "connect failed: " + host);
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return std::make_unique<TcpChannel>(fd);
}

void FaultInjectingChannel::send(BytesView data) {
    if (sends_seen_++ == target_send_) {
        Bytes tampered(data.begin(), data.end());
        tampered[byte_offset_ % tampered.size()] ^= 0x01;
        inner_->send(tampered);
        return;
    }
    inner_->send(data);
}

void RecordingChannel::send(BytesView data) {
    log_->emplace_back(data.begin(), data.end());
    inner_->send(data);
}

}  // namespace auditshare
