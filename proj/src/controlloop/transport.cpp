#include "slicelab/controlloop/transport.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace slicelab::controlloop {

namespace {

[[noreturn]] void fail(const std::string& what) {
    throw TransportError(what + ": " + std::strerror(errno));
}

sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
    sockaddr_in a{};
    a.sin_family = AF_INET;
    a.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &a.sin_addr) != 1) throw TransportError("bad IPv4 address '" + host + "'");
    return a;
}

// Returns false on timeout.
bool wait_for(int fd, short events, std::chrono::milliseconds timeout) {
    pollfd p{fd, events, 0};
    for (;;) {
        const int r = ::poll(&p, 1, static_cast<int>(timeout.count()));
        if (r > 0) return true;
        if (r == 0) return false;
        if (errno != EINTR) fail("poll");
    }
}

void set_nodelay(int fd) {
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

}  // namespace

TcpStream::TcpStream(int fd) : fd_(fd) {}

TcpStream::~TcpStream() { close(); }

TcpStream::TcpStream(TcpStream&& o) noexcept : fd_(o.fd_), buf_(std::move(o.buf_)) { o.fd_ = -1; }

TcpStream& TcpStream::operator=(TcpStream&& o) noexcept {
    if (this != &o) {
        close();
        fd_ = o.fd_;
        buf_ = std::move(o.buf_);
        o.fd_ = -1;
    }
    return *this;
}

void TcpStream::close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
}

TcpStream TcpStream::connect(const std::string& host, std::uint16_t port, std::chrono::milliseconds timeout) {
    const auto addr = make_addr(host, port);
    const int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd < 0) fail("socket");
    TcpStream s(fd);
    const int flags = ::fcntl(fd, F_GETFL, 0);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
    if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
        if (errno != EINPROGRESS) fail("connect to " + host + ":" + std::to_string(port));
        if (!wait_for(fd, POLLOUT, timeout)) throw TransportError("connect to " + host + ":" + std::to_string(port) + " timed out");
        int err = 0;
        socklen_t len = sizeof err;
        ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
        if (err != 0) {
            errno = err;
            fail("connect to " + host + ":" + std::to_string(port));
        }
    }
    ::fcntl(fd, F_SETFL, flags);
    set_nodelay(fd);
    return s;
}

void TcpStream::send_line(const std::string& text) {
    if (fd_ < 0) throw TransportError("send on a closed connection");
    std::string out = text;
    out.push_back('\n');
    std::size_t off = 0;
    while (off < out.size()) {
        const ssize_t n = ::send(fd_, out.data() + off, out.size() - off, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            fail("send");
        }
        off += static_cast<std::size_t>(n);
    }
}

std::optional<std::string> TcpStream::read_line(std::chrono::milliseconds timeout) {
    if (fd_ < 0) throw TransportError("read on a closed connection");
    for (;;) {
        const auto nl = buf_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buf_.substr(0, nl);
            buf_.erase(0, nl + 1);
            return line;
        }
        if (!wait_for(fd_, POLLIN, timeout))
            throw TransportError("no message within " + std::to_string(timeout.count()) + " ms");
        char chunk[4096];
        const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
        if (n < 0) {
            if (errno == EINTR) continue;
            fail("recv");
        }
        if (n == 0) {
            if (buf_.empty()) return std::nullopt;
            throw TransportError("connection closed in the middle of a message");
        }
        buf_.append(chunk, static_cast<std::size_t>(n));
    }
}

TcpListener::TcpListener(const std::string& host, std::uint16_t port) {
    const auto addr = make_addr(host, port);
    fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd_ < 0) fail("socket");
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
        const int e = errno;
        ::close(fd_);
        errno = e;
        fail("bind " + host + ":" + std::to_string(port));
    }
    if (::listen(fd_, 8) != 0) fail("listen");
    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
}

TcpListener::~TcpListener() {
    if (fd_ >= 0) ::close(fd_);
}

TcpStream TcpListener::accept(std::chrono::milliseconds timeout) {
    if (!wait_for(fd_, POLLIN, timeout))
        throw TransportError("no connection within " + std::to_string(timeout.count()) + " ms");
    const int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) fail("accept");
    set_nodelay(fd);
    return TcpStream(fd);
}

}  // namespace slicelab::controlloop
