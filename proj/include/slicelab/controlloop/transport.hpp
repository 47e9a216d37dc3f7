#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>

#include "slicelab/core/types.hpp"

namespace slicelab::controlloop {

inline constexpr std::chrono::milliseconds kDefaultTimeout{5000};

class TransportError : public Error {
public:
    using Error::Error;
};

/// Line-oriented TCP connection (IPv4). Lines are UTF-8 text terminated by
/// '\n'; the terminator is not part of the returned line.
class TcpStream {
public:
    TcpStream() = default;
    explicit TcpStream(int fd);
    ~TcpStream();
    TcpStream(TcpStream&& o) noexcept;
    TcpStream& operator=(TcpStream&& o) noexcept;
    TcpStream(const TcpStream&) = delete;
    TcpStream& operator=(const TcpStream&) = delete;

    static TcpStream connect(const std::string& host, std::uint16_t port,
                             std::chrono::milliseconds timeout = kDefaultTimeout);

    /// Sends `text` followed by '\n'.
    void send_line(const std::string& text);
    /// Next line, or nullopt when the peer closed the connection cleanly
    /// between lines. Throws TransportError on timeout, a reset, or EOF in the
    /// middle of a line.
    std::optional<std::string> read_line(std::chrono::milliseconds timeout = kDefaultTimeout);

    bool is_open() const { return fd_ >= 0; }
    void close();

private:
    int fd_ = -1;
    std::string buf_;
};

class TcpListener {
public:
    /// Binds `host:port`; port 0 picks an ephemeral port.
    TcpListener(const std::string& host, std::uint16_t port);
    ~TcpListener();
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    std::uint16_t port() const { return port_; }
    TcpStream accept(std::chrono::milliseconds timeout = kDefaultTimeout);

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

}  // namespace slicelab::controlloop
