#include "rtaes/socket_port.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <thread>

namespace rtaes::uart {

namespace {

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

sockaddr_in resolve(const Endpoint& ep) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(ep.port);
  const std::string host = ep.host == "localhost" ? "127.0.0.1" : ep.host;
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    throw ConfigError("not an IPv4 address: " + ep.host);
  }
  return addr;
}

SimTime to_units(double seconds, std::int64_t units_per_second) {
  return static_cast<SimTime>(std::llround(seconds * static_cast<double>(units_per_second)));
}

}  // namespace

std::array<Byte, kWireHeaderBytes> encode_wire_header(std::uint32_t baud) {
  return {kWireMagic[0], kWireMagic[1], kWireMagic[2], kWireMagic[3], kWireVersion,
          static_cast<Byte>(baud >> 24), static_cast<Byte>(baud >> 16),
          static_cast<Byte>(baud >> 8), static_cast<Byte>(baud)};
}

std::uint32_t decode_wire_header(const std::array<Byte, kWireHeaderBytes>& h) {
  if (!std::equal(kWireMagic.begin(), kWireMagic.end(), h.begin())) {
    throw LinkError("bad wire magic");
  }
  if (h[4] != kWireVersion) throw LinkError("unsupported wire version " + std::to_string(h[4]));
  const std::uint32_t baud = (std::uint32_t{h[5]} << 24) | (std::uint32_t{h[6]} << 16) |
                             (std::uint32_t{h[7]} << 8) | std::uint32_t{h[8]};
  ChannelConfig{baud, 1}.validate();
  return baud;
}

Endpoint Endpoint::parse(const std::string& text) {
  Endpoint ep;
  std::string port_text = text;
  if (auto colon = text.rfind(':'); colon != std::string::npos) {
    ep.host = text.substr(0, colon);
    port_text = text.substr(colon + 1);
  }
  try {
    std::size_t used = 0;
    const unsigned long p = std::stoul(port_text, &used);
    if (used != port_text.size() || p > 65535) throw ConfigError("");
    ep.port = static_cast<std::uint16_t>(p);
  } catch (const std::exception&) {
    throw ConfigError("bad endpoint '" + text + "', expected host:port");
  }
  return ep;
}

// ---------------------------------------------------------------------------

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = other.release();
  }
  return *this;
}

Socket::~Socket() {
  if (fd_ >= 0) ::close(fd_);
}

int Socket::release() {
  const int fd = fd_;
  fd_ = -1;
  return fd;
}

Listener::Listener(const Endpoint& at) {
  sock_ = Socket(::socket(AF_INET, SOCK_STREAM, 0));
  if (!sock_) throw LinkError(errno_text("socket"));
  const int one = 1;
  ::setsockopt(sock_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr = resolve(at);
  if (::bind(sock_.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    throw LinkError(errno_text("bind"));
  }
  if (::listen(sock_.fd(), 1) != 0) throw LinkError(errno_text("listen"));
  socklen_t len = sizeof addr;
  ::getsockname(sock_.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

Socket Listener::accept(std::chrono::milliseconds timeout) {
  pollfd p{sock_.fd(), POLLIN, 0};
  const int r = ::poll(&p, 1, static_cast<int>(timeout.count()));
  if (r <= 0) throw LinkError("timed out waiting for a peer");
  Socket s(::accept(sock_.fd(), nullptr, nullptr));
  if (!s) throw LinkError(errno_text("accept"));
  return s;
}

Socket connect_to(const Endpoint& to, std::chrono::milliseconds timeout) {
  const sockaddr_in addr = resolve(to);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    Socket s(::socket(AF_INET, SOCK_STREAM, 0));
    if (!s) throw LinkError(errno_text("socket"));
    if (::connect(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) == 0) return s;
    if (std::chrono::steady_clock::now() >= deadline) throw LinkError(errno_text("connect"));
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

// ---------------------------------------------------------------------------

// Local replay of the remote transmitter feeding our receiver.
struct SocketPort::Incoming {
  Incoming(std::uint32_t remote_baud, const ChannelConfig& local, std::int64_t ups)
      : units_per_second(ups),
        transmitter(remote_baud, 0, ups,
                    [this](SimTime start, std::uint16_t word) {
                      wire.put(start, word, transmitter.bit_time());
                      receiver.on_frame_start(start);
                    }),
        receiver(local.baud, local.fifo_depth, ups, wire) {}

  void advance_to(SimTime t) {
    transmitter.advance_to(t);
    receiver.advance_to(t);
    wire.trim_before(receiver.oldest_pending().value_or(t));
  }

  bool idle() const { return transmitter.fifo_empty() && !receiver.decoding(); }

  std::int64_t units_per_second;
  Wire wire;
  Transmitter transmitter;
  Receiver receiver;
};

SocketPort::SocketPort(Socket sock, const ChannelConfig& config)
    : sock_(std::move(sock)),
      config_(config),
      out_units_(2 * static_cast<std::int64_t>(config.baud)),
      out_(config.baud, config.fifo_depth, out_units_,
           [this](SimTime, std::uint16_t word) {
             out_buf_.push_back(static_cast<Byte>(word >> 8));
             out_buf_.push_back(static_cast<Byte>(word));
           }),
      epoch_(std::chrono::steady_clock::now()) {
  config_.validate();
  const int one = 1;
  ::setsockopt(sock_.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  const auto header = encode_wire_header(config_.baud);
  out_buf_.insert(out_buf_.end(), header.begin(), header.end());
  flush_out();
}

SocketPort::~SocketPort() = default;

SendResult SocketPort::send(Byte b) {
  const auto r = out_.enqueue(pack_frame(b), to_units(clock_, out_units_));
  settle();
  flush_out();
  return r;
}

std::optional<Byte> SocketPort::recv() {
  if (!in_) return std::nullopt;
  return in_->receiver.pop();
}

UartStatus SocketPort::status() const {
  UartStatus s;
  if (in_) {
    s.rx_fifo_empty = in_->receiver.fifo_empty();
    s.rx_fifo_full = in_->receiver.fifo_full();
    s.overrun_error = in_->receiver.overrun_flag();
    s.framing_error = in_->receiver.framing_flag();
  }
  s.tx_fifo_empty = out_.fifo_empty();
  s.tx_fifo_full = out_.fifo_full();
  return s;
}

void SocketPort::clear_errors() {
  if (in_) in_->receiver.clear_flags();
}

bool SocketPort::tx_drained() const { return out_.fifo_empty() && out_buf_.empty(); }

void SocketPort::close() {
  out_.close();
  if (tx_drained() && !write_shut_) {
    ::shutdown(sock_.fd(), SHUT_WR);
    write_shut_ = true;
  }
}

// A trailing partial frame after EOF is discarded.
bool SocketPort::peer_closed() const { return eof_ && (!in_ || in_->idle()); }

LineCounters SocketPort::incoming_counters() const {
  if (!in_) return {};
  return {in_->transmitter.accepted(), in_->transmitter.transmitted(), in_->receiver.received(),
          in_->receiver.overrun(), in_->receiver.framing()};
}

void SocketPort::set_realtime(bool on) {
  realtime_ = on;
  epoch_ = std::chrono::steady_clock::now() -
           std::chrono::duration_cast<std::chrono::steady_clock::duration>(
               std::chrono::duration<double>(clock_));
}

bool SocketPort::locally_pending() const {
  return !out_.fifo_empty() || (in_ && !in_->idle());
}

void SocketPort::settle() {
  out_.advance_to(to_units(clock_, out_units_));
  if (in_) in_->advance_to(to_units(clock_, in_->units_per_second));
}

void SocketPort::pump(double seconds, std::chrono::milliseconds wait) {
  clock_ += seconds;
  if (realtime_) {
    std::this_thread::sleep_until(
        epoch_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                     std::chrono::duration<double>(clock_)));
  }
  settle();
  flush_out();
  read_available(locally_pending() ? std::chrono::milliseconds(0) : wait);
  settle();
  if (out_.closed()) close();
}

void SocketPort::flush_out() {
  std::size_t off = 0;
  while (off < out_buf_.size()) {
    const ssize_t n = ::send(sock_.fd(), out_buf_.data() + off, out_buf_.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw LinkError(errno_text("send"));
    }
    off += static_cast<std::size_t>(n);
  }
  out_buf_.clear();
}

void SocketPort::read_available(std::chrono::milliseconds wait) {
  if (eof_) return;
  pollfd p{sock_.fd(), POLLIN, 0};
  int timeout = static_cast<int>(wait.count());
  while (::poll(&p, 1, timeout) > 0) {
    timeout = 0;
    Byte buf[4096];
    const ssize_t n = ::recv(sock_.fd(), buf, sizeof buf, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw LinkError(errno_text("recv"));
    }
    if (n == 0) {
      eof_ = true;
      break;
    }
    in_buf_.insert(in_buf_.end(), buf, buf + n);
  }

  std::size_t off = 0;
  if (!peer_baud_) {
    if (in_buf_.size() < kWireHeaderBytes) return;
    std::array<Byte, kWireHeaderBytes> header{};
    std::copy_n(in_buf_.begin(), kWireHeaderBytes, header.begin());
    peer_baud_ = decode_wire_header(header);
    const auto ups = 2 * static_cast<std::int64_t>(*peer_baud_) * config_.baud;
    in_ = std::make_unique<Incoming>(*peer_baud_, config_, ups);
    off = kWireHeaderBytes;
  }
  const SimTime now = to_units(clock_, in_->units_per_second);
  for (; off + 2 <= in_buf_.size(); off += 2) {
    const auto word = static_cast<std::uint16_t>((in_buf_[off] << 8) | in_buf_[off + 1]);
    in_->transmitter.enqueue(word, now);
    if (capture_on_) capture_.push_back(static_cast<Byte>(word >> 1));
  }
  in_buf_.erase(in_buf_.begin(), in_buf_.begin() + static_cast<std::ptrdiff_t>(off));
}

}  // namespace rtaes::uart
