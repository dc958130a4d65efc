#pragma once

// A UART port whose wire is a localhost TCP stream. The stream starts with
// a header (magic "AESL", version 0x01, transmitter baud as a big-endian
// u32) followed by one big-endian u16 per 8N1 frame (bit i = wire bit i).
// The receiving side replays the frames through a local model of the remote
// transmitter at the advertised baud, so baud mismatches behave exactly as
// on the in-process link. See docs/wire-format.md.

#include <array>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtaes/uart.hpp"

namespace rtaes::uart {

inline constexpr std::array<Byte, 4> kWireMagic = {'A', 'E', 'S', 'L'};
inline constexpr Byte kWireVersion = 0x01;
inline constexpr std::size_t kWireHeaderBytes = 9;

class LinkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::array<Byte, kWireHeaderBytes> encode_wire_header(std::uint32_t baud);
// Returns the transmitter baud; throws LinkError on bad magic or version.
std::uint32_t decode_wire_header(const std::array<Byte, kWireHeaderBytes>& header);

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  // "host:port" or just "port"; throws ConfigError.
  static Endpoint parse(const std::string& text);
};

// RAII file descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(other.release()) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket();

  int fd() const { return fd_; }
  int release();
  explicit operator bool() const { return fd_ >= 0; }

 private:
  int fd_ = -1;
};

class Listener {
 public:
  // Binds and listens; port 0 picks an ephemeral port.
  explicit Listener(const Endpoint& at);
  std::uint16_t port() const { return port_; }
  Socket accept(std::chrono::milliseconds timeout);

 private:
  Socket sock_;
  std::uint16_t port_ = 0;
};

// Retries until the deadline; throws LinkError when refused throughout.
Socket connect_to(const Endpoint& to, std::chrono::milliseconds timeout);

class SocketPort final : public Port {
 public:
  SocketPort(Socket sock, const ChannelConfig& config);
  ~SocketPort() override;

  SendResult send(Byte b) override;
  std::optional<Byte> recv() override;
  UartStatus status() const override;
  void clear_errors() override;
  bool tx_drained() const override;
  void close() override;
  bool peer_closed() const override;

  // Advances the local clock, moves frames between the socket and the
  // models. Waits up to `wait` for socket input when nothing is pending
  // locally.
  void pump(double seconds, std::chrono::milliseconds wait = std::chrono::milliseconds(0));

  // Pace the virtual clock against the wall clock.
  void set_realtime(bool on);
  void set_capture(bool on) { capture_on_ = on; }
  // Data bytes of every frame received from the peer.
  const std::vector<Byte>& capture() const { return capture_; }
  const ChannelConfig& config() const { return config_; }
  double seconds() const { return clock_; }
  std::optional<std::uint32_t> peer_baud() const { return peer_baud_; }
  LineCounters incoming_counters() const;

 private:
  struct Incoming;

  void read_available(std::chrono::milliseconds wait);
  void flush_out();
  void settle();
  bool locally_pending() const;

  Socket sock_;
  ChannelConfig config_;
  double clock_ = 0.0;
  std::int64_t out_units_;
  Transmitter out_;
  std::vector<Byte> out_buf_;
  bool write_shut_ = false;
  bool eof_ = false;

  std::vector<Byte> in_buf_;
  std::optional<std::uint32_t> peer_baud_;
  std::unique_ptr<Incoming> in_;

  bool realtime_ = false;
  std::chrono::steady_clock::time_point epoch_;
  bool capture_on_ = false;
  std::vector<Byte> capture_;
};

}  // namespace rtaes::uart
