#pragma once

// Simulated 8N1 UART: baud-rate-paced transmitter draining a TX FIFO onto a
// simplex wire, and a receiver that samples the wire at its own baud rate
// into an RX FIFO.
//
// Receiver model: for every frame put on the wire the receiver synchronises
// on the start edge and samples bit i at start + (i + 0.5) bit periods of
// its own clock. A start sample other than 0 or a stop sample other than 1
// is a framing error and the byte is dropped. A good byte arriving at a full
// RX FIFO is an overrun and is dropped; the FIFO keeps its contents.

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

namespace rtaes::uart {

using Byte = std::uint8_t;
// Simulated time in clock units; each owner picks units per second so that
// every half bit period involved is an integer.
using SimTime = std::int64_t;

inline constexpr int kFrameBits = 10;
inline constexpr std::size_t kDefaultFifoDepth = 16;
inline constexpr std::uint32_t kDefaultBaud = 115200;
inline constexpr std::uint32_t kMaxBaud = 10'000'000;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ChannelConfig {
  std::uint32_t baud = kDefaultBaud;
  std::size_t fifo_depth = kDefaultFifoDepth;

  // Throws ConfigError unless 0 < baud <= kMaxBaud and fifo_depth >= 1.
  void validate() const;
  double frame_seconds() const { return static_cast<double>(kFrameBits) / baud; }
};

// The ten wire bits of a byte in transmission order: start (0), data LSB
// first, stop (1).
std::array<int, kFrameBits> frame_bits(Byte b);

// Frame packed into 16 bits: bit i holds wire bit i, bits 10..15 are zero.
std::uint16_t pack_frame(Byte b);

struct UartStatus {
  bool rx_fifo_empty = true;
  bool rx_fifo_full = false;
  bool tx_fifo_empty = true;
  bool tx_fifo_full = false;
  bool overrun_error = false;
  bool framing_error = false;
};

enum class SendResult { kOk, kTxFull, kClosed };

// Per-direction counters.
struct LineCounters {
  std::uint64_t accepted = 0;     // bytes taken into the TX FIFO
  std::uint64_t transmitted = 0;  // frames put on the wire
  std::uint64_t received = 0;     // bytes pushed into the RX FIFO
  std::uint64_t overrun = 0;      // dropped at a full RX FIFO
  std::uint64_t framing = 0;      // dropped on a bad start/stop sample
};

// Frames on one simplex wire.
class Wire {
 public:
  void put(SimTime start, std::uint16_t word, SimTime bit_time);
  // Line level at time t; an idle line reads 1.
  int level_at(SimTime t) const;
  // Drops frames that ended at or before t.
  void trim_before(SimTime t);

  void set_capture(bool on) { capture_on_ = on; }
  const std::vector<Byte>& capture() const { return capture_; }

 private:
  struct Frame {
    SimTime start;
    SimTime bit_time;
    std::uint16_t word;
  };
  std::deque<Frame> frames_;
  bool capture_on_ = false;
  std::vector<Byte> capture_;
};

class Transmitter {
 public:
  using FrameSink = std::function<void(SimTime start, std::uint16_t word)>;

  // depth == 0 means unbounded.
  Transmitter(std::uint32_t baud, std::size_t depth, std::int64_t units_per_second,
              FrameSink sink);

  SendResult enqueue(std::uint16_t word, SimTime now);
  // Starts and finishes frames up to time t.
  void advance_to(SimTime t);

  bool fifo_empty() const { return fifo_.empty(); }
  bool fifo_full() const { return depth_ != 0 && fifo_.size() >= depth_; }
  std::size_t queued() const { return fifo_.size(); }
  SimTime bit_time() const { return bit_time_; }
  SimTime frame_time() const { return bit_time_ * kFrameBits; }
  void close() { closed_ = true; }
  bool closed() const { return closed_; }
  std::uint64_t accepted() const { return accepted_; }
  std::uint64_t transmitted() const { return transmitted_; }

 private:
  struct Entry {
    std::uint16_t word;
    SimTime enqueued;
    bool started = false;
    SimTime start = 0;
  };
  SimTime bit_time_;
  std::size_t depth_;
  FrameSink sink_;
  std::deque<Entry> fifo_;  // head is the frame on the wire, if started
  SimTime line_free_at_ = 0;
  bool closed_ = false;
  std::uint64_t accepted_ = 0;
  std::uint64_t transmitted_ = 0;
};

class Receiver {
 public:
  Receiver(std::uint32_t baud, std::size_t depth, std::int64_t units_per_second, const Wire& wire);

  void on_frame_start(SimTime start) { pending_.push_back(start); }
  // Decodes every frame whose stop-bit sample time is <= t.
  void advance_to(SimTime t);

  std::optional<Byte> pop();
  bool fifo_empty() const { return fifo_.empty(); }
  bool fifo_full() const { return fifo_.size() >= depth_; }
  bool decoding() const { return !pending_.empty(); }
  // Start of the oldest frame not yet decoded, if any.
  std::optional<SimTime> oldest_pending() const;

  bool overrun_flag() const { return overrun_flag_; }
  bool framing_flag() const { return framing_flag_; }
  void clear_flags() { overrun_flag_ = framing_flag_ = false; }
  std::uint64_t received() const { return received_; }
  std::uint64_t overrun() const { return overrun_; }
  std::uint64_t framing() const { return framing_; }

 private:
  void decode(SimTime start);

  SimTime half_bit_;
  std::size_t depth_;
  const Wire& wire_;
  std::deque<SimTime> pending_;
  std::deque<Byte> fifo_;
  bool overrun_flag_ = false;
  bool framing_flag_ = false;
  std::uint64_t received_ = 0;
  std::uint64_t overrun_ = 0;
  std::uint64_t framing_ = 0;
};

// One end of a serial link as seen by a node.
class Port {
 public:
  virtual ~Port() = default;
  virtual SendResult send(Byte b) = 0;
  virtual std::optional<Byte> recv() = 0;
  virtual UartStatus status() const = 0;
  // Clears the sticky overrun/framing flags, like reading the status register.
  virtual void clear_errors() = 0;
  // Every accepted byte has left the wire.
  virtual bool tx_drained() const = 0;
  // No further sends; the peer sees end-of-stream after the wire drains.
  virtual void close() = 0;
  // The peer closed and nothing more will arrive (RX FIFO may still hold
  // bytes).
  virtual bool peer_closed() const = 0;
};

// Two ports joined in-process by a full-duplex pair of wires on a shared
// virtual clock. Not movable: the ports refer back into the link.
class UartLink {
 public:
  enum class Side { kA, kB };

  UartLink(const ChannelConfig& a, const ChannelConfig& b);
  UartLink(const UartLink&) = delete;
  UartLink& operator=(const UartLink&) = delete;
  ~UartLink();

  Port& port(Side side);
  Port& a() { return port(Side::kA); }
  Port& b() { return port(Side::kB); }

  void advance(SimTime units);
  void advance_seconds(double seconds);
  // Advances until both directions are idle.
  void drain();

  SimTime now() const { return now_; }
  std::int64_t units_per_second() const { return units_per_second_; }
  double seconds() const { return static_cast<double>(now_) / units_per_second_; }
  SimTime frame_time(Side sender) const;

  LineCounters counters(Side sender) const;
  void set_capture(bool on);
  const std::vector<Byte>& capture(Side sender) const;

 private:
  struct Direction;
  class LinkPort;

  void settle();

  std::int64_t units_per_second_;
  SimTime now_ = 0;
  std::unique_ptr<Direction> ab_;
  std::unique_ptr<Direction> ba_;
  std::unique_ptr<LinkPort> port_a_;
  std::unique_ptr<LinkPort> port_b_;
};

std::unique_ptr<UartLink> connect(const ChannelConfig& a, const ChannelConfig& b);

}  // namespace rtaes::uart
