#include "rtaes/uart.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rtaes::uart {

void ChannelConfig::validate() const {
  if (baud == 0 || baud > kMaxBaud) {
    throw ConfigError("baud must be in 1.." + std::to_string(kMaxBaud) + ", got " +
                      std::to_string(baud));
  }
  if (fifo_depth < 1) throw ConfigError("fifo_depth must be >= 1");
}

std::array<int, kFrameBits> frame_bits(Byte b) {
  std::array<int, kFrameBits> bits{};
  bits[0] = 0;
  for (int i = 0; i < 8; ++i) bits[static_cast<std::size_t>(i + 1)] = (b >> i) & 1;
  bits[9] = 1;
  return bits;
}

std::uint16_t pack_frame(Byte b) {
  return static_cast<std::uint16_t>((std::uint16_t{b} << 1) | (1u << 9));
}

// ---------------------------------------------------------------------------
// Wire

void Wire::put(SimTime start, std::uint16_t word, SimTime bit_time) {
  frames_.push_back({start, bit_time, word});
  if (capture_on_) capture_.push_back(static_cast<Byte>(word >> 1));
}

int Wire::level_at(SimTime t) const {
  for (const auto& f : frames_) {
    if (t < f.start) break;
    const SimTime bit = (t - f.start) / f.bit_time;
    if (bit < kFrameBits) return (f.word >> bit) & 1;
  }
  return 1;
}

void Wire::trim_before(SimTime t) {
  while (!frames_.empty() && frames_.front().start + frames_.front().bit_time * kFrameBits <= t) {
    frames_.pop_front();
  }
}

// ---------------------------------------------------------------------------
// Transmitter

namespace {

SimTime units_per(std::int64_t units_per_second, std::int64_t divisor) {
  if (divisor <= 0 || units_per_second % divisor != 0) {
    throw ConfigError("clock resolution " + std::to_string(units_per_second) +
                      " is not a multiple of " + std::to_string(divisor));
  }
  return units_per_second / divisor;
}

}  // namespace

Transmitter::Transmitter(std::uint32_t baud, std::size_t depth, std::int64_t units_per_second,
                         FrameSink sink)
    : bit_time_(units_per(units_per_second, baud)), depth_(depth), sink_(std::move(sink)) {}

SendResult Transmitter::enqueue(std::uint16_t word, SimTime now) {
  if (closed_) return SendResult::kClosed;
  if (fifo_full()) return SendResult::kTxFull;
  fifo_.push_back({word, now});
  ++accepted_;
  return SendResult::kOk;
}

void Transmitter::advance_to(SimTime t) {
  while (!fifo_.empty()) {
    Entry& head = fifo_.front();
    if (!head.started) {
      const SimTime start = std::max(line_free_at_, head.enqueued);
      if (start > t) return;
      head.started = true;
      head.start = start;
      ++transmitted_;
      sink_(start, head.word);
    }
    const SimTime end = head.start + frame_time();
    if (end > t) return;
    line_free_at_ = end;
    fifo_.pop_front();
  }
}

// ---------------------------------------------------------------------------
// Receiver

Receiver::Receiver(std::uint32_t baud, std::size_t depth, std::int64_t units_per_second,
                   const Wire& wire)
    : half_bit_(units_per(units_per_second, 2 * static_cast<std::int64_t>(baud))),
      depth_(depth),
      wire_(wire) {}

void Receiver::advance_to(SimTime t) {
  const SimTime stop_sample = half_bit_ * (2 * (kFrameBits - 1) + 1);
  while (!pending_.empty() && pending_.front() + stop_sample <= t) {
    decode(pending_.front());
    pending_.pop_front();
  }
}

void Receiver::decode(SimTime start) {
  auto sample = [&](int i) { return wire_.level_at(start + half_bit_ * (2 * i + 1)); };
  if (sample(0) != 0 || sample(kFrameBits - 1) != 1) {
    framing_flag_ = true;
    ++framing_;
    return;
  }
  Byte b = 0;
  for (int i = 0; i < 8; ++i) b = static_cast<Byte>(b | (sample(i + 1) << i));
  if (fifo_full()) {
    overrun_flag_ = true;
    ++overrun_;
    return;
  }
  fifo_.push_back(b);
  ++received_;
}

std::optional<Byte> Receiver::pop() {
  if (fifo_.empty()) return std::nullopt;
  const Byte b = fifo_.front();
  fifo_.pop_front();
  return b;
}

std::optional<SimTime> Receiver::oldest_pending() const {
  if (pending_.empty()) return std::nullopt;
  return pending_.front();
}

// ---------------------------------------------------------------------------
// UartLink

struct UartLink::Direction {
  Direction(const ChannelConfig& tx, const ChannelConfig& rx, std::int64_t ups)
      : transmitter(tx.baud, tx.fifo_depth, ups,
                    [this](SimTime start, std::uint16_t word) {
                      wire.put(start, word, transmitter.bit_time());
                      receiver.on_frame_start(start);
                    }),
        receiver(rx.baud, rx.fifo_depth, ups, wire) {}

  void advance_to(SimTime t) {
    transmitter.advance_to(t);
    receiver.advance_to(t);
    wire.trim_before(receiver.oldest_pending().value_or(t));
  }

  bool idle() const { return transmitter.fifo_empty() && !receiver.decoding(); }

  Wire wire;
  Transmitter transmitter;
  Receiver receiver;
};

class UartLink::LinkPort final : public Port {
 public:
  LinkPort(UartLink& link, Direction& out, Direction& in) : link_(link), out_(out), in_(in) {}

  SendResult send(Byte b) override {
    const auto r = out_.transmitter.enqueue(pack_frame(b), link_.now_);
    // A frame may start at this very instant.
    link_.settle();
    return r;
  }

  std::optional<Byte> recv() override { return in_.receiver.pop(); }

  UartStatus status() const override {
    UartStatus s;
    s.rx_fifo_empty = in_.receiver.fifo_empty();
    s.rx_fifo_full = in_.receiver.fifo_full();
    s.tx_fifo_empty = out_.transmitter.fifo_empty();
    s.tx_fifo_full = out_.transmitter.fifo_full();
    s.overrun_error = in_.receiver.overrun_flag();
    s.framing_error = in_.receiver.framing_flag();
    return s;
  }

  void clear_errors() override { in_.receiver.clear_flags(); }
  bool tx_drained() const override { return out_.idle(); }
  void close() override { out_.transmitter.close(); }
  bool peer_closed() const override { return in_.transmitter.closed() && in_.idle(); }

 private:
  UartLink& link_;
  Direction& out_;
  Direction& in_;
};

UartLink::UartLink(const ChannelConfig& a, const ChannelConfig& b) {
  a.validate();
  b.validate();
  units_per_second_ = 2 * static_cast<std::int64_t>(a.baud) * static_cast<std::int64_t>(b.baud);
  ab_ = std::make_unique<Direction>(a, b, units_per_second_);
  ba_ = std::make_unique<Direction>(b, a, units_per_second_);
  port_a_ = std::make_unique<LinkPort>(*this, *ab_, *ba_);
  port_b_ = std::make_unique<LinkPort>(*this, *ba_, *ab_);
}

UartLink::~UartLink() = default;

Port& UartLink::port(Side side) { return side == Side::kA ? *port_a_ : *port_b_; }

void UartLink::settle() {
  ab_->advance_to(now_);
  ba_->advance_to(now_);
}

void UartLink::advance(SimTime units) {
  now_ += units;
  settle();
}

void UartLink::advance_seconds(double seconds) {
  advance(static_cast<SimTime>(std::llround(seconds * static_cast<double>(units_per_second_))));
}

void UartLink::drain() {
  const SimTime step = std::min(frame_time(Side::kA), frame_time(Side::kB));
  while (!ab_->idle() || !ba_->idle()) advance(step);
}

SimTime UartLink::frame_time(Side sender) const {
  return (sender == Side::kA ? ab_ : ba_)->transmitter.frame_time();
}

LineCounters UartLink::counters(Side sender) const {
  const Direction& d = sender == Side::kA ? *ab_ : *ba_;
  return {d.transmitter.accepted(), d.transmitter.transmitted(), d.receiver.received(),
          d.receiver.overrun(), d.receiver.framing()};
}

void UartLink::set_capture(bool on) {
  ab_->wire.set_capture(on);
  ba_->wire.set_capture(on);
}

const std::vector<Byte>& UartLink::capture(Side sender) const {
  return (sender == Side::kA ? ab_ : ba_)->wire.capture();
}

std::unique_ptr<UartLink> connect(const ChannelConfig& a, const ChannelConfig& b) {
  return std::make_unique<UartLink>(a, b);
}

}  // namespace rtaes::uart
