#include "rtaes/node.hpp"

#include <algorithm>

namespace rtaes::node {

using kernel::StepResult;
using kernel::Task;
using kernel::TaskContext;

const char* to_string(LinkFault f) {
  switch (f) {
    case LinkFault::kIntegrity: return "integrity";
    case LinkFault::kIncomplete: return "incomplete";
    case LinkFault::kMalformed: return "malformed";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// EncryptorNode

EncryptorNode::EncryptorNode(const KeySchedule& schedule, uart::Port& port)
    : schedule_(schedule), port_(port) {}

std::size_t EncryptorNode::encrypt_and_send(std::span<const Byte> plaintext) {
  if (plaintext.empty()) throw link::MessageError("plaintext must not be empty");
  if (plaintext.size() > link::kMaxMessageBytes) {
    throw link::MessageError("plaintext exceeds the 65535-byte frame limit");
  }
  plaintexts_.emplace_back(plaintext.begin(), plaintext.end());
  return link::LinkMessage::blocks_for(plaintext.size());
}

Task EncryptorNode::main_task(TaskIds ids) {
  return Task::from_steps(
      ids.main,
      {[this, ids](TaskContext& ctx) {
        ctx.kernel().spawn(Task(ids.aes, [this](TaskContext&) { return aes_step(); }, 0,
                                "aes-encrypt"));
        ctx.kernel().spawn(Task(ids.io, [this](TaskContext&) { return tx_step(); }, 0,
                                "uart-tx"));
      }},
      0, "encryptor-main");
}

StepResult EncryptorNode::aes_step() {
  if (plaintexts_.empty()) {
    if (!finishing_) return StepResult::kRetry;
    aes_done_ = true;
    return StepResult::kDone;
  }
  const Bytes& message = plaintexts_.front();
  if (block_cursor_ == 0) {
    out_.push_back(static_cast<Byte>(message.size() >> 8));
    out_.push_back(static_cast<Byte>(message.size()));
  }
  Block block{};
  const std::size_t offset = block_cursor_ * kBlockBytes;
  const std::size_t take = std::min(kBlockBytes, message.size() - offset);
  std::copy_n(message.begin() + static_cast<std::ptrdiff_t>(offset), take, block.begin());
  const Block sealed = cipher(block, schedule_);
  out_.insert(out_.end(), sealed.begin(), sealed.end());
  ++blocks_sent_;
  if (++block_cursor_ == link::LinkMessage::blocks_for(message.size())) {
    plaintexts_.pop_front();
    block_cursor_ = 0;
  }
  return StepResult::kContinue;
}

StepResult EncryptorNode::tx_step() {
  std::size_t sent = 0;
  while (!out_.empty() && port_.send(out_.front()) == uart::SendResult::kOk) {
    out_.pop_front();
    ++sent;
  }
  if (sent > 0) return StepResult::kContinue;
  if (out_.empty() && aes_done_) {
    port_.close();
    if (port_.tx_drained()) {
      io_done_ = true;
      return StepResult::kDone;
    }
  }
  // Nothing to send yet, or the TX FIFO is full.
  return StepResult::kRetry;
}

// ---------------------------------------------------------------------------
// DecryptorNode

DecryptorNode::DecryptorNode(const KeySchedule& schedule, uart::Port& port)
    : schedule_(schedule), port_(port) {}

Task DecryptorNode::main_task(TaskIds ids) {
  return Task::from_steps(
      ids.main,
      {[this, ids](TaskContext& ctx) {
        ctx.kernel().spawn(Task(ids.io, [this](TaskContext&) { return rx_step(); }, 0,
                                "uart-rx"));
        ctx.kernel().spawn(Task(ids.aes, [this](TaskContext&) { return aes_step(); }, 0,
                                "aes-decrypt"));
      }},
      0, "decryptor-main");
}

void DecryptorNode::fault(LinkFault f, std::string detail) {
  faults_.push_back({f, std::move(detail)});
}

StepResult DecryptorNode::rx_step() {
  const auto status = port_.status();
  if (status.framing_error || status.overrun_error) {
    port_.clear_errors();
    if (!resyncing_) {
      fault(LinkFault::kIntegrity,
            status.framing_error ? "framing error, message discarded" : "rx overrun, message discarded");
    }
    assembler_.reset();
    resyncing_ = true;
  }

  bool got = false;
  while (auto b = port_.recv()) {
    got = true;
    if (resyncing_) continue;
    try {
      if (auto m = assembler_.feed(*b)) sealed_.push_back(std::move(*m));
    } catch (const link::MessageError& e) {
      fault(LinkFault::kMalformed, e.what());
      assembler_.reset();
      resyncing_ = true;
    }
  }
  if (got) return StepResult::kContinue;

  if (resyncing_ && !status.framing_error && !status.overrun_error) resyncing_ = false;

  if (port_.peer_closed()) {
    if (assembler_.mid_message()) fault(LinkFault::kIncomplete, "channel closed mid-message");
    assembler_.reset();
    rx_done_ = true;
    return StepResult::kDone;
  }
  return StepResult::kRetry;
}

StepResult DecryptorNode::aes_step() {
  if (sealed_.empty()) {
    if (!rx_done_) return StepResult::kRetry;
    aes_done_ = true;
    return StepResult::kDone;
  }
  // One whole message per step; messages are at most 4096 blocks.
  const link::LinkMessage message = std::move(sealed_.front());
  sealed_.pop_front();
  Bytes plain = link::open(message, schedule_);
  ++messages_;
  if (sink_) sink_(plain, message);
  plain_.push_back(std::move(plain));
  return StepResult::kContinue;
}

std::optional<Bytes> DecryptorNode::receive_and_decrypt() {
  if (plain_.empty()) return std::nullopt;
  Bytes b = std::move(plain_.front());
  plain_.pop_front();
  return b;
}

// ---------------------------------------------------------------------------

LoopbackResult run_loopback(std::span<const Byte> key, const std::vector<Bytes>& messages,
                            const LoopbackOptions& options) {
  const KeySchedule schedule = key_expansion(key);
  uart::UartLink wire(options.encryptor_channel, options.decryptor_channel);
  wire.set_capture(true);

  EncryptorNode encryptor(schedule, wire.a());
  DecryptorNode decryptor(schedule, wire.b());
  for (const auto& m : messages) encryptor.encrypt_and_send(m);
  encryptor.finish();

  kernel::KernelConfig kc = options.kernel;
  kernel::Kernel enc_kernel(kc);
  kernel::Kernel dec_kernel(kc);
  enc_kernel.spawn(encryptor.main_task(TaskIds::from_base(1)));
  dec_kernel.spawn(decryptor.main_task(TaskIds::from_base(1)));

  const uart::SimTime dt = wire.frame_time(uart::UartLink::Side::kA);
  kernel::Tick ticks = 0;
  while (!enc_kernel.idle() || !dec_kernel.idle()) {
    if (kc.max_ticks != 0 && ticks++ >= kc.max_ticks) {
      throw kernel::KernelError("livelock guard: loopback exceeded " +
                                std::to_string(kc.max_ticks) + " ticks");
    }
    enc_kernel.tick();
    dec_kernel.tick();
    wire.advance(dt);
  }

  LoopbackResult result;
  while (auto m = decryptor.receive_and_decrypt()) result.received.push_back(std::move(*m));
  result.faults = decryptor.faults();
  result.wire = wire.capture(uart::UartLink::Side::kA);
  result.encryptor_trace = enc_kernel.trace();
  result.decryptor_trace = dec_kernel.trace();
  result.counters = wire.counters(uart::UartLink::Side::kA);
  result.simulated_seconds = wire.seconds();
  return result;
}

}  // namespace rtaes::node
