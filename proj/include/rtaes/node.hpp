#pragma once

// The two ends of the encrypted serial link. Each node runs as kernel
// tasks: a statically created main task spawns an AES task and a UART task,
// then exits.
//
//   encryptor:  main -> aes-encrypt (one block per step) -> uart-tx
//   decryptor:  main -> uart-rx (drains the RX FIFO)     -> aes-decrypt
//
// Blocks are encrypted independently (ECB). Identical plaintext blocks give
// identical ciphertext blocks, so message structure leaks; there is no MAC.

#include <deque>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rtaes/aes.hpp"
#include "rtaes/kernel.hpp"
#include "rtaes/link_message.hpp"
#include "rtaes/socket_port.hpp"
#include "rtaes/uart.hpp"

namespace rtaes::node {

using link::Bytes;

enum class Role { kEncryptor, kDecryptor };

enum class LinkFault {
  kIntegrity,   // the UART flagged framing or overrun errors inside a message
  kIncomplete,  // the channel closed mid-message
  kMalformed,   // a header that cannot be a message
};

const char* to_string(LinkFault f);

struct FaultReport {
  LinkFault fault;
  std::string detail;
};

// Task ids used by a node are base .. base + 2.
struct TaskIds {
  kernel::TaskId main;
  kernel::TaskId aes;
  kernel::TaskId io;
  static TaskIds from_base(kernel::TaskId base) { return {base, base + 1, base + 2}; }
};

class EncryptorNode {
 public:
  EncryptorNode(const KeySchedule& schedule, uart::Port& port);

  // Queues a plaintext; returns the number of cipher blocks it will occupy
  // on the wire. Throws link::MessageError for empty or oversized input.
  std::size_t encrypt_and_send(std::span<const Byte> plaintext);
  // Once every queued message is on the wire, close the port and finish.
  void finish() { finishing_ = true; }

  // The static first task; spawns the AES and UART tasks.
  kernel::Task main_task(TaskIds ids);

  bool done() const { return aes_done_ && io_done_; }
  // Nothing queued and nothing waiting for the UART.
  bool idle() const { return plaintexts_.empty() && out_.empty(); }
  std::size_t blocks_sent() const { return blocks_sent_; }
  std::size_t bytes_pending() const { return out_.size(); }

 private:
  kernel::StepResult aes_step();
  kernel::StepResult tx_step();

  const KeySchedule& schedule_;
  uart::Port& port_;
  std::deque<Bytes> plaintexts_;
  std::size_t block_cursor_ = 0;
  std::deque<Byte> out_;
  bool finishing_ = false;
  bool aes_done_ = false;
  bool io_done_ = false;
  std::size_t blocks_sent_ = 0;
};

class DecryptorNode {
 public:
  using MessageSink = std::function<void(const Bytes& plaintext, const link::LinkMessage& wire)>;

  DecryptorNode(const KeySchedule& schedule, uart::Port& port);

  void on_message(MessageSink sink) { sink_ = std::move(sink); }

  kernel::Task main_task(TaskIds ids);

  // Pops the next fully decrypted plaintext, if any.
  std::optional<Bytes> receive_and_decrypt();

  bool done() const { return rx_done_ && aes_done_; }
  const std::vector<FaultReport>& faults() const { return faults_; }
  std::size_t messages_received() const { return messages_; }

 private:
  kernel::StepResult rx_step();
  kernel::StepResult aes_step();
  void fault(LinkFault f, std::string detail);

  const KeySchedule& schedule_;
  uart::Port& port_;
  link::MessageAssembler assembler_;
  std::deque<link::LinkMessage> sealed_;
  std::deque<Bytes> plain_;
  MessageSink sink_;
  // After an integrity fault the byte stream has lost alignment; bytes are
  // discarded until the line has been quiet for a full rx step.
  bool resyncing_ = false;
  bool rx_done_ = false;
  bool aes_done_ = false;
  std::size_t messages_ = 0;
  std::vector<FaultReport> faults_;
};

// Result of running both nodes in one process over an in-process link.
struct LoopbackResult {
  std::vector<Bytes> received;
  std::vector<FaultReport> faults;
  std::vector<Byte> wire;  // bytes the encryptor put on the wire
  kernel::ExecutionTrace encryptor_trace;
  kernel::ExecutionTrace decryptor_trace;
  uart::LineCounters counters;
  double simulated_seconds = 0.0;
};

struct LoopbackOptions {
  uart::ChannelConfig encryptor_channel;
  uart::ChannelConfig decryptor_channel;
  kernel::KernelConfig kernel;
};

// Two kernels stepped in lockstep; the link clock advances one encryptor
// frame time per tick.
LoopbackResult run_loopback(std::span<const Byte> key, const std::vector<Bytes>& messages,
                            const LoopbackOptions& options = {});

// Socket-backed nodes, one per process. The port is pumped from a kernel
// tick hook, one local frame time per tick.
struct SocketNodeOptions {
  kernel::KernelConfig kernel{kernel::Policy::kRoundRobin, 1, 0};
  bool realtime = false;
  // When set, the kernel trace is written here once the node stops.
  std::ostream* trace_log = nullptr;
};

// Produces the next plaintext, or nullopt at end of input. Empty messages
// are skipped.
using MessageSource = std::function<std::optional<Bytes>()>;

// Sends every message from `source`, then closes the link. Asks the source
// for more only once the previous message is fully on the wire. Returns the
// number of blocks sent.
std::size_t run_socket_encryptor(uart::SocketPort& port, const KeySchedule& schedule,
                                 MessageSource source, const SocketNodeOptions& options = {});

// Decrypts until the peer closes the link; returns the faults seen.
std::vector<FaultReport> run_socket_decryptor(uart::SocketPort& port, const KeySchedule& schedule,
                                              DecryptorNode::MessageSink sink,
                                              const SocketNodeOptions& options = {});

}  // namespace rtaes::node
