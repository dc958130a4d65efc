#include <ostream>

#include "rtaes/node.hpp"

namespace rtaes::node {

namespace {

constexpr auto kIdleWait = std::chrono::milliseconds(2);

void dump_trace(const kernel::Kernel& k, std::ostream* log) {
  if (!log) return;
  for (const auto& e : k.trace().entries) {
    *log << e.tick << ',' << e.task << ',' << e.step << "  # " << k.task_name(e.task) << '\n';
  }
}

}  // namespace

std::size_t run_socket_encryptor(uart::SocketPort& port, const KeySchedule& schedule,
                                 MessageSource source, const SocketNodeOptions& options) {
  port.set_realtime(options.realtime);
  EncryptorNode encryptor(schedule, port);
  kernel::Kernel k(options.kernel);
  const double dt = port.config().frame_seconds();
  k.add_tick_hook([&port, dt](kernel::Tick) { port.pump(dt); });

  const TaskIds ids = TaskIds::from_base(1);
  k.spawn(kernel::Task(
      0,
      [&](kernel::TaskContext& ctx) {
        if (ctx.step() == 1) ctx.kernel().spawn(encryptor.main_task(ids));
        if (!encryptor.idle()) return kernel::StepResult::kRetry;
        auto next = source();
        if (!next) {
          encryptor.finish();
          return kernel::StepResult::kDone;
        }
        if (!next->empty()) encryptor.encrypt_and_send(*next);
        return kernel::StepResult::kContinue;
      },
      0, "reader"));

  try {
    k.run_until_idle();
  } catch (...) {
    dump_trace(k, options.trace_log);
    throw;
  }
  dump_trace(k, options.trace_log);
  return encryptor.blocks_sent();
}

std::vector<FaultReport> run_socket_decryptor(uart::SocketPort& port, const KeySchedule& schedule,
                                              DecryptorNode::MessageSink sink,
                                              const SocketNodeOptions& options) {
  port.set_realtime(options.realtime);
  DecryptorNode decryptor(schedule, port);
  decryptor.on_message(std::move(sink));
  kernel::Kernel k(options.kernel);
  const double dt = port.config().frame_seconds();
  k.add_tick_hook([&port, dt](kernel::Tick) { port.pump(dt, kIdleWait); });

  k.spawn(decryptor.main_task(TaskIds::from_base(1)));
  try {
    k.run_until_idle();
  } catch (...) {
    dump_trace(k, options.trace_log);
    throw;
  }
  dump_trace(k, options.trace_log);
  return decryptor.faults();
}

}  // namespace rtaes::node
