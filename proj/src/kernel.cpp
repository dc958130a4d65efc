#include "rtaes/kernel.hpp"

#include <algorithm>
#include <memory>
#include <sstream>

namespace rtaes::kernel {

Tick TaskContext::now() const { return kernel_.now(); }

Task::Task(TaskId id, Body body, int priority, std::string name)
    : id_(id), body_(std::move(body)), priority_(priority), name_(std::move(name)) {
  if (name_.empty()) name_ = "task" + std::to_string(id_);
}

Task Task::from_steps(TaskId id, std::vector<Step> steps, int priority, std::string name) {
  const bool empty = steps.empty();
  auto shared = std::make_shared<std::vector<Step>>(std::move(steps));
  Task task(
      id,
      [shared](TaskContext& ctx) {
        const auto index = static_cast<std::size_t>(ctx.step() - 1);
        (*shared)[index](ctx);
        return index + 1 >= shared->size() ? StepResult::kDone : StepResult::kContinue;
      },
      priority, std::move(name));
  task.empty_ = empty;
  return task;
}

Task Task::idle_steps(TaskId id, int count, int priority) {
  return from_steps(id, std::vector<Step>(static_cast<std::size_t>(std::max(count, 0)),
                                          [](TaskContext&) {}),
                    priority);
}

std::string ExecutionTrace::to_text() const {
  std::ostringstream out;
  for (const auto& e : entries) out << e.tick << ',' << e.task << ',' << e.step << '\n';
  return out.str();
}

ExecutionTrace ExecutionTrace::from_text(const std::string& text) {
  ExecutionTrace trace;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TraceEntry e{};
    char c1 = 0, c2 = 0;
    std::istringstream fields(line);
    if (!(fields >> e.tick >> c1 >> e.task >> c2 >> e.step) || c1 != ',' || c2 != ',') {
      throw KernelError("malformed trace line: " + line);
    }
    trace.entries.push_back(e);
  }
  return trace;
}

Kernel::Kernel(KernelConfig config) : config_(config) {
  if (config_.time_slice < 1) throw KernelError("time_slice must be >= 1");
}

TaskId Kernel::spawn(Task task) {
  const TaskId id = task.id();
  if (tasks_.count(id)) throw KernelError("duplicate task id " + std::to_string(id));
  const bool empty = task.empty_;
  auto& slot = tasks_.emplace(id, Slot{std::move(task)}).first->second;
  if (empty) {
    slot.state = TaskState::kFinished;
    trace_.completed.push_back(id);
  } else {
    ready_.push_back(id);
  }
  return id;
}

void Kernel::add_tick_hook(TickHook hook) { hooks_.push_back(std::move(hook)); }

const ExecutionTrace& Kernel::start(Task first_task) {
  spawn(std::move(first_task));
  return run_until_idle();
}

const ExecutionTrace& Kernel::run_until_idle() {
  while (!idle()) {
    if (config_.max_ticks != 0 && now_ >= config_.max_ticks) {
      throw KernelError("livelock guard: exceeded " + std::to_string(config_.max_ticks) +
                        " ticks");
    }
    tick();
  }
  return trace_;
}

std::optional<TaskId> Kernel::pick() {
  if (config_.policy == Policy::kRoundRobin) {
    if (current_ && slice_used_ < config_.time_slice) return current_;
    if (current_) {
      // Quantum used up: back to the tail.
      tasks_.at(*current_).state = TaskState::kReady;
      ready_.push_back(*current_);
      current_.reset();
    }
    if (ready_.empty()) return std::nullopt;
    const TaskId next = ready_.front();
    ready_.pop_front();
    slice_used_ = 0;
    return next;
  }

  // Priority: the lowest number wins; FIFO among equals. The running task
  // stays at the head of its level, so it is only displaced by a strictly
  // higher priority.
  if (current_) {
    ready_.push_front(*current_);
    tasks_.at(*current_).state = TaskState::kReady;
    current_.reset();
  }
  if (ready_.empty()) return std::nullopt;
  auto best = ready_.begin();
  for (auto it = ready_.begin(); it != ready_.end(); ++it) {
    if (tasks_.at(*it).task.priority() < tasks_.at(*best).task.priority()) best = it;
  }
  const TaskId next = *best;
  ready_.erase(best);
  return next;
}

bool Kernel::tick() {
  for (auto& hook : hooks_) hook(now_);

  const auto chosen = pick();
  if (!chosen) return false;

  current_ = chosen;
  Slot& slot = tasks_.at(*chosen);
  slot.state = TaskState::kRunning;
  const int step = slot.next_step;
  trace_.entries.push_back({now_, *chosen, step});

  TaskContext ctx(*this, *chosen, step);
  const StepResult result = slot.task.body_(ctx);
  ++slice_used_;
  ++now_;

  // The body may have spawned tasks; std::map references stay valid.
  switch (result) {
    case StepResult::kContinue:
      ++slot.next_step;
      break;
    case StepResult::kRetry:
      break;
    case StepResult::kDone:
      slot.state = TaskState::kFinished;
      trace_.completed.push_back(*chosen);
      current_.reset();
      break;
  }
  return true;
}

std::optional<TaskState> Kernel::state(TaskId id) const {
  auto it = tasks_.find(id);
  if (it == tasks_.end()) return std::nullopt;
  return it->second.state;
}

std::string Kernel::task_name(TaskId id) const {
  auto it = tasks_.find(id);
  return it == tasks_.end() ? std::string{} : it->second.task.name();
}

}  // namespace rtaes::kernel
