#pragma once

// A deterministic cooperative kernel. Each tick the kernel runs its tick
// hooks (the stand-in for timer/interrupt handlers), picks one ready task
// according to the policy and runs exactly one step of it. Tasks give up the
// CPU at step boundaries only.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtaes::kernel {

using TaskId = int;
using Tick = std::uint64_t;

enum class Policy { kRoundRobin, kPriority };

struct KernelConfig {
  Policy policy = Policy::kRoundRobin;
  int time_slice = 1;  // ticks per quantum, round-robin only
  // Livelock guard; run_until_idle throws once this many ticks have elapsed.
  // Zero disables the guard.
  Tick max_ticks = 1'000'000;
};

enum class TaskState { kReady, kRunning, kFinished };

// What a step reports back to the scheduler.
enum class StepResult {
  kContinue,  // step done, more to come
  kDone,      // task finished with this step
  kRetry,     // no progress (e.g. backpressure); the same step runs again later
};

class Kernel;

class TaskContext {
 public:
  TaskContext(Kernel& kernel, TaskId self, int step) : kernel_(kernel), self_(self), step_(step) {}

  Kernel& kernel() { return kernel_; }
  TaskId self() const { return self_; }
  // 1-based index of the step being run.
  int step() const { return step_; }
  Tick now() const;

 private:
  Kernel& kernel_;
  TaskId self_;
  int step_;
};

class Task {
 public:
  using Body = std::function<StepResult(TaskContext&)>;
  using Step = std::function<void(TaskContext&)>;

  // A task whose body is called once per step until it returns kDone.
  Task(TaskId id, Body body, int priority = 0, std::string name = {});

  // A task made of a fixed list of steps. An empty list finishes without
  // ever being dispatched.
  static Task from_steps(TaskId id, std::vector<Step> steps, int priority = 0,
                         std::string name = {});
  // `count` steps that do nothing but show up in the trace.
  static Task idle_steps(TaskId id, int count, int priority = 0);

  TaskId id() const { return id_; }
  int priority() const { return priority_; }
  const std::string& name() const { return name_; }

 private:
  friend class Kernel;
  TaskId id_;
  Body body_;
  int priority_;
  std::string name_;
  bool empty_ = false;
};

struct TraceEntry {
  Tick tick;
  TaskId task;
  int step;
  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct ExecutionTrace {
  std::vector<TraceEntry> entries;
  std::vector<TaskId> completed;  // in completion order

  // One `tick,task_id,step_index` line per entry.
  std::string to_text() const;
  static ExecutionTrace from_text(const std::string& text);
};

class KernelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Kernel {
 public:
  using TickHook = std::function<void(Tick)>;

  explicit Kernel(KernelConfig config = {});
  Kernel(const Kernel&) = delete;
  Kernel& operator=(const Kernel&) = delete;

  // Adds a task to the ready queue (tail under round-robin). Throws
  // KernelError on a duplicate id. A task spawned during tick t is first
  // eligible at tick t + 1.
  TaskId spawn(Task task);

  // Hooks run at the start of every tick, before dispatch.
  void add_tick_hook(TickHook hook);

  // Spawns the first task and runs until no task is left.
  const ExecutionTrace& start(Task first_task);

  // Runs ticks until every task has finished. Throws KernelError when the
  // livelock guard fires.
  const ExecutionTrace& run_until_idle();

  // Runs a single tick; returns false if nothing was runnable.
  bool tick();

  bool idle() const { return ready_.empty() && !current_; }
  Tick now() const { return now_; }
  const ExecutionTrace& trace() const { return trace_; }
  std::optional<TaskState> state(TaskId id) const;
  const KernelConfig& config() const { return config_; }
  std::string task_name(TaskId id) const;

 private:
  struct Slot {
    Task task;
    TaskState state = TaskState::kReady;
    int next_step = 1;
  };

  std::optional<TaskId> pick();

  KernelConfig config_;
  std::map<TaskId, Slot> tasks_;
  std::deque<TaskId> ready_;  // readiness order
  std::optional<TaskId> current_;
  int slice_used_ = 0;
  Tick now_ = 0;
  std::vector<TickHook> hooks_;
  ExecutionTrace trace_;
};

}  // namespace rtaes::kernel
