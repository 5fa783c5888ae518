#pragma once

#include <map>
#include <optional>

#include "imtlab/sem_intermittent.hpp"

namespace imt {

// ---------------------------------------------------------------------------
// Undo logging: old values are logged immediately before the first write to
// a location in omega; reboot rolls the region back via N <| L.
// ---------------------------------------------------------------------------

struct UndoCtx {
  Store log;          // partial: old values of logged locations
  Store saved_vol;
  CommandPtr saved_cmd;
  NameSet omega;
  LocSet logged;      // dom(log), cell-granular
};

struct UndoConfig {
  int64_t tau = 0;
  UndoCtx ctx;
  Store nv;
  Store vol;
  CommandPtr cmd;

  bool terminal() const { return is_terminal(*cmd); }
};

UndoConfig initial_undo_config(const Program& p, int64_t tau = 0);

struct UndoStep {
  UndoConfig next;
  ObsSeq obs;
  std::string rule;
};

UndoStep step_undo(const UndoConfig& cfg, const InputOracle& oracle,
                   std::optional<int64_t> fail_now, const CodeContext& ctx = {},
                   int64_t reset_value = 0);

// ---------------------------------------------------------------------------
// Redo logging: writes to omega locations go to the log, reads resolve
// against N <| L, checkpoint commits the log into N, reboot discards it.
// ---------------------------------------------------------------------------

struct RedoCtx {
  Store log;  // partial: pending values for omega locations
  Store saved_vol;
  CommandPtr saved_cmd;
  NameSet omega;
};

struct RedoConfig {
  int64_t tau = 0;
  RedoCtx ctx;
  Store nv;
  Store vol;
  CommandPtr cmd;

  bool terminal() const { return is_terminal(*cmd); }
};

RedoConfig initial_redo_config(const Program& p, int64_t tau = 0);

struct RedoStep {
  RedoConfig next;
  ObsSeq obs;
  std::string rule;
};

RedoStep step_redo(const RedoConfig& cfg, const InputOracle& oracle,
                   std::optional<int64_t> fail_now, const CodeContext& ctx = {},
                   int64_t reset_value = 0);

// Effective memory a redo configuration denotes: N <| L.
Store redo_effective_nv(const RedoConfig& cfg);

// ---------------------------------------------------------------------------
// Generic run loop shared by the logging variants (schedule handling and
// retry cap mirror run_int).
// ---------------------------------------------------------------------------

template <typename Config>
struct VariantRun {
  Config final;
  ObsSeq obs;
  RunStatus status = RunStatus::Done;
  int64_t steps = 0;
};

VariantRun<UndoConfig> run_undo(const Program& p, const InputOracle& oracle,
                                const FailureSchedule& schedule, int64_t fuel,
                                int retry_cap = 8);
VariantRun<RedoConfig> run_redo(const Program& p, const InputOracle& oracle,
                                const FailureSchedule& schedule, int64_t fuel,
                                int retry_cap = 8);

// ---------------------------------------------------------------------------
// Task-based model (redo-logged task-shared memory, transactional commits).
// ---------------------------------------------------------------------------

struct TaskConfig {
  int64_t tau = 0;
  std::map<int, TaskDef> task_map;
  int current = 0;
  Store ts;      // task-shared, non-volatile
  Store tp;      // task-private log; dom(tp) subset of expansion(current omega)
  Store tl_nv;   // task-local, non-volatile
  Store tl_vol;  // task-local, volatile; cells carry an initialized bit
  LocSet tl_vol_uninit;  // volatile locals whose bit is 0
  CommandPtr cmd;

  bool terminal() const { return is_terminal(*cmd); }
  const TaskDef& current_task() const { return task_map.at(current); }
};

TaskConfig initial_task_config(const TaskProgram& p, int64_t tau = 0);

struct TaskStep {
  TaskConfig next;
  ObsSeq obs;
  std::string rule;
};

// Task transitions commit Tp into Ts and emit a transition observation,
// normalized to the checkpoint marker; a power failure resets only the
// volatile part of task-local memory (clearing initialized bits); reboot
// clears Tp and restarts the current task's command.
TaskStep step_task(const TaskConfig& cfg, const InputOracle& oracle,
                   std::optional<int64_t> fail_now, int64_t reset_value = 0);

VariantRun<TaskConfig> run_task(const TaskProgram& p, const InputOracle& oracle,
                                const FailureSchedule& schedule, int64_t fuel,
                                int retry_cap = 8);

// Effective memory of a task configuration (for erased comparison):
// N = (Ts <| Tp) + Tl_N, V = Tl_V.
Store task_effective_nv(const TaskConfig& cfg);

// Task -> checkpoint translation: each task i becomes a labeled block
// L<i>: checkpoint(omega_i); [[c_i]] with toTask(j) |-> goto L<j>. The
// resulting program declares task-shared and non-volatile locals in nv and
// volatile locals in vol, and its main body jumps to the entry task.
std::string task_label(int task_id);
CommandPtr translate_command(const Command& c);
Program translate_tasks(const TaskProgram& p);

// ---------------------------------------------------------------------------
// JIT checkpointing (Hibernus-style): on a low-power event the runtime
// checkpoints on the spot; a failed checkpoint restarts from the initial
// state.
// ---------------------------------------------------------------------------

struct JitCtx {
  bool success = false;  // fail until the first successful checkpoint
  Store saved_vol;
  CommandPtr saved_cmd;
};

struct JitConfig {
  int64_t tau = 0;
  JitCtx ctx;
  Store nv;
  Store vol;
  CommandPtr cmd;
  // Initial image for JIT-Restart.
  Store nv0;
  Store vol0;
  CommandPtr cmd0;

  bool terminal() const { return is_terminal(*cmd); }
};

JitConfig initial_jit_config(const Program& p, int64_t tau = 0);

struct JitStep {
  JitConfig next;
  ObsSeq obs;
  std::string rule;
};

// `low_power_now` injects checkpoint() (JIT-LowPower); `outcome` resolves a
// pending checkpoint as success or failure and supplies the off duration.
JitStep step_jit(const JitConfig& cfg, const InputOracle& oracle,
                 bool low_power_now, const std::optional<FailureEvent>& outcome,
                 int64_t reset_value = 0);

VariantRun<JitConfig> run_jit(const Program& p, const InputOracle& oracle,
                              const FailureSchedule& schedule, int64_t fuel);

// ---------------------------------------------------------------------------
// Idempotent-region rewriting (Ratchet): break WAR dependences by inserting
// empty checkpoints before the offending writes; the output passes the WAR
// check with empty checkpoint sets. Fresh temporaries become volatile
// declarations.
// ---------------------------------------------------------------------------

Program rewrite_ratchet(const Program& p);

}  // namespace imt
