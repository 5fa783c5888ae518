#pragma once

#include <optional>
#include <string>
#include <vector>

#include "imtlab/sem_continuous.hpp"

namespace imt {

// Context saved by the last checkpoint: the omega-restricted non-volatile
// snapshot, the full volatile snapshot, and the continuation command.
struct CheckpointCtx {
  Store saved_nv;  // domain = expansion of the omega at the checkpoint
  Store saved_vol;
  CommandPtr saved_cmd;
};

struct IntermittentConfig {
  int64_t tau = 0;
  CheckpointCtx ctx;
  Store nv;
  Store vol;
  CommandPtr cmd;

  bool terminal() const { return is_terminal(*cmd); }
};

// kappa starts as (empty, initial V, whole program): a failure before the
// first checkpoint restarts from the beginning.
IntermittentConfig initial_int_config(const Program& p, int64_t tau = 0);

struct IntOptions {
  // Default: the checkpoint step is atomic. When tearing is enabled a
  // checkpoint takes a prepare step followed by a commit step, and a power
  // failure between them leaves a context with the new data snapshot but
  // the old continuation (a torn, incorrect checkpoint) so the resulting
  // violations can be studied.
  bool tearing = false;
  int64_t reset_value = 0;
};

struct IntStep {
  IntermittentConfig next;
  ObsSeq obs;
  std::string rule;
};

// One small step of the basic checkpoint semantics. `fail_now` carries the
// scheduled off-duration when the power fails at this step; it preempts the
// instruction unless the configuration is already rebooting.
IntStep step_int(const IntermittentConfig& cfg, const InputOracle& oracle,
                 std::optional<int64_t> fail_now, const CodeContext& ctx = {},
                 const IntOptions& opts = {});

// A recorded execution: the starting configuration plus one entry per step.
struct TraceStep {
  IntermittentConfig config;  // configuration after the step
  ObsSeq obs;
  std::string rule;
};

struct Trace {
  IntermittentConfig start;
  std::vector<TraceStep> steps;
  ObsSeq obs;  // concatenated observations
};

enum class RunStatus { Done, FuelExhausted, RetryCapHit };

struct IntRun {
  IntermittentConfig final;
  ObsSeq obs;
  Trace trace;
  RunStatus status = RunStatus::Done;
  int64_t steps = 0;
};

// Executes until terminal skip, fuel exhaustion, or more than `retry_cap`
// reboots inside a single checkpoint region (an adversarial schedule that
// starves the region; reported, not looped forever). Schedule entries whose
// step index falls on a reboot step fire at the next opportunity; entries
// beyond termination are ignored.
IntRun run_int(const Program& p, const InputOracle& oracle, const FailureSchedule& schedule,
               int64_t fuel, const IntOptions& opts = {}, int retry_cap = 8);

// The non-volatile store immediately after the most recent reboot of the
// trace (the initial store when no reboot happened).
Store nearest_reboot_state(const Trace& trace);

}  // namespace imt
