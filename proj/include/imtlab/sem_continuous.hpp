#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "imtlab/ast.hpp"
#include "imtlab/obs.hpp"
#include "imtlab/oracle.hpp"
#include "imtlab/store.hpp"

namespace imt {

// Runtime faults (out-of-bounds index, type mismatch, stuck configuration).
// Distinct from power failures; validated programs never raise them.
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EvalResult {
  Value value;
  ObsSeq reads;
};

// N, V |- e \/_r v with taint propagation: a binop result is tainted iff an
// operand is; reads of in(tau) values keep their timestamp.
EvalResult eval_expr(const Store& nv, const Store& vol, const Expr& e);

// Evaluation against a non-volatile overlay chain (newest first), e.g.
// N <| L for redo logging and Ts <| Tp for tasks, plus volatile memory.
// Locations in `fault_on_read` raise EvalError when read (uninitialized
// volatile task-locals).
struct EvalEnv {
  std::vector<const Store*> nv_chain;
  const Store* vol = nullptr;
  const LocSet* fault_on_read = nullptr;
};
EvalResult eval_expr_env(const EvalEnv& env, const Expr& e);

// Labeled commands for programs produced by task translation.
using CodeContext = std::map<std::string, CommandPtr>;

struct ContConfig {
  int64_t tau = 0;
  Store nv;
  Store vol;
  CommandPtr cmd;

  bool terminal() const { return is_terminal(*cmd); }
};

ContConfig initial_cont_config(const Program& p, int64_t tau = 0);

struct ContStep {
  ContConfig next;
  ObsSeq obs;
  std::string rule;
  LocSet writes;  // locations written by this step (used by Wt/FstWt)
};

// One small step of the continuously-powered semantics. Checkpoint behaves
// as a no-op that emits the checkpoint observation; x := IN() writes a
// tainted in(tau) with the oracle's magnitude; tau advances by one on every
// rule except bare skip sequencing and goto.
ContStep step_cont(const ContConfig& cfg, const InputOracle& oracle,
                   const CodeContext& ctx = {});

// Identical configuration at a strictly later time; no observation.
ContConfig sleep(const ContConfig& cfg, int64_t tau_target);

struct ContRun {
  ContConfig final;
  ObsSeq obs;
  int64_t steps = 0;
};

ContRun run_cont(const ContConfig& start, const InputOracle& oracle, int64_t fuel,
                 const CodeContext& ctx = {});
ContRun run_cont(const Program& p, const InputOracle& oracle, int64_t fuel);

namespace detail {
// Assignments, input, and skip share one body across all execution models;
// checkpoint/reboot/toTask stay model-specific.
struct InstrEffectHandle {
  Store nv;
  Store vol;
  ObsSeq obs;
  std::string rule;
  bool advances_tau = true;
  LocSet writes;
};
InstrEffectHandle exec_shared_instr(const Store& nv, const Store& vol, const Instr& instr,
                                    int64_t tau, const InputOracle& oracle);
}  // namespace detail

}  // namespace imt
