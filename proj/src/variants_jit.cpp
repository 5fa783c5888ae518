#include "imtlab/variants.hpp"

#include <deque>

namespace imt {
namespace {

const RebootInstr* reboot_head(const Command& cmd) {
  if (const auto* s = std::get_if<SingleCmd>(&cmd.node)) {
    return std::get_if<RebootInstr>(&s->instr.node);
  }
  return nullptr;
}

const CheckpointInstr* checkpoint_head(const Command& cmd, CommandPtr* cont) {
  if (const auto* s = std::get_if<SingleCmd>(&cmd.node)) {
    if (const auto* cp = std::get_if<CheckpointInstr>(&s->instr.node)) {
      *cont = skip_command();
      return cp;
    }
  } else if (const auto* s = std::get_if<SeqCmd>(&cmd.node)) {
    if (const auto* cp = std::get_if<CheckpointInstr>(&s->head.node)) {
      *cont = s->tail;
      return cp;
    }
  }
  return nullptr;
}

}  // namespace

JitConfig initial_jit_config(const Program& p, int64_t tau) {
  JitConfig cfg;
  cfg.tau = tau;
  cfg.nv = initial_store(p.nonvolatile);
  cfg.vol = initial_store(p.volatiles);
  cfg.cmd = p.body;
  cfg.nv0 = cfg.nv;
  cfg.vol0 = cfg.vol;
  cfg.cmd0 = p.body;
  return cfg;
}

JitStep step_jit(const JitConfig& cfg, const InputOracle& oracle, bool low_power_now,
                 const std::optional<FailureEvent>& outcome, int64_t reset_value) {
  if (cfg.terminal()) throw EvalError("step on terminal configuration");
  JitStep out;
  out.next = cfg;

  if (const auto* rb = reboot_head(*cfg.cmd)) {
    if (cfg.ctx.success) {
      out.next.vol = cfg.ctx.saved_vol;
      out.next.cmd = cfg.ctx.saved_cmd;
      out.next.tau = cfg.tau + rb->duration;
      out.obs.push_back(Obs::reboot());
      out.rule = "JIT-Restore";
    } else {
      out.next.nv = cfg.nv0;
      out.next.vol = reset_volatile(cfg.vol, reset_value);
      out.next.cmd = cfg.cmd0;
      out.next.tau = cfg.tau + rb->duration;
      out.obs.push_back(Obs::reboot());
      out.rule = "JIT-Restart";
    }
    return out;
  }

  if (low_power_now) {
    out.next.cmd = cons_instr(Instr{CheckpointInstr{}}, cfg.cmd);
    out.next.tau = cfg.tau + 1;
    out.rule = "JIT-LowPower";
    return out;
  }

  {
    CommandPtr cont;
    if (checkpoint_head(*cfg.cmd, &cont) != nullptr) {
      if (outcome) {
        if (outcome->checkpoint_succeeds) {
          out.next.ctx = JitCtx{true, cfg.vol, cont};
          out.rule = "JIT-CP-Success";
        } else {
          out.next.ctx.success = false;
          out.rule = "JIT-CP-Fail";
        }
        out.next.cmd = make_single(Instr{RebootInstr{outcome->off_duration}});
        out.next.tau = cfg.tau + 1;
        return out;
      }
      // A checkpoint not caused by low power behaves as under continuous
      // execution.
      out.next.cmd = cont;
      out.next.tau = cfg.tau + 1;
      out.obs.push_back(Obs::checkpoint());
      out.rule = "JIT-CheckPoint-NoOp";
      return out;
    }
  }

  if (const auto* s = std::get_if<IfCmd>(&cfg.cmd->node)) {
    EvalResult g = eval_expr(cfg.nv, cfg.vol, *s->guard);
    if (!g.value.is_bool()) throw EvalError("non-boolean branch guard");
    out.next.cmd = g.value.truthy() ? s->then_cmd : s->else_cmd;
    out.next.tau = cfg.tau + 1;
    out.obs = std::move(g.reads);
    out.rule = g.value.truthy() ? "JIT-If-T" : "JIT-If-F";
    return out;
  }

  const Instr* instr = nullptr;
  CommandPtr cont;
  if (const auto* s = std::get_if<SingleCmd>(&cfg.cmd->node)) {
    instr = &s->instr;
    cont = skip_command();
  } else if (const auto* s = std::get_if<SeqCmd>(&cfg.cmd->node)) {
    instr = &s->head;
    cont = s->tail;
  } else {
    throw EvalError("stuck configuration");
  }
  if (std::holds_alternative<ToTaskInstr>(instr->node)) {
    throw EvalError("instruction not valid in the JIT model");
  }

  auto eff = detail::exec_shared_instr(cfg.nv, cfg.vol, *instr, cfg.tau, oracle);
  out.next.nv = std::move(eff.nv);
  out.next.vol = std::move(eff.vol);
  out.next.cmd = cont;
  out.next.tau = cfg.tau + (eff.advances_tau ? 1 : 0);
  out.obs = std::move(eff.obs);
  out.rule = "JIT-" + eff.rule;
  return out;
}

VariantRun<JitConfig> run_jit(const Program& p, const InputOracle& oracle,
                              const FailureSchedule& schedule, int64_t fuel) {
  VariantRun<JitConfig> run;
  JitConfig cfg = initial_jit_config(p);
  std::deque<FailureEvent> pending(schedule.events.begin(), schedule.events.end());
  std::optional<FailureEvent> outcome;  // pending checkpoint resolution
  for (int64_t i = 0;; ++i) {
    if (cfg.terminal()) {
      run.status = RunStatus::Done;
      break;
    }
    if (i >= fuel) {
      run.status = RunStatus::FuelExhausted;
      break;
    }
    bool low_power = false;
    if (!outcome && !pending.empty() && pending.front().at_step <= i &&
        !reboot_head(*cfg.cmd)) {
      low_power = true;
      outcome = pending.front();
      pending.pop_front();
    }
    JitStep s = low_power ? step_jit(cfg, oracle, true, std::nullopt)
                          : step_jit(cfg, oracle, false, outcome);
    if (s.rule == "JIT-CP-Success" || s.rule == "JIT-CP-Fail") outcome.reset();
    run.obs.insert(run.obs.end(), s.obs.begin(), s.obs.end());
    cfg = std::move(s.next);
    ++run.steps;
  }
  run.final = std::move(cfg);
  return run;
}

}  // namespace imt
