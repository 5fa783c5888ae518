#include "imtlab/sem_intermittent.hpp"

#include <deque>

namespace imt {

IntermittentConfig initial_int_config(const Program& p, int64_t tau) {
  IntermittentConfig cfg;
  cfg.tau = tau;
  cfg.nv = initial_store(p.nonvolatile);
  cfg.vol = initial_store(p.volatiles);
  cfg.cmd = p.body;
  cfg.ctx.saved_nv = Store{};
  cfg.ctx.saved_vol = cfg.vol;
  cfg.ctx.saved_cmd = p.body;
  return cfg;
}

namespace {

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

const RebootInstr* reboot_head(const Command& cmd) {
  if (const auto* s = std::get_if<SingleCmd>(&cmd.node)) {
    return std::get_if<RebootInstr>(&s->instr.node);
  }
  return nullptr;
}

}  // namespace

IntStep step_int(const IntermittentConfig& cfg, const InputOracle& oracle,
                 std::optional<int64_t> fail_now, const CodeContext& ctx,
                 const IntOptions& opts) {
  if (cfg.terminal()) throw EvalError("step on terminal configuration");
  IntStep out;
  out.next = cfg;

  if (const auto* rb = reboot_head(*cfg.cmd)) {
    out.next.nv = overwrite(cfg.nv, cfg.ctx.saved_nv);
    out.next.vol = cfg.ctx.saved_vol;
    out.next.cmd = cfg.ctx.saved_cmd;
    out.next.tau = cfg.tau + rb->duration;
    out.obs.push_back(Obs::reboot());
    out.rule = "I/O-CP-Reboot";
    return out;
  }

  if (fail_now) {
    CommandPtr cont;
    const CheckpointInstr* cp = checkpoint_head(*cfg.cmd, &cont);
    if (cp != nullptr && opts.tearing) {
      // Non-atomic checkpoint: the data snapshot lands but the context keeps
      // the stale continuation and volatile image.
      out.next.ctx.saved_nv = restrict(cfg.nv, cp->omega);
    }
    out.next.vol = reset_volatile(cfg.vol, opts.reset_value);
    out.next.cmd = make_single(Instr{RebootInstr{*fail_now}});
    out.next.tau = cfg.tau + 1;
    out.rule = (cp != nullptr && opts.tearing) ? "I/O-CP-Torn-PowerFail" : "I/O-CP-PowerFail";
    return out;
  }

  {
    CommandPtr cont;
    if (const CheckpointInstr* cp = checkpoint_head(*cfg.cmd, &cont)) {
      out.next.ctx = CheckpointCtx{restrict(cfg.nv, cp->omega), cfg.vol, cont};
      out.next.cmd = cont;
      out.next.tau = cfg.tau + 1;
      out.obs.push_back(Obs::checkpoint());
      out.rule = "I/O-CP-CheckPoint";
      return out;
    }
  }

  if (const auto* g = std::get_if<GotoCmd>(&cfg.cmd->node)) {
    auto it = ctx.find(g->label);
    if (it == ctx.end()) throw EvalError("goto to missing label '" + g->label + "'");
    out.next.cmd = it->second;
    out.rule = "Goto";
    return out;
  }

  if (const auto* s = std::get_if<IfCmd>(&cfg.cmd->node)) {
    EvalResult g = eval_expr(cfg.nv, cfg.vol, *s->guard);
    if (!g.value.is_bool()) throw EvalError("non-boolean branch guard");
    out.next.cmd = g.value.truthy() ? s->then_cmd : s->else_cmd;
    out.next.tau = cfg.tau + 1;
    out.obs = std::move(g.reads);
    out.rule = g.value.truthy() ? "I/O-CP-If-T" : "I/O-CP-If-F";
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
    throw EvalError("toTask not valid in the checkpoint model");
  }

  auto eff = detail::exec_shared_instr(cfg.nv, cfg.vol, *instr, cfg.tau, oracle);
  out.next.nv = std::move(eff.nv);
  out.next.vol = std::move(eff.vol);
  out.next.cmd = cont;
  out.next.tau = cfg.tau + (eff.advances_tau ? 1 : 0);
  out.obs = std::move(eff.obs);
  out.rule = "I/O-CP-" + eff.rule;
  return out;
}

IntRun run_int(const Program& p, const InputOracle& oracle, const FailureSchedule& schedule,
               int64_t fuel, const IntOptions& opts, int retry_cap) {
  CodeContext ctx;
  for (const auto& [label, cmd] : p.labels) ctx[label] = cmd;

  IntRun run;
  IntermittentConfig cfg = initial_int_config(p);
  run.trace.start = cfg;

  std::deque<FailureEvent> pending(schedule.events.begin(), schedule.events.end());
  int reboots_since_checkpoint = 0;

  for (int64_t step = 0;; ++step) {
    if (cfg.terminal()) {
      run.status = RunStatus::Done;
      break;
    }
    if (step >= fuel) {
      run.status = RunStatus::FuelExhausted;
      break;
    }
    std::optional<int64_t> fail_now;
    if (!pending.empty() && pending.front().at_step <= step && !reboot_head(*cfg.cmd)) {
      fail_now = pending.front().off_duration;
      pending.pop_front();
    }
    IntStep s = step_int(cfg, oracle, fail_now, ctx, opts);
    if (s.rule == "I/O-CP-Reboot") {
      if (++reboots_since_checkpoint > retry_cap) {
        run.status = RunStatus::RetryCapHit;
        cfg = std::move(s.next);
        run.trace.steps.push_back(TraceStep{cfg, s.obs, s.rule});
        ++run.steps;
        break;
      }
    } else if (s.rule == "I/O-CP-CheckPoint") {
      reboots_since_checkpoint = 0;
    }
    run.obs.insert(run.obs.end(), s.obs.begin(), s.obs.end());
    cfg = s.next;
    run.trace.steps.push_back(TraceStep{cfg, std::move(s.obs), std::move(s.rule)});
    ++run.steps;
  }
  run.trace.obs = run.obs;
  run.final = std::move(cfg);
  return run;
}

Store nearest_reboot_state(const Trace& trace) {
  for (auto it = trace.steps.rbegin(); it != trace.steps.rend(); ++it) {
    if (it->rule == "I/O-CP-Reboot") return it->config.nv;
  }
  return trace.start.nv;
}

}  // namespace imt
