#include "imtlab/variants.hpp"

#include <deque>

namespace imt {
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

struct InstrHead {
  const Instr* instr = nullptr;
  CommandPtr cont;
};

std::optional<InstrHead> instr_head(const Command& cmd) {
  if (const auto* s = std::get_if<SingleCmd>(&cmd.node)) {
    return InstrHead{&s->instr, skip_command()};
  }
  if (const auto* s = std::get_if<SeqCmd>(&cmd.node)) {
    return InstrHead{&s->head, s->tail};
  }
  return std::nullopt;
}

}  // namespace

// --- undo logging ----------------------------------------------------------

UndoConfig initial_undo_config(const Program& p, int64_t tau) {
  UndoConfig cfg;
  cfg.tau = tau;
  cfg.nv = initial_store(p.nonvolatile);
  cfg.vol = initial_store(p.volatiles);
  cfg.cmd = p.body;
  cfg.ctx.saved_vol = cfg.vol;
  cfg.ctx.saved_cmd = p.body;
  return cfg;
}

UndoStep step_undo(const UndoConfig& cfg, const InputOracle& oracle,
                   std::optional<int64_t> fail_now, const CodeContext& ctx,
                   int64_t reset_value) {
  if (cfg.terminal()) throw EvalError("step on terminal configuration");
  UndoStep out;
  out.next = cfg;

  if (const auto* rb = reboot_head(*cfg.cmd)) {
    out.next.nv = overwrite(cfg.nv, cfg.ctx.log);
    out.next.vol = cfg.ctx.saved_vol;
    out.next.cmd = cfg.ctx.saved_cmd;
    out.next.tau = cfg.tau + rb->duration;
    out.next.ctx.log = Store{};
    out.next.ctx.logged.clear();
    out.obs.push_back(Obs::reboot());
    out.rule = "UL-Reboot";
    return out;
  }

  if (fail_now) {
    out.next.vol = reset_volatile(cfg.vol, reset_value);
    out.next.cmd = make_single(Instr{RebootInstr{*fail_now}});
    out.next.tau = cfg.tau + 1;
    out.rule = "UL-PowerFail";
    return out;
  }

  {
    CommandPtr cont;
    if (const CheckpointInstr* cp = checkpoint_head(*cfg.cmd, &cont)) {
      out.next.ctx = UndoCtx{Store{}, cfg.vol, cont, cp->omega, {}};
      out.next.cmd = cont;
      out.next.tau = cfg.tau + 1;
      out.obs.push_back(Obs::checkpoint());
      out.rule = "UL-Commit";
      return out;
    }
  }

  if (const auto* g = std::get_if<GotoCmd>(&cfg.cmd->node)) {
    auto it = ctx.find(g->label);
    if (it == ctx.end()) throw EvalError("goto to missing label '" + g->label + "'");
    out.next.cmd = it->second;
    out.rule = "UL-Goto";
    return out;
  }

  if (const auto* s = std::get_if<IfCmd>(&cfg.cmd->node)) {
    EvalResult g = eval_expr(cfg.nv, cfg.vol, *s->guard);
    if (!g.value.is_bool()) throw EvalError("non-boolean branch guard");
    out.next.cmd = g.value.truthy() ? s->then_cmd : s->else_cmd;
    out.next.tau = cfg.tau + 1;
    out.obs = std::move(g.reads);
    out.rule = g.value.truthy() ? "UL-If-T" : "UL-If-F";
    return out;
  }

  auto head = instr_head(*cfg.cmd);
  if (!head) throw EvalError("stuck configuration");
  if (std::holds_alternative<ToTaskInstr>(head->instr->node)) {
    throw EvalError("toTask not valid in the undo-log model");
  }

  // The first write to an omega location logs its old value (UL-NV-Log /
  // UL-Arr-Log); everything else is a plain update.
  auto eff = detail::exec_shared_instr(cfg.nv, cfg.vol, *head->instr, cfg.tau, oracle);
  std::string rule = "UL-" + eff.rule;
  for (const Loc& w : eff.writes) {
    if (!cfg.nv.contains(w)) continue;  // volatile writes are never logged
    if (cfg.ctx.omega.count(w.name) && !cfg.ctx.logged.count(w)) {
      out.next.ctx.log.insert(w, cfg.nv.at(w));
      out.next.ctx.logged.insert(w);
      rule = w.is_cell() ? "UL-Arr-Log" : "UL-NV-Log";
    }
  }
  out.next.nv = std::move(eff.nv);
  out.next.vol = std::move(eff.vol);
  out.next.cmd = head->cont;
  out.next.tau = cfg.tau + (eff.advances_tau ? 1 : 0);
  out.obs = std::move(eff.obs);
  out.rule = std::move(rule);
  return out;
}

// --- redo logging ----------------------------------------------------------

RedoConfig initial_redo_config(const Program& p, int64_t tau) {
  RedoConfig cfg;
  cfg.tau = tau;
  cfg.nv = initial_store(p.nonvolatile);
  cfg.vol = initial_store(p.volatiles);
  cfg.cmd = p.body;
  cfg.ctx.saved_vol = cfg.vol;
  cfg.ctx.saved_cmd = p.body;
  return cfg;
}

Store redo_effective_nv(const RedoConfig& cfg) { return overwrite(cfg.nv, cfg.ctx.log); }

RedoStep step_redo(const RedoConfig& cfg, const InputOracle& oracle,
                   std::optional<int64_t> fail_now, const CodeContext& ctx,
                   int64_t reset_value) {
  if (cfg.terminal()) throw EvalError("step on terminal configuration");
  RedoStep out;
  out.next = cfg;

  EvalEnv env;
  env.nv_chain = {&cfg.ctx.log, &cfg.nv};
  env.vol = &cfg.vol;

  if (const auto* rb = reboot_head(*cfg.cmd)) {
    // Reboot leaves non-volatile memory untouched; pending updates vanish.
    out.next.ctx.log = Store{};
    out.next.vol = cfg.ctx.saved_vol;
    out.next.cmd = cfg.ctx.saved_cmd;
    out.next.tau = cfg.tau + rb->duration;
    out.obs.push_back(Obs::reboot());
    out.rule = "RL-Reboot";
    return out;
  }

  if (fail_now) {
    out.next.vol = reset_volatile(cfg.vol, reset_value);
    out.next.cmd = make_single(Instr{RebootInstr{*fail_now}});
    out.next.tau = cfg.tau + 1;
    out.rule = "RL-PowerFail";
    return out;
  }

  {
    CommandPtr cont;
    if (const CheckpointInstr* cp = checkpoint_head(*cfg.cmd, &cont)) {
      out.next.nv = overwrite(cfg.nv, cfg.ctx.log);
      out.next.ctx = RedoCtx{Store{}, cfg.vol, cont, cp->omega};
      out.next.cmd = cont;
      out.next.tau = cfg.tau + 1;
      out.obs.push_back(Obs::checkpoint());
      out.rule = "RL-CheckPoint";
      return out;
    }
  }

  if (const auto* g = std::get_if<GotoCmd>(&cfg.cmd->node)) {
    auto it = ctx.find(g->label);
    if (it == ctx.end()) throw EvalError("goto to missing label '" + g->label + "'");
    out.next.cmd = it->second;
    out.rule = "RL-Goto";
    return out;
  }

  if (const auto* s = std::get_if<IfCmd>(&cfg.cmd->node)) {
    EvalResult g = eval_expr_env(env, *s->guard);
    if (!g.value.is_bool()) throw EvalError("non-boolean branch guard");
    out.next.cmd = g.value.truthy() ? s->then_cmd : s->else_cmd;
    out.next.tau = cfg.tau + 1;
    out.obs = std::move(g.reads);
    out.rule = g.value.truthy() ? "RL-If-T" : "RL-If-F";
    return out;
  }

  auto head = instr_head(*cfg.cmd);
  if (!head) throw EvalError("stuck configuration");
  const Instr& instr = *head->instr;
  out.next.cmd = head->cont;
  out.next.tau = cfg.tau + 1;

  if (std::holds_alternative<SkipInstr>(instr.node)) {
    out.next.tau = cfg.tau;
    out.rule = "RL-Skip";
    return out;
  }
  if (const auto* a = std::get_if<AssignInstr>(&instr.node)) {
    EvalResult r = eval_expr_env(env, *a->value);
    out.obs = std::move(r.reads);
    Loc loc{a->target, -1};
    if (cfg.nv.contains(loc)) {
      if (cfg.ctx.omega.count(a->target)) {
        out.next.ctx.log.insert(loc, r.value);
        out.rule = "RL-NV-Log";
      } else {
        out.next.nv.set(loc, r.value);
        out.rule = "RL-NV-Assign";
      }
    } else if (cfg.vol.contains(loc)) {
      out.next.vol.set(loc, r.value);
      out.rule = "RL-V-Assign";
    } else {
      throw EvalError("assignment to unknown location " + loc.to_string());
    }
    return out;
  }
  if (const auto* a = std::get_if<ArrAssignInstr>(&instr.node)) {
    EvalResult idx = eval_expr_env(env, *a->index);
    EvalResult val = eval_expr_env(env, *a->value);
    if (idx.value.is_bool()) throw EvalError("boolean array index");
    Loc loc{a->array, static_cast<int32_t>(idx.value.num)};
    out.obs = std::move(idx.reads);
    out.obs.insert(out.obs.end(), val.reads.begin(), val.reads.end());
    if (cfg.nv.contains(loc)) {
      if (cfg.ctx.omega.count(a->array)) {
        out.next.ctx.log.insert(loc, val.value);
        out.rule = "RL-Arr-Log";
      } else {
        out.next.nv.set(loc, val.value);
        out.rule = "RL-Arr-Assign";
      }
    } else if (cfg.vol.contains(loc)) {
      out.next.vol.set(loc, val.value);
      out.rule = "RL-V-Arr-Assign";
    } else {
      throw EvalError("index out of bounds: " + loc.to_string());
    }
    return out;
  }
  if (const auto* a = std::get_if<InputInstr>(&instr.node)) {
    Loc loc{a->target, -1};
    Value v = Value::make_input(cfg.tau, oracle(cfg.tau));
    out.obs.push_back(Obs::input(cfg.tau));
    if (cfg.nv.contains(loc)) {
      if (cfg.ctx.omega.count(a->target)) {
        out.next.ctx.log.insert(loc, v);
        out.rule = "RL-NV-Log-In";
      } else {
        out.next.nv.set(loc, v);
        out.rule = "RL-NV-Assign-In";
      }
    } else if (cfg.vol.contains(loc)) {
      out.next.vol.set(loc, v);
      out.rule = "RL-V-Assign-In";
    } else {
      throw EvalError("input into unknown location " + loc.to_string());
    }
    return out;
  }
  throw EvalError("instruction not valid in the redo-log model");
}

// --- shared runner ---------------------------------------------------------

namespace {

template <typename Config, typename StepFn>
VariantRun<Config> run_variant(Config cfg, const FailureSchedule& schedule, int64_t fuel,
                               int retry_cap, StepFn&& step) {
  VariantRun<Config> run;
  std::deque<FailureEvent> pending(schedule.events.begin(), schedule.events.end());
  int reboots_since_commit = 0;
  for (int64_t i = 0;; ++i) {
    if (cfg.terminal()) {
      run.status = RunStatus::Done;
      break;
    }
    if (i >= fuel) {
      run.status = RunStatus::FuelExhausted;
      break;
    }
    std::optional<int64_t> fail_now;
    if (!pending.empty() && pending.front().at_step <= i && !reboot_head(*cfg.cmd)) {
      fail_now = pending.front().off_duration;
      pending.pop_front();
    }
    auto s = step(cfg, fail_now);
    if (s.rule.find("Reboot") != std::string::npos) {
      if (++reboots_since_commit > retry_cap) {
        run.status = RunStatus::RetryCapHit;
        cfg = std::move(s.next);
        ++run.steps;
        break;
      }
    } else if (s.rule.find("Commit") != std::string::npos ||
               s.rule.find("CheckPoint") != std::string::npos) {
      reboots_since_commit = 0;
    }
    run.obs.insert(run.obs.end(), s.obs.begin(), s.obs.end());
    cfg = std::move(s.next);
    ++run.steps;
  }
  run.final = std::move(cfg);
  return run;
}

CodeContext label_context(const Program& p) {
  CodeContext ctx;
  for (const auto& [label, cmd] : p.labels) ctx[label] = cmd;
  return ctx;
}

}  // namespace

VariantRun<UndoConfig> run_undo(const Program& p, const InputOracle& oracle,
                                const FailureSchedule& schedule, int64_t fuel, int retry_cap) {
  CodeContext ctx = label_context(p);
  return run_variant(initial_undo_config(p), schedule, fuel, retry_cap,
                     [&](const UndoConfig& c, std::optional<int64_t> f) {
                       return step_undo(c, oracle, f, ctx);
                     });
}

VariantRun<RedoConfig> run_redo(const Program& p, const InputOracle& oracle,
                                const FailureSchedule& schedule, int64_t fuel, int retry_cap) {
  CodeContext ctx = label_context(p);
  return run_variant(initial_redo_config(p), schedule, fuel, retry_cap,
                     [&](const RedoConfig& c, std::optional<int64_t> f) {
                       return step_redo(c, oracle, f, ctx);
                     });
}

}  // namespace imt
