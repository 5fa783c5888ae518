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

TaskConfig initial_task_config(const TaskProgram& p, int64_t tau) {
  TaskConfig cfg;
  cfg.tau = tau;
  for (const auto& t : p.tasks) cfg.task_map[t.id] = t;
  cfg.current = p.tasks.front().id;
  cfg.ts = initial_store(p.shared);
  cfg.tl_nv = initial_store(p.local_nv);
  cfg.tl_vol = initial_store(p.local_vol);
  cfg.cmd = p.tasks.front().body;
  return cfg;
}

Store task_effective_nv(const TaskConfig& cfg) {
  Store n = overwrite(cfg.ts, cfg.tp);
  for (const auto& [loc, v] : cfg.tl_nv.entries()) n.insert(loc, v);
  return n;
}

TaskStep step_task(const TaskConfig& cfg, const InputOracle& oracle,
                   std::optional<int64_t> fail_now, int64_t reset_value) {
  if (cfg.terminal()) throw EvalError("step on terminal configuration");
  TaskStep out;
  out.next = cfg;

  EvalEnv env;
  env.nv_chain = {&cfg.tp, &cfg.ts, &cfg.tl_nv};
  env.vol = &cfg.tl_vol;
  env.fault_on_read = &cfg.tl_vol_uninit;

  if (const auto* rb = reboot_head(*cfg.cmd)) {
    out.next.tp = Store{};
    out.next.cmd = cfg.current_task().body;
    out.next.tau = cfg.tau + rb->duration;
    out.obs.push_back(Obs::reboot());
    out.rule = "TSK-Reboot";
    return out;
  }

  if (fail_now) {
    out.next.tl_vol = reset_volatile(cfg.tl_vol, reset_value);
    out.next.tl_vol_uninit.clear();
    for (const auto& [loc, _] : cfg.tl_vol.entries()) out.next.tl_vol_uninit.insert(loc);
    out.next.cmd = make_single(Instr{RebootInstr{*fail_now}});
    out.next.tau = cfg.tau + 1;
    out.rule = "TSK-PowerFail";
    return out;
  }

  if (const auto* s = std::get_if<IfCmd>(&cfg.cmd->node)) {
    EvalResult g = eval_expr_env(env, *s->guard);
    if (!g.value.is_bool()) throw EvalError("non-boolean branch guard");
    out.next.cmd = g.value.truthy() ? s->then_cmd : s->else_cmd;
    out.next.tau = cfg.tau + 1;
    out.obs = std::move(g.reads);
    out.rule = g.value.truthy() ? "TSK-If-T" : "TSK-If-F";
    return out;
  }

  auto head = instr_head(*cfg.cmd);
  if (!head) throw EvalError("stuck configuration");
  const Instr& instr = *head->instr;

  if (const auto* t = std::get_if<ToTaskInstr>(&instr.node)) {
    auto it = cfg.task_map.find(t->task);
    if (it == cfg.task_map.end()) {
      throw EvalError("toTask target " + std::to_string(t->task) + " does not exist");
    }
    out.next.ts = overwrite(cfg.ts, cfg.tp);
    out.next.tp = Store{};
    out.next.current = t->task;
    out.next.cmd = it->second.body;
    out.next.tau = cfg.tau + 1;
    out.obs.push_back(Obs::checkpoint());  // transition, normalized
    out.rule = "TSK-Trans";
    return out;
  }

  out.next.cmd = head->cont;
  out.next.tau = cfg.tau + 1;

  auto route_write = [&](const Loc& loc, const Value& v) {
    const NameSet& omega = cfg.current_task().omega;
    if (cfg.ts.contains(loc)) {
      if (omega.count(loc.name)) {
        out.next.tp.insert(loc, v);
        out.rule = loc.is_cell() ? "TSK-Arr-S-Log" : "TSK-Update-S-Log";
      } else {
        out.next.ts.set(loc, v);
        out.rule = loc.is_cell() ? "TSK-Arr-S" : "TSK-Update-S";
      }
    } else if (cfg.tl_nv.contains(loc)) {
      out.next.tl_nv.set(loc, v);
      out.rule = loc.is_cell() ? "TSK-Arr-L" : "TSK-Update-L";
    } else if (cfg.tl_vol.contains(loc)) {
      out.next.tl_vol.set(loc, v);
      out.next.tl_vol_uninit.erase(loc);
      out.rule = loc.is_cell() ? "TSK-Arr-L" : "TSK-Update-L";
    } else {
      throw EvalError("write to unknown location " + loc.to_string());
    }
  };

  if (std::holds_alternative<SkipInstr>(instr.node)) {
    out.next.tau = cfg.tau;
    out.rule = "TSK-Skip";
    return out;
  }
  if (const auto* a = std::get_if<AssignInstr>(&instr.node)) {
    EvalResult r = eval_expr_env(env, *a->value);
    out.obs = std::move(r.reads);
    route_write(Loc{a->target, -1}, r.value);
    return out;
  }
  if (const auto* a = std::get_if<ArrAssignInstr>(&instr.node)) {
    EvalResult idx = eval_expr_env(env, *a->index);
    EvalResult val = eval_expr_env(env, *a->value);
    if (idx.value.is_bool()) throw EvalError("boolean array index");
    out.obs = std::move(idx.reads);
    out.obs.insert(out.obs.end(), val.reads.begin(), val.reads.end());
    route_write(Loc{a->array, static_cast<int32_t>(idx.value.num)}, val.value);
    return out;
  }
  if (const auto* a = std::get_if<InputInstr>(&instr.node)) {
    Value v = Value::make_input(cfg.tau, oracle(cfg.tau));
    out.obs.push_back(Obs::input(cfg.tau));
    route_write(Loc{a->target, -1}, v);
    return out;
  }
  throw EvalError("instruction not valid in the task model");
}

VariantRun<TaskConfig> run_task(const TaskProgram& p, const InputOracle& oracle,
                                const FailureSchedule& schedule, int64_t fuel, int retry_cap) {
  VariantRun<TaskConfig> run;
  TaskConfig cfg = initial_task_config(p);
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
    TaskStep s = step_task(cfg, oracle, fail_now);
    if (s.rule == "TSK-Reboot") {
      if (++reboots_since_commit > retry_cap) {
        run.status = RunStatus::RetryCapHit;
        cfg = std::move(s.next);
        ++run.steps;
        break;
      }
    } else if (s.rule == "TSK-Trans") {
      reboots_since_commit = 0;
    }
    run.obs.insert(run.obs.end(), s.obs.begin(), s.obs.end());
    cfg = std::move(s.next);
    ++run.steps;
  }
  run.final = std::move(cfg);
  return run;
}

// --- translation -----------------------------------------------------------

std::string task_label(int task_id) { return "L" + std::to_string(task_id); }

CommandPtr translate_command(const Command& c) {
  if (const auto* s = std::get_if<SingleCmd>(&c.node)) {
    if (const auto* t = std::get_if<ToTaskInstr>(&s->instr.node)) {
      return make_goto(task_label(t->task));
    }
    return make_single(s->instr);
  }
  if (const auto* s = std::get_if<SeqCmd>(&c.node)) {
    return make_seq(s->head, translate_command(*s->tail));
  }
  if (const auto* s = std::get_if<IfCmd>(&c.node)) {
    return make_if(s->guard, translate_command(*s->then_cmd), translate_command(*s->else_cmd));
  }
  return std::make_shared<const Command>(c);  // goto (not produced by task sources)
}

Program translate_tasks(const TaskProgram& p) {
  Program out;
  out.nonvolatile = p.shared;
  out.nonvolatile.insert(out.nonvolatile.end(), p.local_nv.begin(), p.local_nv.end());
  out.volatiles = p.local_vol;
  for (const auto& t : p.tasks) {
    CommandPtr body = cons_instr(Instr{CheckpointInstr{t.omega}}, translate_command(*t.body));
    out.labels.emplace_back(task_label(t.id), body);
  }
  out.body = make_goto(task_label(p.tasks.front().id));
  return out;
}

}  // namespace imt
