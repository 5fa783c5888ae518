#include "imtlab/sem_continuous.hpp"

namespace imt {
namespace {

int64_t as_number(const Value& v, const char* what) {
  if (v.is_bool()) throw EvalError(std::string("boolean operand in ") + what);
  return v.num;
}

Value apply_binop(BinOp op, const Value& a, const Value& b) {
  bool taint = a.tainted || b.tainted;
  auto num = [&](int64_t n) { return Value::make_int(n, taint); };
  auto boolean = [&](bool x) { return Value::make_bool(x, taint); };
  switch (op) {
    case BinOp::Add: return num(as_number(a, "+") + as_number(b, "+"));
    case BinOp::Sub: return num(as_number(a, "-") - as_number(b, "-"));
    case BinOp::Mul: return num(as_number(a, "*") * as_number(b, "*"));
    case BinOp::Lt: return boolean(as_number(a, "<") < as_number(b, "<"));
    case BinOp::Le: return boolean(as_number(a, "<=") <= as_number(b, "<="));
    case BinOp::Gt: return boolean(as_number(a, ">") > as_number(b, ">"));
    case BinOp::Ge: return boolean(as_number(a, ">=") >= as_number(b, ">="));
    case BinOp::Eq:
    case BinOp::Ne: {
      if (a.is_bool() != b.is_bool()) throw EvalError("comparison of bool and number");
      bool eq = a.is_bool() ? (a.num == b.num) : (a.num == b.num);
      return boolean(op == BinOp::Eq ? eq : !eq);
    }
    case BinOp::And:
    case BinOp::Or: {
      if (!a.is_bool() || !b.is_bool()) throw EvalError("numeric operand in logical op");
      bool x = op == BinOp::And ? (a.num && b.num) : (a.num || b.num);
      return boolean(x);
    }
  }
  throw EvalError("unknown binop");
}

}  // namespace

EvalResult eval_expr_env(const EvalEnv& env, const Expr& e) {
  auto find = [&env](const Loc& loc) -> const Value* {
    for (const Store* s : env.nv_chain) {
      if (s->contains(loc)) {
        if (env.fault_on_read && env.fault_on_read->count(loc)) {
          throw EvalError("read of uninitialized location " + loc.to_string());
        }
        return &s->at(loc);
      }
    }
    if (env.vol && env.vol->contains(loc)) {
      if (env.fault_on_read && env.fault_on_read->count(loc)) {
        throw EvalError("read of uninitialized location " + loc.to_string());
      }
      return &env.vol->at(loc);
    }
    return nullptr;
  };
  if (const auto* v = std::get_if<VarExpr>(&e.node)) {
    Loc loc{v->name, -1};
    const Value* val = find(loc);
    if (!val) throw EvalError("read of unknown location " + loc.to_string());
    return EvalResult{*val, {Obs::read(loc, *val)}};
  }
  if (const auto* c = std::get_if<ConstExpr>(&e.node)) {
    return EvalResult{c->value, {}};
  }
  if (const auto* b = std::get_if<BinExpr>(&e.node)) {
    EvalResult lhs = eval_expr_env(env, *b->lhs);
    EvalResult rhs = eval_expr_env(env, *b->rhs);
    ObsSeq reads = std::move(lhs.reads);
    reads.insert(reads.end(), rhs.reads.begin(), rhs.reads.end());
    return EvalResult{apply_binop(b->op, lhs.value, rhs.value), std::move(reads)};
  }
  const auto& ix = std::get<IndexExpr>(e.node);
  EvalResult idx = eval_expr_env(env, *ix.index);
  if (idx.value.is_bool()) throw EvalError("boolean array index");
  Loc loc{ix.array, static_cast<int32_t>(idx.value.num)};
  const Value* val = find(loc);
  if (!val) throw EvalError("index out of bounds: " + loc.to_string());
  ObsSeq reads = std::move(idx.reads);
  reads.push_back(Obs::read(loc, *val));
  return EvalResult{*val, std::move(reads)};
}

EvalResult eval_expr(const Store& nv, const Store& vol, const Expr& e) {
  EvalEnv env;
  env.nv_chain = {&nv};
  env.vol = &vol;
  return eval_expr_env(env, e);
}

ContConfig initial_cont_config(const Program& p, int64_t tau) {
  ContConfig cfg;
  cfg.tau = tau;
  cfg.nv = initial_store(p.nonvolatile);
  cfg.vol = initial_store(p.volatiles);
  cfg.cmd = p.body;
  return cfg;
}

namespace {

struct InstrEffect {
  Store nv;
  Store vol;
  ObsSeq obs;
  std::string rule;
  bool advances_tau = true;
  LocSet writes;
};

// Shared instruction bodies: assignments, input, skip. Checkpoint, reboot
// and toTask are model-specific and handled by each stepper.
InstrEffect exec_basic_instr(const Store& nv, const Store& vol, const Instr& instr,
                             int64_t tau, const InputOracle& oracle) {
  InstrEffect out{nv, vol, {}, "", true, {}};
  if (std::holds_alternative<SkipInstr>(instr.node)) {
    out.rule = "Skip";
    out.advances_tau = false;
    return out;
  }
  if (const auto* a = std::get_if<AssignInstr>(&instr.node)) {
    EvalResult r = eval_expr(nv, vol, *a->value);
    Loc loc{a->target, -1};
    if (nv.contains(loc)) {
      out.nv.set(loc, r.value);
      out.rule = "NV-Assign";
    } else if (vol.contains(loc)) {
      out.vol.set(loc, r.value);
      out.rule = "V-Assign";
    } else {
      throw EvalError("assignment to unknown location " + loc.to_string());
    }
    out.obs = std::move(r.reads);
    out.writes.insert(loc);
    return out;
  }
  if (const auto* a = std::get_if<ArrAssignInstr>(&instr.node)) {
    EvalResult idx = eval_expr(nv, vol, *a->index);
    EvalResult val = eval_expr(nv, vol, *a->value);
    if (idx.value.is_bool()) throw EvalError("boolean array index");
    Loc loc{a->array, static_cast<int32_t>(idx.value.num)};
    out.obs = std::move(idx.reads);
    out.obs.insert(out.obs.end(), val.reads.begin(), val.reads.end());
    if (nv.contains(loc)) {
      out.nv.set(loc, val.value);
    } else if (vol.contains(loc)) {
      out.vol.set(loc, val.value);
    } else {
      throw EvalError("index out of bounds: " + loc.to_string());
    }
    out.rule = "Assign-Arr";
    out.writes.insert(loc);
    return out;
  }
  if (const auto* a = std::get_if<InputInstr>(&instr.node)) {
    Loc loc{a->target, -1};
    Value v = Value::make_input(tau, oracle(tau));
    if (nv.contains(loc)) {
      out.nv.set(loc, v);
      out.rule = "NV-Assign-In";
    } else if (vol.contains(loc)) {
      out.vol.set(loc, v);
      out.rule = "V-Assign-In";
    } else {
      throw EvalError("input into unknown location " + loc.to_string());
    }
    out.obs.push_back(Obs::input(tau));
    out.writes.insert(loc);
    return out;
  }
  throw EvalError("instruction not handled by shared bodies");
}

}  // namespace

ContStep step_cont(const ContConfig& cfg, const InputOracle& oracle, const CodeContext& ctx) {
  if (cfg.terminal()) throw EvalError("step on terminal configuration");
  ContStep out;
  out.next = cfg;

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
    out.rule = g.value.truthy() ? "If-T" : "If-F";
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

  if (const auto* cp = std::get_if<CheckpointInstr>(&instr->node)) {
    (void)cp;  // continuous checkpoint is a no-op apart from the observation
    out.next.cmd = cont;
    out.next.tau = cfg.tau + 1;
    out.obs.push_back(Obs::checkpoint());
    out.rule = "CheckPoint";
    return out;
  }
  if (std::holds_alternative<RebootInstr>(instr->node) ||
      std::holds_alternative<ToTaskInstr>(instr->node)) {
    throw EvalError("instruction not valid under continuous semantics");
  }

  InstrEffect eff = exec_basic_instr(cfg.nv, cfg.vol, *instr, cfg.tau, oracle);
  out.next.nv = std::move(eff.nv);
  out.next.vol = std::move(eff.vol);
  out.next.cmd = cont;
  out.next.tau = cfg.tau + (eff.advances_tau ? 1 : 0);
  out.obs = std::move(eff.obs);
  out.rule = eff.rule;
  out.writes = std::move(eff.writes);
  return out;
}

ContConfig sleep(const ContConfig& cfg, int64_t tau_target) {
  if (tau_target <= cfg.tau) throw EvalError("sleep target must be later than current time");
  ContConfig out = cfg;
  out.tau = tau_target;
  return out;
}

ContRun run_cont(const ContConfig& start, const InputOracle& oracle, int64_t fuel,
                 const CodeContext& ctx) {
  ContRun run;
  ContConfig cfg = start;
  while (!cfg.terminal()) {
    if (run.steps >= fuel) throw EvalError("fuel exhausted in continuous run");
    ContStep s = step_cont(cfg, oracle, ctx);
    run.obs.insert(run.obs.end(), s.obs.begin(), s.obs.end());
    cfg = std::move(s.next);
    ++run.steps;
  }
  run.final = std::move(cfg);
  return run;
}

ContRun run_cont(const Program& p, const InputOracle& oracle, int64_t fuel) {
  CodeContext ctx;
  for (const auto& [label, cmd] : p.labels) ctx[label] = cmd;
  return run_cont(initial_cont_config(p), oracle, fuel, ctx);
}

// Note: exec_basic_instr is reused by the intermittent steppers through this
// internal hook.
namespace detail {
InstrEffectHandle exec_shared_instr(const Store& nv, const Store& vol, const Instr& instr,
                                    int64_t tau, const InputOracle& oracle) {
  InstrEffect e = exec_basic_instr(nv, vol, instr, tau, oracle);
  return InstrEffectHandle{std::move(e.nv), std::move(e.vol), std::move(e.obs), e.rule,
                           e.advances_tau, std::move(e.writes)};
}
}  // namespace detail

}  // namespace imt
