#include "imtlab/analysis.hpp"

#include <functional>
#include <map>
#include <stdexcept>

#include "imtlab/sem_continuous.hpp"

namespace imt {
namespace {

NameSet set_union(const NameSet& a, const NameSet& b) {
  NameSet out = a;
  out.insert(b.begin(), b.end());
  return out;
}

NameSet set_intersect(const NameSet& a, const NameSet& b) {
  NameSet out;
  for (const auto& x : a) {
    if (b.count(x)) out.insert(x);
  }
  return out;
}

NameSet set_minus(const NameSet& a, const NameSet& b) {
  NameSet out;
  for (const auto& x : a) {
    if (!b.count(x)) out.insert(x);
  }
  return out;
}

bool intersects(const NameSet& a, const NameSet& b) {
  for (const auto& x : a) {
    if (b.count(x)) return true;
  }
  return false;
}

// Accumulates one violation record per region: the first failing
// instruction and the union of missing locations.
class ViolationSink {
 public:
  ViolationSink(std::string judgment, std::vector<Violation>* out)
      : judgment_(std::move(judgment)), out_(out) {}

  void report(const std::string& region, const Instr& instr, const std::string& loc) {
    auto it = index_.find(region);
    if (it == index_.end()) {
      out_->push_back(Violation{judgment_, region, instr_to_string(instr), {loc}});
      index_[region] = out_->size() - 1;
    } else {
      (*out_)[it->second].missing.insert(loc);
    }
  }

 private:
  std::string judgment_;
  std::vector<Violation>* out_;
  std::map<std::string, size_t> index_;
};

bool starts_with_checkpoint(const Command& c) {
  if (const auto* s = std::get_if<SingleCmd>(&c.node)) {
    return std::holds_alternative<CheckpointInstr>(s->instr.node);
  }
  if (const auto* s = std::get_if<SeqCmd>(&c.node)) {
    return std::holds_alternative<CheckpointInstr>(s->head.node);
  }
  return false;
}

Program normalize_leading_checkpoint(const Program& p) {
  if (starts_with_checkpoint(*p.body) || std::holds_alternative<GotoCmd>(p.body->node)) {
    return p;
  }
  Program out = p;
  out.body = cons_instr(Instr{CheckpointInstr{}}, p.body);
  return out;
}

// --- WAR checking ----------------------------------------------------------

struct WarChecker {
  const DeclInfo& info;
  const NameSet& task_locals;
  ViolationSink& sink;
  int region_counter = 0;

  void command(const Command& c, NameSet n, NameSet w, NameSet r, const std::string& region) {
    if (const auto* s = std::get_if<SingleCmd>(&c.node)) {
      instr(s->instr, n, w, r, region);
      return;
    }
    if (const auto* s = std::get_if<SeqCmd>(&c.node)) {
      if (const auto* cp = std::get_if<CheckpointInstr>(&s->head.node)) {
        std::string next = "cp" + std::to_string(region_counter++);
        command(*s->tail, cp->omega, {}, {}, next);
        return;
      }
      instr(s->head, n, w, r, region);
      command(*s->tail, std::move(n), std::move(w), std::move(r), region);
      return;
    }
    if (const auto* s = std::get_if<IfCmd>(&c.node)) {
      NameSet r2 = set_union(r, rd(*s->guard));
      command(*s->then_cmd, n, w, r2, region);
      command(*s->else_cmd, std::move(n), std::move(w), std::move(r2), region);
      return;
    }
    // goto: the target block is checked as its own region
  }

  void instr(const Instr& i, NameSet& n, NameSet& w, NameSet& r, const std::string& region) {
    if (const auto* cp = std::get_if<CheckpointInstr>(&i.node)) {
      n = cp->omega;
      w.clear();
      r.clear();
      region_counter++;
      return;
    }
    if (const auto* a = std::get_if<AssignInstr>(&i.node)) {
      scalar_write(i, a->target, rd(*a->value), n, w, r, region);
      return;
    }
    if (const auto* a = std::get_if<ArrAssignInstr>(&i.node)) {
      NameSet reads = set_union(rd(*a->index), rd(*a->value));
      r = set_union(r, reads);
      if (task_locals.count(a->array)) {
        if (r.count(a->array)) sink.report(region, i, a->array);
        w.insert(a->array);
        return;
      }
      if (!info.is_nonvolatile(a->array)) return;
      if (r.count(a->array) && !n.count(a->array)) sink.report(region, i, a->array);
      w.insert(a->array);
      return;
    }
    if (const auto* a = std::get_if<InputInstr>(&i.node)) {
      scalar_write(i, a->target, {}, n, w, r, region);
      return;
    }
  }

  void scalar_write(const Instr& i, const std::string& x, const NameSet& reads, NameSet& n,
                    NameSet& w, NameSet& r, const std::string& region) {
    r = set_union(r, reads);
    if (task_locals.count(x)) {
      // task-local locations (volatile or not) must be written before read
      if (r.count(x) && !w.count(x)) sink.report(region, i, x);
      w.insert(x);
      return;
    }
    if (!info.is_nonvolatile(x)) return;
    if (!r.count(x)) {
      w.insert(x);
      return;
    }
    if (w.count(x)) return;  // write-dominated
    if (n.count(x)) {
      w.insert(x);
      return;
    }
    sink.report(region, i, x);
    w.insert(x);
  }
};

// --- RIO checking ----------------------------------------------------------

struct RioChecker {
  const DeclInfo& info;
  ViolationSink& sink;
  int region_counter = 0;

  void command(const Command& c, NameSet n, NameSet i_set, NameSet m,
               const std::string& region) {
    if (const auto* s = std::get_if<SingleCmd>(&c.node)) {
      instr(s->instr, n, i_set, m, region);
      return;
    }
    if (const auto* s = std::get_if<SeqCmd>(&c.node)) {
      if (const auto* cp = std::get_if<CheckpointInstr>(&s->head.node)) {
        std::string next = "cp" + std::to_string(region_counter++);
        command(*s->tail, cp->omega, {}, {}, next);
        return;
      }
      instr(s->head, n, i_set, m, region);
      command(*s->tail, std::move(n), std::move(i_set), std::move(m), region);
      return;
    }
    if (const auto* s = std::get_if<IfCmd>(&c.node)) {
      if (intersects(i_set, rd(*s->guard))) {
        NameSet m2 = must_write(c, m, info);
        tainted_command(*s->then_cmd, n, m2, region);
        tainted_command(*s->else_cmd, n, m2, region);
      } else {
        command(*s->then_cmd, n, i_set, m, region);
        command(*s->else_cmd, std::move(n), std::move(i_set), std::move(m), region);
      }
      return;
    }
  }

  void instr(const Instr& i, NameSet& n, NameSet& i_set, NameSet& m,
             const std::string& region) {
    if (const auto* cp = std::get_if<CheckpointInstr>(&i.node)) {
      n = cp->omega;
      i_set.clear();
      m.clear();
      region_counter++;
      return;
    }
    if (const auto* a = std::get_if<InputInstr>(&i.node)) {
      i_set.insert(a->target);
      if (info.is_nonvolatile(a->target)) m.insert(a->target);
      return;
    }
    if (const auto* a = std::get_if<AssignInstr>(&i.node)) {
      if (intersects(i_set, rd(*a->value))) {
        i_set.insert(a->target);
      } else {
        i_set.erase(a->target);
      }
      if (info.is_nonvolatile(a->target)) m.insert(a->target);
      return;
    }
    if (const auto* a = std::get_if<ArrAssignInstr>(&i.node)) {
      bool idx_dep = intersects(i_set, rd(*a->index));
      bool val_dep = intersects(i_set, rd(*a->value));
      if (idx_dep) {
        // a tainted index may write a different cell on each re-execution
        if (info.is_nonvolatile(a->array) && !n.count(a->array)) {
          sink.report(region, i, a->array);
        }
        i_set.insert(a->array);
      }
      if (val_dep) i_set.insert(a->array);
      return;
    }
  }

  void tainted_command(const Command& c, const NameSet& n, const NameSet& m,
                       const std::string& region) {
    if (const auto* s = std::get_if<SingleCmd>(&c.node)) {
      tainted_instr(s->instr, n, m, region);
      return;
    }
    if (const auto* s = std::get_if<SeqCmd>(&c.node)) {
      if (const auto* cp = std::get_if<CheckpointInstr>(&s->head.node)) {
        // after a checkpoint the pending inputs can never re-execute
        std::string next = "cp" + std::to_string(region_counter++);
        command(*s->tail, cp->omega, {}, {}, next);
        return;
      }
      tainted_instr(s->head, n, m, region);
      tainted_command(*s->tail, n, m, region);
      return;
    }
    if (const auto* s = std::get_if<IfCmd>(&c.node)) {
      tainted_command(*s->then_cmd, n, m, region);
      tainted_command(*s->else_cmd, n, m, region);
      return;
    }
  }

  void tainted_instr(const Instr& i, const NameSet& n, const NameSet& m,
                     const std::string& region) {
    if (const auto* a = std::get_if<AssignInstr>(&i.node)) {
      if (info.is_nonvolatile(a->target) && !m.count(a->target) && !n.count(a->target)) {
        sink.report(region, i, a->target);
      }
      return;
    }
    if (const auto* a = std::get_if<InputInstr>(&i.node)) {
      if (info.is_nonvolatile(a->target) && !m.count(a->target) && !n.count(a->target)) {
        sink.report(region, i, a->target);
      }
      return;
    }
    if (const auto* a = std::get_if<ArrAssignInstr>(&i.node)) {
      if (info.is_nonvolatile(a->array) && !n.count(a->array)) {
        sink.report(region, i, a->array);
      }
      return;
    }
    if (std::holds_alternative<CheckpointInstr>(i.node)) {
      throw std::logic_error("checkpoint reached tainted_instr");
    }
  }
};

}  // namespace

NameSet must_write(const Command& c, const NameSet& m0, const DeclInfo& info) {
  if (const auto* s = std::get_if<IfCmd>(&c.node)) {
    return set_intersect(must_write(*s->then_cmd, m0, info), must_write(*s->else_cmd, m0, info));
  }
  const Instr* head = nullptr;
  const Command* tail = nullptr;
  if (const auto* s = std::get_if<SingleCmd>(&c.node)) {
    head = &s->instr;
  } else if (const auto* s = std::get_if<SeqCmd>(&c.node)) {
    head = &s->head;
    tail = s->tail.get();
  } else {
    return m0;  // goto truncates like a checkpoint
  }
  if (std::holds_alternative<CheckpointInstr>(head->node)) return m0;
  NameSet m = m0;
  if (const auto* a = std::get_if<AssignInstr>(&head->node)) {
    if (info.is_nonvolatile(a->target)) m.insert(a->target);
  } else if (const auto* a = std::get_if<InputInstr>(&head->node)) {
    if (info.is_nonvolatile(a->target)) m.insert(a->target);
  } else if (std::holds_alternative<ToTaskInstr>(head->node)) {
    return m0;
  }
  return tail ? must_write(*tail, m, info) : m;
}

CheckResult check_war_command(const Command& c, const NameSet& omega, const DeclInfo& info,
                              const NameSet& task_locals, const std::string& region) {
  CheckResult res;
  ViolationSink sink("WAR", &res.violations);
  WarChecker checker{info, task_locals, sink};
  checker.command(c, omega, {}, {}, region);
  return res;
}

CheckResult check_war(const Program& p) {
  CheckResult res;
  ViolationSink sink("WAR", &res.violations);
  DeclInfo info = decl_info(p);
  NameSet no_locals;
  WarChecker checker{info, no_locals, sink};
  checker.command(*p.body, {}, {}, {}, "main");
  for (const auto& [label, cmd] : p.labels) checker.command(*cmd, {}, {}, {}, label);
  return res;
}

CheckResult check_war(const TaskProgram& p) {
  CheckResult res;
  ViolationSink sink("WAR", &res.violations);
  DeclInfo info = decl_info(p);
  NameSet locals;
  for (const auto& d : p.local_nv) locals.insert(d.name);
  for (const auto& d : p.local_vol) locals.insert(d.name);
  WarChecker checker{info, locals, sink};
  for (const auto& t : p.tasks) {
    checker.command(*t.body, t.omega, {}, {}, "task" + std::to_string(t.id));
  }
  return res;
}

CheckResult check_rio_command(const Command& c, const NameSet& omega, const DeclInfo& info,
                              const std::string& region) {
  CheckResult res;
  ViolationSink sink("RIO", &res.violations);
  RioChecker checker{info, sink};
  checker.command(c, omega, {}, {}, region);
  return res;
}

CheckResult check_rio(const Program& p) {
  CheckResult res;
  ViolationSink sink("RIO", &res.violations);
  DeclInfo info = decl_info(p);
  RioChecker checker{info, sink};
  checker.command(*p.body, {}, {}, {}, "main");
  for (const auto& [label, cmd] : p.labels) checker.command(*cmd, {}, {}, {}, label);
  return res;
}

CheckResult check_rio(const TaskProgram& p) {
  CheckResult res;
  ViolationSink sink("RIO", &res.violations);
  DeclInfo info = decl_info(p);
  RioChecker checker{info, sink};
  for (const auto& t : p.tasks) {
    checker.command(*t.body, t.omega, {}, {}, "task" + std::to_string(t.id));
  }
  return res;
}

// --- DINO WAR collection ----------------------------------------------------

namespace {

struct DinoCollector {
  const DeclInfo& info;

  struct Result {
    CommandPtr cmd;
    NameSet n;
  };

  void instr(const Instr& i, NameSet& n, NameSet& w, NameSet& r) {
    if (const auto* a = std::get_if<AssignInstr>(&i.node)) {
      scalar(a->target, rd(*a->value), n, w, r);
      return;
    }
    if (const auto* a = std::get_if<ArrAssignInstr>(&i.node)) {
      r = set_union(r, set_union(rd(*a->index), rd(*a->value)));
      if (!info.is_nonvolatile(a->array)) return;
      if (r.count(a->array)) n.insert(a->array);
      w.insert(a->array);
      return;
    }
    if (const auto* a = std::get_if<InputInstr>(&i.node)) {
      scalar(a->target, {}, n, w, r);
      return;
    }
  }

  void scalar(const std::string& x, const NameSet& reads, NameSet& n, NameSet& w, NameSet& r) {
    r = set_union(r, reads);
    if (!info.is_nonvolatile(x)) return;
    if (r.count(x) && !w.count(x)) n.insert(x);
    w.insert(x);
  }

  Result command(const Command& c, NameSet n, NameSet w, NameSet r) {
    if (const auto* s = std::get_if<SingleCmd>(&c.node)) {
      if (const auto* cp = std::get_if<CheckpointInstr>(&s->instr.node)) {
        return Result{make_single(Instr{CheckpointInstr{cp->omega}}), n};
      }
      NameSet n2 = n, w2 = w, r2 = r;
      instr(s->instr, n2, w2, r2);
      return Result{make_single(s->instr), n2};
    }
    if (const auto* s = std::get_if<SeqCmd>(&c.node)) {
      if (const auto* cp = std::get_if<CheckpointInstr>(&s->head.node)) {
        Result inner = command(*s->tail, {}, {}, {});
        CommandPtr rewritten =
            cons_instr(Instr{CheckpointInstr{set_union(cp->omega, inner.n)}}, inner.cmd);
        return Result{rewritten, n};
      }
      NameSet n2 = n, w2 = w, r2 = r;
      instr(s->head, n2, w2, r2);
      Result rest = command(*s->tail, std::move(n2), std::move(w2), std::move(r2));
      return Result{make_seq(s->head, rest.cmd), rest.n};
    }
    if (const auto* s = std::get_if<IfCmd>(&c.node)) {
      NameSet r2 = set_union(r, rd(*s->guard));
      Result t = command(*s->then_cmd, n, w, r2);
      Result f = command(*s->else_cmd, n, w, r2);
      return Result{make_if(s->guard, t.cmd, f.cmd), set_union(t.n, f.n)};
    }
    return Result{std::make_shared<const Command>(c), n};  // goto
  }
};

}  // namespace

Program collect_war_dino(const Program& p) {
  Program out = normalize_leading_checkpoint(p);
  DinoCollector collector{decl_info(p)};
  out.body = collector.command(*out.body, {}, {}, {}).cmd;
  for (auto& [label, cmd] : out.labels) {
    cmd = collector.command(*cmd, {}, {}, {}).cmd;
  }
  return out;
}

// --- EMW collection ---------------------------------------------------------

namespace {

struct EmwCollector {
  const DeclInfo& info;
  bool force_tainted_branches = false;

  struct UntaintedResult {
    CommandPtr cmd;
    NameSet x;
  };
  struct TaintedResult {
    CommandPtr cmd;
    NameSet x;
    NameSet m;
  };

  void instr(const Instr& i, NameSet& x, NameSet& m, NameSet& i_set) {
    if (const auto* a = std::get_if<InputInstr>(&i.node)) {
      if (info.is_nonvolatile(a->target)) m.insert(a->target);
      i_set.insert(a->target);
      return;
    }
    if (const auto* a = std::get_if<AssignInstr>(&i.node)) {
      if (intersects(i_set, rd(*a->value))) {
        i_set.insert(a->target);
      } else {
        i_set.erase(a->target);
      }
      if (info.is_nonvolatile(a->target)) m.insert(a->target);
      return;
    }
    if (const auto* a = std::get_if<ArrAssignInstr>(&i.node)) {
      if (intersects(i_set, rd(*a->index))) {
        if (info.is_nonvolatile(a->array)) x.insert(a->array);
        i_set.insert(a->array);
      }
      if (intersects(i_set, rd(*a->value))) i_set.insert(a->array);
      return;
    }
  }

  void tainted_instr(const Instr& i, NameSet& x, NameSet& m) {
    if (const auto* a = std::get_if<AssignInstr>(&i.node)) {
      if (info.is_nonvolatile(a->target)) m.insert(a->target);
      return;
    }
    if (const auto* a = std::get_if<InputInstr>(&i.node)) {
      if (info.is_nonvolatile(a->target)) m.insert(a->target);
      return;
    }
    if (const auto* a = std::get_if<ArrAssignInstr>(&i.node)) {
      if (info.is_nonvolatile(a->array)) x.insert(a->array);
      return;
    }
  }

  UntaintedResult command(const Command& c, NameSet x, NameSet m, NameSet i_set) {
    if (const auto* s = std::get_if<SingleCmd>(&c.node)) {
      if (const auto* cp = std::get_if<CheckpointInstr>(&s->instr.node)) {
        return UntaintedResult{make_single(Instr{CheckpointInstr{cp->omega}}), x};
      }
      instr(s->instr, x, m, i_set);
      return UntaintedResult{make_single(s->instr), x};
    }
    if (const auto* s = std::get_if<SeqCmd>(&c.node)) {
      if (const auto* cp = std::get_if<CheckpointInstr>(&s->head.node)) {
        UntaintedResult inner = command(*s->tail, {}, {}, {});
        CommandPtr rewritten =
            cons_instr(Instr{CheckpointInstr{set_union(cp->omega, inner.x)}}, inner.cmd);
        return UntaintedResult{rewritten, x};
      }
      instr(s->head, x, m, i_set);
      UntaintedResult rest = command(*s->tail, std::move(x), std::move(m), std::move(i_set));
      return UntaintedResult{make_seq(s->head, rest.cmd), rest.x};
    }
    if (const auto* s = std::get_if<IfCmd>(&c.node)) {
      if (force_tainted_branches || intersects(i_set, rd(*s->guard))) {
        TaintedResult t = tainted_command(*s->then_cmd, x, m);
        TaintedResult f = tainted_command(*s->else_cmd, x, m);
        NameSet may = set_union(set_union(t.x, f.x), set_union(t.m, f.m));
        NameSet both = set_intersect(t.m, f.m);
        return UntaintedResult{make_if(s->guard, t.cmd, f.cmd), set_minus(may, both)};
      }
      UntaintedResult t = command(*s->then_cmd, x, m, i_set);
      UntaintedResult f = command(*s->else_cmd, x, m, i_set);
      return UntaintedResult{make_if(s->guard, t.cmd, f.cmd), set_union(t.x, f.x)};
    }
    return UntaintedResult{std::make_shared<const Command>(c), x};  // goto
  }

  TaintedResult tainted_command(const Command& c, NameSet x, NameSet m) {
    if (const auto* s = std::get_if<SingleCmd>(&c.node)) {
      if (const auto* cp = std::get_if<CheckpointInstr>(&s->instr.node)) {
        return TaintedResult{make_single(Instr{CheckpointInstr{cp->omega}}), x, m};
      }
      tainted_instr(s->instr, x, m);
      return TaintedResult{make_single(s->instr), x, m};
    }
    if (const auto* s = std::get_if<SeqCmd>(&c.node)) {
      if (const auto* cp = std::get_if<CheckpointInstr>(&s->head.node)) {
        // re-enter the untainted judgment: once checkpointed, the inputs
        // seen so far can never re-execute
        UntaintedResult inner = command(*s->tail, {}, {}, {});
        CommandPtr rewritten =
            cons_instr(Instr{CheckpointInstr{set_union(cp->omega, inner.x)}}, inner.cmd);
        return TaintedResult{rewritten, x, m};
      }
      tainted_instr(s->head, x, m);
      TaintedResult rest = tainted_command(*s->tail, std::move(x), std::move(m));
      return TaintedResult{make_seq(s->head, rest.cmd), rest.x, rest.m};
    }
    if (const auto* s = std::get_if<IfCmd>(&c.node)) {
      TaintedResult t = tainted_command(*s->then_cmd, x, m);
      TaintedResult f = tainted_command(*s->else_cmd, x, m);
      NameSet may = set_union(set_union(t.x, f.x), set_union(t.m, f.m));
      NameSet both = set_intersect(t.m, f.m);
      return TaintedResult{make_if(s->guard, t.cmd, f.cmd), set_minus(may, both), both};
    }
    return TaintedResult{std::make_shared<const Command>(c), x, m};  // goto
  }
};

}  // namespace

Program collect_emw(const Program& p, bool taint_optimized) {
  Program out = normalize_leading_checkpoint(p);
  EmwCollector collector{decl_info(p), !taint_optimized};
  out.body = collector.command(*out.body, {}, {}, {}).cmd;
  for (auto& [label, cmd] : out.labels) {
    cmd = collector.command(*cmd, {}, {}, {}).cmd;
  }
  return out;
}

const char* policy_name(Policy p) {
  switch (p) {
    case Policy::WarOnly: return "war-only";
    case Policy::Emw: return "emw";
    case Policy::WarEmwTainted: return "war+emw-tainted";
  }
  return "?";
}

Policy parse_policy(const std::string& name) {
  if (name == "war-only") return Policy::WarOnly;
  if (name == "emw") return Policy::Emw;
  if (name == "war+emw-tainted") return Policy::WarEmwTainted;
  throw std::invalid_argument("unknown policy '" + name + "'");
}

Program instrument(const Program& p, Policy policy) {
  Program out = normalize_leading_checkpoint(p);
  switch (policy) {
    case Policy::WarOnly:
      return collect_war_dino(out);
    case Policy::Emw:
      return collect_emw(collect_war_dino(out), /*taint_optimized=*/false);
    case Policy::WarEmwTainted:
      return collect_emw(collect_war_dino(out), /*taint_optimized=*/true);
  }
  return out;
}

NameSet taint_step(const Instr& instr, const NameSet& taint_in) {
  NameSet i_set = taint_in;
  if (const auto* a = std::get_if<InputInstr>(&instr.node)) {
    i_set.insert(a->target);
  } else if (const auto* a = std::get_if<AssignInstr>(&instr.node)) {
    if (intersects(taint_in, rd(*a->value))) {
      i_set.insert(a->target);
    } else {
      i_set.erase(a->target);
    }
  } else if (const auto* a = std::get_if<ArrAssignInstr>(&instr.node)) {
    if (intersects(taint_in, rd(*a->index)) || intersects(taint_in, rd(*a->value))) {
      i_set.insert(a->array);
    }
  }
  return i_set;
}

// --- report ------------------------------------------------------------------

namespace {

// Checkpoints in traversal order, each with the command that follows it.
void enumerate_checkpoints(const Command& c,
                           std::vector<std::pair<NameSet, CommandPtr>>& out) {
  if (const auto* s = std::get_if<SingleCmd>(&c.node)) {
    if (const auto* cp = std::get_if<CheckpointInstr>(&s->instr.node)) {
      out.emplace_back(cp->omega, skip_command());
    }
    return;
  }
  if (const auto* s = std::get_if<SeqCmd>(&c.node)) {
    if (const auto* cp = std::get_if<CheckpointInstr>(&s->head.node)) {
      out.emplace_back(cp->omega, s->tail);
    }
    enumerate_checkpoints(*s->tail, out);
    return;
  }
  if (const auto* s = std::get_if<IfCmd>(&c.node)) {
    enumerate_checkpoints(*s->then_cmd, out);
    enumerate_checkpoints(*s->else_cmd, out);
  }
}

std::vector<std::pair<NameSet, CommandPtr>> program_checkpoints(const Program& p) {
  std::vector<std::pair<NameSet, CommandPtr>> out;
  enumerate_checkpoints(*p.body, out);
  for (const auto& [_, cmd] : p.labels) enumerate_checkpoints(*cmd, out);
  return out;
}

Program strip_omegas(const Program& p) {
  struct Stripper {
    static CommandPtr strip(const Command& c) {
      if (const auto* s = std::get_if<SingleCmd>(&c.node)) {
        if (std::holds_alternative<CheckpointInstr>(s->instr.node)) {
          return make_single(Instr{CheckpointInstr{}});
        }
        return make_single(s->instr);
      }
      if (const auto* s = std::get_if<SeqCmd>(&c.node)) {
        Instr head = s->head;
        if (std::holds_alternative<CheckpointInstr>(head.node)) {
          head = Instr{CheckpointInstr{}};
        }
        return make_seq(head, strip(*s->tail));
      }
      if (const auto* s = std::get_if<IfCmd>(&c.node)) {
        return make_if(s->guard, strip(*s->then_cmd), strip(*s->else_cmd));
      }
      return std::make_shared<const Command>(c);
    }
  };
  Program out = p;
  out.body = Stripper::strip(*p.body);
  for (auto& [_, cmd] : out.labels) cmd = Stripper::strip(*cmd);
  return out;
}

}  // namespace

AnalysisReport analyze(const Program& p) {
  AnalysisReport report;
  Program normalized = normalize_leading_checkpoint(p);
  Program bare = strip_omegas(normalized);
  DeclInfo info = decl_info(p);

  auto war = program_checkpoints(collect_war_dino(bare));
  auto emw = program_checkpoints(collect_emw(bare, /*taint_optimized=*/false));
  auto emw_tainted = program_checkpoints(collect_emw(bare, /*taint_optimized=*/true));
  auto original = program_checkpoints(normalized);

  for (size_t i = 0; i < original.size(); ++i) {
    RegionReport r;
    r.region = "cp" + std::to_string(i);
    r.war = war[i].first;
    r.emw = emw[i].first;
    r.emw_tainted = emw_tainted[i].first;
    r.must_write_set = must_write(*original[i].second, {}, info);
    report.regions.push_back(std::move(r));
  }
  report.war_violations = check_war(normalized).violations;
  report.rio_violations = check_rio(normalized).violations;
  return report;
}

}  // namespace imt
