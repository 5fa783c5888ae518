#include "imtlab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "imtlab/parse.hpp"

namespace imt {

using nlohmann::json;

// --- program generation --------------------------------------------------------

namespace {

const char* kScalarPool[] = {"a", "b", "i", "u", "w", "x", "y", "z"};
const char* kArrayPool[] = {"p", "q"};

struct Generator {
  const GenConfig& cfg;
  Rng rng;
  DeclInfo info;
  std::vector<std::string> scalars;
  std::vector<std::string> arrays;
  int inputs_left;
  int instrs_emitted = 0;

  explicit Generator(const GenConfig& cfg)
      : cfg(cfg), rng(cfg.seed), inputs_left(cfg.input_ops) {}

  Program generate() {
    Program p;
    int scalar_count = std::min<int>(cfg.var_count, 8);
    for (int i = 0; i < scalar_count; ++i) {
      Decl d;
      d.name = kScalarPool[i];
      d.init = {rng.range(0, 4)};
      scalars.push_back(d.name);
      if (rng.chance(0.3)) {
        p.volatiles.push_back(d);
      } else {
        p.nonvolatile.push_back(d);
      }
    }
    if (p.nonvolatile.empty()) {
      p.nonvolatile.push_back(p.volatiles.back());
      p.volatiles.pop_back();
    }
    int array_count = std::min<int>(cfg.array_count, 2);
    for (int i = 0; i < array_count; ++i) {
      Decl d;
      d.name = kArrayPool[i];
      d.is_array = true;
      int64_t len = rng.range(cfg.array_len_min, cfg.array_len_max);
      for (int64_t k = 0; k < len; ++k) d.init.push_back(rng.range(0, 4));
      arrays.push_back(d.name);
      p.nonvolatile.push_back(d);
    }
    info = decl_info(p);

    NameSet tainted;
    CommandPtr body = gen_command(cfg.max_depth, tainted);
    if (inputs_left == cfg.input_ops && cfg.input_ops > 0) {
      // guarantee at least one input operation
      body = cons_instr(gen_input(tainted), body);
      --inputs_left;
    }
    if (cfg.checkpoint_density > 0 && rng.chance(0.85)) {
      body = cons_instr(Instr{CheckpointInstr{}}, body);
    }
    p.body = body;
    return p;
  }

  Instr gen_input(NameSet& tainted) {
    const std::string& target = scalars[rng.below(scalars.size())];
    tainted.insert(target);
    return Instr{InputInstr{target}};
  }

  ExprPtr gen_leaf(const NameSet& tainted, bool prefer_tainted) {
    if (prefer_tainted && !tainted.empty() && rng.chance(0.7)) {
      auto it = tainted.begin();
      std::advance(it, static_cast<long>(rng.below(tainted.size())));
      if (info.is_array(*it)) return make_index(*it, gen_index_expr(*it, tainted));
      return make_var(*it);
    }
    switch (rng.below(3)) {
      case 0:
        return make_const(Value::make_int(rng.range(0, 4)));
      case 1:
        return make_var(scalars[rng.below(scalars.size())]);
      default:
        if (!arrays.empty()) {
          const std::string& a = arrays[rng.below(arrays.size())];
          return make_index(a, gen_index_expr(a, tainted));
        }
        return make_var(scalars[rng.below(scalars.size())]);
    }
  }

  // Array indices are kept provably in bounds: either a constant or a
  // taint-carrying expression of the form (v - v) + k whose magnitude is
  // constant. The latter exercises the tainted-index analysis rules without
  // risking runtime faults.
  ExprPtr gen_index_expr(const std::string& array, const NameSet& tainted) {
    int64_t len = info.array_length(array);
    int64_t k = rng.range(0, len - 1);
    if (!tainted.empty() && rng.chance(0.15)) {
      auto it = tainted.begin();
      std::advance(it, static_cast<long>(rng.below(tainted.size())));
      if (!info.is_array(*it)) {
        ExprPtr v = make_var(*it);
        return make_bin(BinOp::Add, make_bin(BinOp::Sub, v, v),
                        make_const(Value::make_int(k)));
      }
    }
    return make_const(Value::make_int(k));
  }

  ExprPtr gen_arith(int depth, const NameSet& tainted, bool prefer_tainted) {
    if (depth <= 0 || rng.chance(0.45)) return gen_leaf(tainted, prefer_tainted);
    BinOp ops[] = {BinOp::Add, BinOp::Sub, BinOp::Mul};
    BinOp op = ops[rng.below(3)];
    return make_bin(op, gen_arith(depth - 1, tainted, prefer_tainted),
                    gen_arith(depth - 1, tainted, false));
  }

  ExprPtr gen_guard(const NameSet& tainted) {
    BinOp ops[] = {BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge, BinOp::Eq, BinOp::Ne};
    BinOp op = ops[rng.below(6)];
    return make_bin(op, gen_arith(1, tainted, /*prefer_tainted=*/true),
                    gen_arith(0, tainted, false));
  }

  Instr gen_instr(NameSet& tainted) {
    if (inputs_left > 0 && rng.chance(0.3)) {
      --inputs_left;
      return gen_input(tainted);
    }
    if (!arrays.empty() && rng.chance(0.2)) {
      const std::string& a = arrays[rng.below(arrays.size())];
      ExprPtr idx = gen_index_expr(a, tainted);
      ExprPtr val = gen_arith(2, tainted, rng.chance(0.4));
      NameSet reads = rd(*idx);
      NameSet val_reads = rd(*val);
      reads.insert(val_reads.begin(), val_reads.end());
      bool dep = false;
      for (const auto& n : reads) dep = dep || tainted.count(n);
      if (dep) tainted.insert(a);
      return Instr{ArrAssignInstr{a, idx, val}};
    }
    const std::string& target = scalars[rng.below(scalars.size())];
    ExprPtr val = gen_arith(2, tainted, rng.chance(0.5));
    bool dep = false;
    for (const auto& n : rd(*val)) dep = dep || tainted.count(n);
    if (dep) {
      tainted.insert(target);
    } else {
      tainted.erase(target);
    }
    return Instr{AssignInstr{target, val}};
  }

  CommandPtr gen_command(int depth, NameSet tainted) {
    int seg = static_cast<int>(rng.range(1, 4));
    std::vector<Instr> prefix;
    for (int i = 0; i < seg; ++i) {
      if (rng.chance(cfg.checkpoint_density)) {
        prefix.push_back(Instr{CheckpointInstr{}});
      }
      prefix.push_back(gen_instr(tainted));
    }
    CommandPtr tail;
    if (depth > 0 && rng.chance(0.65)) {
      ExprPtr guard = gen_guard(tainted);
      tail = make_if(guard, gen_command(depth - 1, tainted), gen_command(depth - 1, tainted));
    } else {
      tail = skip_command();
    }
    for (auto it = prefix.rbegin(); it != prefix.rend(); ++it) {
      tail = cons_instr(*it, tail);
    }
    return tail;
  }
};

}  // namespace

Program gen_program(const GenConfig& cfg) {
  Generator gen(cfg);
  Program p = gen.generate();
  auto diags = validate(p);
  if (!diags.empty()) throw ValidationError(std::move(diags));
  return p;
}

namespace {

// Collect a task body's checkpoint set by wrapping it into a one-region
// program and running the WAR + EMW collectors over it.
NameSet collect_task_omega(const TaskProgram& p, const CommandPtr& body) {
  Program probe;
  probe.nonvolatile = p.shared;
  probe.nonvolatile.insert(probe.nonvolatile.end(), p.local_nv.begin(), p.local_nv.end());
  probe.volatiles = p.local_vol;
  probe.body = cons_instr(Instr{CheckpointInstr{}}, body);
  Program collected = collect_emw(collect_war_dino(probe), /*taint_optimized=*/true);
  const auto* seq = std::get_if<SeqCmd>(&collected.body->node);
  if (seq == nullptr) {
    const auto* single = std::get_if<SingleCmd>(&collected.body->node);
    return std::get<CheckpointInstr>(single->instr.node).omega;
  }
  NameSet omega = std::get<CheckpointInstr>(seq->head.node).omega;
  // task-locals are never part of a task's checkpoint set
  NameSet shared_only;
  for (const auto& d : p.shared) {
    if (omega.count(d.name)) shared_only.insert(d.name);
  }
  return shared_only;
}

}  // namespace

TaskProgram gen_task_program(const GenConfig& cfg) {
  Rng rng(splitmix64(cfg.seed ^ 0x7a5cull));
  TaskProgram p;
  int shared_count = static_cast<int>(rng.range(3, 5));
  std::vector<std::string> shared;
  for (int i = 0; i < shared_count; ++i) {
    Decl d;
    d.name = kScalarPool[i];
    d.init = {rng.range(0, 4)};
    shared.push_back(d.name);
    p.shared.push_back(d);
  }
  std::vector<std::string> locals = {"l0"};
  p.local_vol.push_back(Decl{"l0", false, {0}});
  if (rng.chance(0.5)) {
    locals.push_back("l1");
    p.local_vol.push_back(Decl{"l1", false, {0}});
  }

  DeclInfo info = decl_info(p);
  int inputs_left = cfg.input_ops;
  int task_count = static_cast<int>(rng.range(2, 4));

  auto leaf = [&](bool allow_local) -> ExprPtr {
    uint64_t pick = rng.below(allow_local ? 3u : 2u);
    if (pick == 0) return make_const(Value::make_int(rng.range(0, 4)));
    if (pick == 1) return make_var(shared[rng.below(shared.size())]);
    return make_var(locals[rng.below(locals.size())]);
  };
  auto arith = [&](bool allow_local) {
    if (rng.chance(0.5)) return leaf(allow_local);
    BinOp ops[] = {BinOp::Add, BinOp::Sub, BinOp::Mul};
    return make_bin(ops[rng.below(3)], leaf(allow_local), leaf(allow_local));
  };

  for (int id = 0; id < task_count; ++id) {
    std::vector<Instr> instrs;
    // task-locals are initialized by a write before any possible read
    for (const auto& l : locals) {
      instrs.push_back(Instr{AssignInstr{l, arith(false)}});
    }
    int body_len = static_cast<int>(rng.range(2, 5));
    for (int k = 0; k < body_len; ++k) {
      if (inputs_left > 0 && rng.chance(0.35)) {
        --inputs_left;
        instrs.push_back(Instr{InputInstr{shared[rng.below(shared.size())]}});
      } else {
        const std::string& target =
            rng.chance(0.75) ? shared[rng.below(shared.size())] : locals[rng.below(locals.size())];
        instrs.push_back(Instr{AssignInstr{target, arith(true)}});
      }
    }
    CommandPtr tail = (id + 1 < task_count) ? make_single(Instr{ToTaskInstr{id + 1}})
                                            : skip_command();
    if (rng.chance(0.5)) {
      // small input- or data-dependent tail branch before the transition
      BinOp cmp[] = {BinOp::Lt, BinOp::Gt, BinOp::Eq};
      ExprPtr guard = make_bin(cmp[rng.below(3)], make_var(shared[rng.below(shared.size())]),
                               make_const(Value::make_int(rng.range(0, 3))));
      std::vector<Instr> arm1{Instr{AssignInstr{shared[rng.below(shared.size())], arith(true)}}};
      std::vector<Instr> arm2{Instr{AssignInstr{shared[rng.below(shared.size())], arith(true)}}};
      CommandPtr then_cmd = cons_instr(arm1[0], tail);
      CommandPtr else_cmd = cons_instr(arm2[0], tail);
      tail = make_if(guard, then_cmd, else_cmd);
    }
    for (auto it = instrs.rbegin(); it != instrs.rend(); ++it) {
      tail = cons_instr(*it, tail);
    }
    p.tasks.push_back(TaskDef{id, {}, tail});
  }
  for (auto& t : p.tasks) t.omega = collect_task_omega(p, t.body);

  auto diags = validate(p);
  if (!diags.empty()) throw ValidationError(std::move(diags));
  (void)info;
  return p;
}

InputOracle gen_oracle(uint64_t seed, std::vector<int64_t> domain) {
  InputOracle oracle;
  oracle.seed = seed;
  oracle.domain = std::move(domain);
  return oracle;
}

FailureSchedule gen_schedule(int64_t step_bound, uint64_t seed, double failure_rate,
                             const std::vector<int64_t>& checkpoint_steps) {
  FailureSchedule out;
  if (failure_rate <= 0.0) return out;
  Rng rng(seed);
  std::vector<int64_t> steps;
  if (rng.chance(0.15 * failure_rate + 0.05)) steps.push_back(0);
  for (int64_t cs : checkpoint_steps) {
    if (rng.chance(0.3 * failure_rate)) steps.push_back(cs + 1);
  }
  for (int64_t s = 1; s <= step_bound; ++s) {
    if (rng.chance(failure_rate * 0.08)) steps.push_back(s);
  }
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  if (steps.size() > 24) steps.resize(24);
  for (int64_t s : steps) {
    FailureEvent ev;
    ev.at_step = s;
    ev.off_duration = rng.range(1, 5);
    ev.checkpoint_succeeds = rng.chance(0.7);
    out.events.push_back(ev);
  }
  return out;
}

// --- seeded corpus ---------------------------------------------------------------

const std::vector<CorpusEntry>& seeded_corpus() {
  static const std::vector<CorpusEntry> corpus = {
      {"fig2a-war",
       "nv { a = 1, w = 4, x = 0 }\n"
       "vol { }\n"
       "main {\n"
       "  checkpoint();\n"
       "  if (a > 0) {\n"
       "    x := w;\n"
       "    w := x + 1\n"
       "  } else {\n"
       "    skip\n"
       "  }\n"
       "}\n",
       false,
       {}},
      {"fig2b-rio",
       "nv { a = 0, b = 0, i = 0, w = 4, x = 0, y = 0, z = 3 }\n"
       "vol { u = 0 }\n"
       "main {\n"
       "  checkpoint();\n"
       "  if (a > 0) {\n"
       "    x := w;\n"
       "    w := x + 1\n"
       "  } else {\n"
       "    b := 1;\n"
       "    i := IN();\n"
       "    if (i > 1) {\n"
       "      y := i + 1;\n"
       "      x := 1;\n"
       "      u := 1\n"
       "    } else {\n"
       "      x := 1;\n"
       "      w := z;\n"
       "      z := 1\n"
       "    }\n"
       "  }\n"
       "}\n",
       false,
       {PinnedScenario{{{3, 2}, {11, 0}, {12, 0}}, {FailureEvent{6, 2, true}}}}},
      {"fig5-trace",
       "nv { i = 0, w = 4, x = 0, y = 0, z = 3 }\n"
       "vol { }\n"
       "main {\n"
       "  checkpoint(w, y, z);\n"
       "  i := IN();\n"
       "  if (i > 1) {\n"
       "    y := 1;\n"
       "    x := 1\n"
       "  } else {\n"
       "    w := z;\n"
       "    z := 1;\n"
       "    x := 1\n"
       "  }\n"
       "}\n",
       false,
       {PinnedScenario{{{1, 2}, {9, 0}}, {FailureEvent{4, 4, true}}}}},
      {"swap-redo",
       "nv { x = 0, y = 0, z = 0 }\n"
       "vol { a = 0 }\n"
       "main {\n"
       "  x := 1;\n"
       "  y := 2;\n"
       "  z := 3;\n"
       "  checkpoint(x, y);\n"
       "  a := x;\n"
       "  x := y;\n"
       "  y := a;\n"
       "  z := 1;\n"
       "  checkpoint(y, z);\n"
       "  z := y + 1\n"
       "}\n",
       false,
       {}},
      {"swap-tasks",
       "ts { x = 0, y = 0, z = 0 }\n"
       "tlv { a = 0 }\n"
       "task 0 () {\n"
       "  x := 1;\n"
       "  y := 2;\n"
       "  z := 3;\n"
       "  toTask(1)\n"
       "}\n"
       "task 1 (x, y) {\n"
       "  a := x;\n"
       "  x := y;\n"
       "  y := a;\n"
       "  z := 1;\n"
       "  toTask(2)\n"
       "}\n"
       "task 2 (y, z) {\n"
       "  z := y + 1\n"
       "}\n",
       true,
       {}},
  };
  return corpus;
}

// --- campaign --------------------------------------------------------------------

uint64_t program_hash(const Program& p) {
  std::string text = program_to_string(p);
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

DryRunInfo dry_run(const Program& p, const InputOracle& oracle, int64_t fuel) {
  DryRunInfo info;
  IntRun run = run_int(p, oracle, FailureSchedule{}, fuel);
  info.steps = run.steps;
  for (size_t i = 0; i < run.trace.steps.size(); ++i) {
    if (run.trace.steps[i].rule == "I/O-CP-CheckPoint") {
      info.checkpoint_steps.push_back(static_cast<int64_t>(i));
    }
  }
  return info;
}

CaseVerdict evaluate_case(const Program& raw, Policy policy, const InputOracle& oracle,
                          const FailureSchedule& schedule, int retry_cap, int64_t fuel) {
  CaseVerdict out;
  try {
    Program instrumented = instrument(raw, policy);
    IntRun run = run_int(instrumented, oracle, schedule, fuel, {}, retry_cap);
    if (run.status == RunStatus::RetryCapHit) {
      out.verdict = "retry-cap";
      return out;
    }
    if (run.status == RunStatus::FuelExhausted) {
      out.verdict = "fuel";
      return out;
    }
    CorrespondenceResult corr = check_correspondence(instrumented, run.trace, oracle, fuel);
    if (corr.report.holds) {
      out.verdict = "pass";
    } else {
      out.verdict = "fail";
      out.witness = corr.report.witness;
      out.witness_locs = corr.report.witness_locs;
    }
  } catch (const std::exception& e) {
    out.verdict = "error";
    out.witness = e.what();
  }
  return out;
}

namespace {

// Candidate reductions: drop one instruction or replace an if by an arm.
std::vector<CommandPtr> reductions(const CommandPtr& c) {
  std::vector<CommandPtr> out;
  if (const auto* s = std::get_if<SeqCmd>(&c->node)) {
    out.push_back(s->tail);  // drop head
    for (const auto& tail : reductions(s->tail)) {
      out.push_back(cons_instr(s->head, tail));
    }
  } else if (const auto* s = std::get_if<IfCmd>(&c->node)) {
    out.push_back(s->then_cmd);
    out.push_back(s->else_cmd);
    for (const auto& arm : reductions(s->then_cmd)) {
      out.push_back(make_if(s->guard, arm, s->else_cmd));
    }
    for (const auto& arm : reductions(s->else_cmd)) {
      out.push_back(make_if(s->guard, s->then_cmd, arm));
    }
  } else if (std::holds_alternative<SingleCmd>(c->node) && !is_terminal(*c)) {
    out.push_back(skip_command());
  }
  return out;
}

}  // namespace

Program shrink_failing_case(const Program& raw, Policy policy, const InputOracle& oracle,
                            const FailureSchedule& schedule, int retry_cap, int64_t fuel,
                            int budget) {
  Program best = raw;
  bool improved = true;
  while (improved && budget > 0) {
    improved = false;
    for (const auto& candidate_body : reductions(best.body)) {
      if (budget-- <= 0) break;
      Program candidate = best;
      candidate.body = candidate_body;
      if (!validate(candidate).empty()) continue;
      if (evaluate_case(candidate, policy, oracle, schedule, retry_cap, fuel).verdict ==
          "fail") {
        best = candidate;
        improved = true;
        break;
      }
    }
  }
  return best;
}

CampaignReport run_campaign(const CampaignOptions& opts) {
  CampaignReport report;

  auto run_one = [&](const std::string& name, const Program& raw, uint64_t case_index) {
    InputOracle oracle =
        gen_oracle(splitmix64(opts.oracle_seed ^ case_index), opts.gen.input_domain);
    DryRunInfo dry = dry_run(raw, oracle, opts.fuel);
    for (int j = 0; j < opts.schedules_per_case; ++j) {
      uint64_t sched_seed = splitmix64(opts.schedule_seed ^ (case_index * 131 + j));
      FailureSchedule schedule =
          gen_schedule(dry.steps, sched_seed, opts.failure_rate, dry.checkpoint_steps);
      auto t0 = std::chrono::steady_clock::now();
      CaseVerdict v = evaluate_case(raw, opts.policy, oracle, schedule, opts.retry_cap,
                                    opts.fuel);
      CaseResult r;
      r.name = name;
      r.program_hash = program_hash(raw);
      r.policy = policy_name(opts.policy);
      r.schedule_seed = sched_seed;
      r.oracle_seed = oracle.seed;
      r.verdict = v.verdict;
      r.witness = v.witness;
      r.witness_locs = v.witness_locs;
      if (v.verdict == "fail" && opts.shrink_failures) {
        Program shrunk = shrink_failing_case(raw, opts.policy, oracle, schedule,
                                             opts.retry_cap, opts.fuel);
        r.failing_program = program_to_string(shrunk);
      }
      auto t1 = std::chrono::steady_clock::now();
      r.millis = std::chrono::duration<double, std::milli>(t1 - t0).count();
      ++report.total;
      if (r.verdict == "pass") {
        ++report.passed;
      } else if (r.verdict == "retry-cap" || r.verdict == "fuel") {
        ++report.capped;
      } else {
        ++report.failed;
      }
      report.cases.push_back(std::move(r));
    }
  };

  auto run_pinned = [&](const std::string& name, const Program& raw,
                        const PinnedScenario& scenario, uint64_t case_index) {
    InputOracle oracle =
        gen_oracle(splitmix64(opts.oracle_seed ^ case_index), opts.gen.input_domain);
    oracle.overrides = scenario.oracle_overrides;
    FailureSchedule schedule;
    schedule.events = scenario.events;
    auto t0 = std::chrono::steady_clock::now();
    CaseVerdict v =
        evaluate_case(raw, opts.policy, oracle, schedule, opts.retry_cap, opts.fuel);
    CaseResult r;
    r.name = name;
    r.program_hash = program_hash(raw);
    r.policy = policy_name(opts.policy);
    r.schedule_seed = 0;
    r.oracle_seed = oracle.seed;
    r.verdict = v.verdict;
    r.witness = v.witness;
    r.witness_locs = v.witness_locs;
    r.pinned_oracle = oracle_to_json(oracle);
    r.pinned_schedule = schedule_to_json(schedule);
    if (v.verdict == "fail" && opts.shrink_failures) {
      Program shrunk = shrink_failing_case(raw, opts.policy, oracle, schedule,
                                           opts.retry_cap, opts.fuel);
      r.failing_program = program_to_string(shrunk);
    }
    auto t1 = std::chrono::steady_clock::now();
    r.millis = std::chrono::duration<double, std::milli>(t1 - t0).count();
    ++report.total;
    if (r.verdict == "pass") {
      ++report.passed;
    } else if (r.verdict == "retry-cap" || r.verdict == "fuel") {
      ++report.capped;
    } else {
      ++report.failed;
    }
    report.cases.push_back(std::move(r));
  };

  uint64_t case_index = 0;
  if (opts.include_seeded_corpus) {
    for (const auto& entry : seeded_corpus()) {
      if (entry.is_task_program) continue;
      Program raw = parse(entry.text);
      for (const auto& scenario : entry.scenarios) {
        run_pinned(entry.name, raw, scenario, case_index);
      }
      run_one(entry.name, raw, case_index++);
    }
  }
  for (int i = 0; i < opts.cases; ++i) {
    GenConfig gen = opts.gen;
    gen.seed = splitmix64(opts.gen.seed ^ (0xabcd0000ULL + i));
    Program p = gen_program(gen);
    run_one("seed:" + std::to_string(gen.seed), p, case_index++);
  }
  return report;
}

// --- persistence -------------------------------------------------------------------

namespace {

json obs_to_json(const Obs& o) {
  switch (o.kind) {
    case Obs::Kind::Read:
      return o.to_string();
    case Obs::Kind::Input:
      return o.to_string();
    case Obs::Kind::Reboot:
      return "reboot";
    case Obs::Kind::Checkpoint:
      return "checkpoint";
  }
  return nullptr;
}

json store_to_json(const Store& s) {
  json out = json::object();
  for (const auto& [loc, v] : s.entries()) out[loc.to_string()] = value_to_string(v);
  return out;
}

}  // namespace

std::string oracle_to_json(const InputOracle& oracle) {
  json j;
  j["seed"] = oracle.seed;
  j["domain"] = oracle.domain;
  json overrides = json::object();
  for (const auto& [tau, v] : oracle.overrides) overrides[std::to_string(tau)] = v;
  j["overrides"] = overrides;
  return j.dump();
}

InputOracle oracle_from_json(const std::string& text) {
  json j = json::parse(text);
  InputOracle oracle;
  oracle.seed = j.value("seed", 0ULL);
  if (j.contains("domain")) oracle.domain = j["domain"].get<std::vector<int64_t>>();
  if (j.contains("overrides")) {
    for (auto& [k, v] : j["overrides"].items()) {
      oracle.overrides[std::stoll(k)] = v.get<int64_t>();
    }
  }
  return oracle;
}

std::string schedule_to_json(const FailureSchedule& schedule) {
  json arr = json::array();
  for (const auto& ev : schedule.events) {
    json e;
    e["step"] = ev.at_step;
    e["n"] = ev.off_duration;
    e["cp_ok"] = ev.checkpoint_succeeds;
    arr.push_back(e);
  }
  return arr.dump();
}

FailureSchedule schedule_from_json(const std::string& text) {
  FailureSchedule out;
  json arr = json::parse(text);
  for (const auto& e : arr) {
    FailureEvent ev;
    ev.at_step = e.at("step").get<int64_t>();
    ev.off_duration = e.value("n", 1);
    ev.checkpoint_succeeds = e.value("cp_ok", true);
    out.events.push_back(ev);
  }
  return out;
}

void write_basic_trace(std::ostream& os, const Program& p, const InputOracle& oracle,
                       const FailureSchedule& schedule, const Trace& trace) {
  json header;
  header["type"] = "header";
  header["model"] = "basic";
  header["program"] = program_to_string(p);
  header["oracle"] = json::parse(oracle_to_json(oracle));
  header["schedule"] = json::parse(schedule_to_json(schedule));
  os << header.dump() << "\n";
  for (size_t i = 0; i < trace.steps.size(); ++i) {
    const TraceStep& s = trace.steps[i];
    json rec;
    rec["step"] = i;
    rec["model"] = "basic";
    rec["tau"] = s.config.tau;
    rec["rule"] = s.rule;
    json obs = json::array();
    for (const auto& o : s.obs) obs.push_back(obs_to_json(o));
    rec["obs"] = obs;
    rec["nv"] = store_to_json(s.config.nv);
    rec["v"] = store_to_json(s.config.vol);
    os << rec.dump() << "\n";
  }
}

TraceFile read_trace_file(std::istream& is) {
  TraceFile out;
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (!have_header) {
      json j = json::parse(line);
      if (j.value("type", "") != "header") {
        throw std::runtime_error("trace file must start with a header record");
      }
      out.program_text = j.at("program").get<std::string>();
      out.model = j.value("model", "basic");
      out.oracle = oracle_from_json(j.at("oracle").dump());
      out.schedule = schedule_from_json(j.at("schedule").dump());
      have_header = true;
    } else {
      out.step_lines.push_back(line);
    }
  }
  if (!have_header) throw std::runtime_error("empty trace file");
  return out;
}

std::string campaign_report_to_json(const CampaignReport& report) {
  json j;
  j["total"] = report.total;
  j["passed"] = report.passed;
  j["failed"] = report.failed;
  j["capped"] = report.capped;
  json cases = json::array();
  for (const auto& c : report.cases) {
    json e;
    e["name"] = c.name;
    e["program_hash"] = c.program_hash;
    e["policy"] = c.policy;
    e["schedule_seed"] = c.schedule_seed;
    e["oracle_seed"] = c.oracle_seed;
    e["verdict"] = c.verdict;
    if (!c.witness.empty()) e["witness"] = c.witness;
    if (!c.witness_locs.empty()) {
      e["witness_locs"] = std::vector<std::string>(c.witness_locs.begin(),
                                                   c.witness_locs.end());
    }
    if (!c.failing_program.empty()) e["failing_program"] = c.failing_program;
    if (!c.pinned_oracle.empty()) {
      e["pinned_oracle"] = nlohmann::json::parse(c.pinned_oracle);
      e["pinned_schedule"] = nlohmann::json::parse(c.pinned_schedule);
    }
    // wall-clock timings stay out of the report: identical invocations
    // must produce byte-identical outputs
    cases.push_back(e);
  }
  j["cases"] = cases;
  return j.dump(2);
}

}  // namespace imt
