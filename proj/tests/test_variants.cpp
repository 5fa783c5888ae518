#include <doctest.h>

#include "imtlab/analysis.hpp"
#include "imtlab/harness.hpp"
#include "imtlab/parse.hpp"

using namespace imt;

namespace {

Program swap_program() { return parse(seeded_corpus()[3].text); }
TaskProgram swap_tasks() { return parse_tasks(seeded_corpus()[4].text); }

FailureSchedule one_failure(int64_t step, int64_t duration, bool cp_ok = true) {
  FailureSchedule s;
  s.events.push_back(FailureEvent{step, duration, cp_ok});
  return s;
}

}  // namespace

TEST_CASE("undo logging records old values on first writes only") {
  Program p = parse(
      "nv { x = 10, y = 20 } vol {} main { checkpoint(x); x := 1; x := 2; y := 3 }");
  InputOracle oracle;
  UndoConfig cfg = initial_undo_config(p);
  cfg = step_undo(cfg, oracle, std::nullopt).next;  // checkpoint
  CHECK(cfg.ctx.omega == NameSet{"x"});

  UndoStep first = step_undo(cfg, oracle, std::nullopt);
  CHECK(first.rule == "UL-NV-Log");
  CHECK(value_equal(first.next.ctx.log.at(Loc{"x", -1}), Value::make_int(10)));
  CHECK(first.next.ctx.logged == LocSet{Loc{"x", -1}});

  UndoStep second = step_undo(first.next, oracle, std::nullopt);
  CHECK(second.rule == "UL-NV-Assign");  // already logged
  CHECK(value_equal(second.next.ctx.log.at(Loc{"x", -1}), Value::make_int(10)));

  UndoStep third = step_undo(second.next, oracle, std::nullopt);
  CHECK(third.rule == "UL-NV-Assign");  // y outside omega
  CHECK(!third.next.ctx.log.contains(Loc{"y", -1}));
}

TEST_CASE("undo logging is cell-granular for arrays") {
  Program p = parse(
      "nv { a[3] = {5, 6, 7} } vol {} main { checkpoint(a); a[2] := 9; a[0] := 1 }");
  InputOracle oracle;
  UndoConfig cfg = initial_undo_config(p);
  cfg = step_undo(cfg, oracle, std::nullopt).next;
  UndoStep s = step_undo(cfg, oracle, std::nullopt);
  CHECK(s.rule == "UL-Arr-Log");
  CHECK(s.next.ctx.log.size() == 1);
  CHECK(value_equal(s.next.ctx.log.at(Loc{"a", 2}), Value::make_int(7)));
}

TEST_CASE("undo reboot rolls the region back") {
  Program p = parse("nv { x = 10 } vol {} main { checkpoint(x); x := 1; x := x + 1 }");
  InputOracle oracle;
  auto run = run_undo(p, oracle, one_failure(2, 3), 1000);
  REQUIRE(run.status == RunStatus::Done);
  CHECK(value_equal(run.final.nv.at(Loc{"x", -1}), Value::make_int(2)));
}

TEST_CASE("redo logging diverts omega writes into the log") {
  Program p = swap_program();
  InputOracle oracle;
  RedoConfig cfg = initial_redo_config(p);
  // x:=1; y:=2; z:=3; checkpoint(x,y)
  for (int i = 0; i < 4; ++i) cfg = step_redo(cfg, oracle, std::nullopt).next;
  CHECK(cfg.ctx.omega == NameSet{"x", "y"});

  RedoStep a = step_redo(cfg, oracle, std::nullopt);  // a := x (volatile)
  CHECK(a.rule == "RL-V-Assign");
  RedoStep x = step_redo(a.next, oracle, std::nullopt);  // x := y
  CHECK(x.rule == "RL-NV-Log");
  CHECK(value_equal(x.next.ctx.log.at(Loc{"x", -1}), Value::make_int(2)));
  CHECK(value_equal(x.next.nv.at(Loc{"x", -1}), Value::make_int(1)));  // untouched

  RedoStep y = step_redo(x.next, oracle, std::nullopt);  // y := a
  CHECK(y.rule == "RL-NV-Log");
  RedoStep z = step_redo(y.next, oracle, std::nullopt);  // z := 1, outside omega
  CHECK(z.rule == "RL-NV-Assign");
  CHECK(value_equal(z.next.nv.at(Loc{"z", -1}), Value::make_int(1)));

  // reads of logged locations resolve against the log
  RedoStep commit = step_redo(z.next, oracle, std::nullopt);  // checkpoint(y,z)
  CHECK(commit.rule == "RL-CheckPoint");
  CHECK(value_equal(commit.next.nv.at(Loc{"x", -1}), Value::make_int(2)));
  CHECK(value_equal(commit.next.nv.at(Loc{"y", -1}), Value::make_int(1)));
  RedoStep read = step_redo(commit.next, oracle, std::nullopt);  // z := y + 1
  CHECK(read.rule == "RL-NV-Log");  // z is in the new omega {y, z}
  CHECK(value_equal(read.next.ctx.log.at(Loc{"z", -1}), Value::make_int(2)));
  CHECK(value_equal(redo_effective_nv(read.next).at(Loc{"z", -1}), Value::make_int(2)));
}

TEST_CASE("redo reboot leaves non-volatile memory untouched") {
  Program p = swap_program();
  InputOracle oracle;
  // fail mid-swap: after x := y was logged (steps: x,y,z,cp,a,x -> step 6)
  auto run = run_redo(p, oracle, one_failure(6, 2), 1000);
  REQUIRE(run.status == RunStatus::Done);
  // final state as if no failure happened
  CHECK(value_equal(run.final.nv.at(Loc{"x", -1}), Value::make_int(2)));
  CHECK(value_equal(redo_effective_nv(run.final).at(Loc{"z", -1}), Value::make_int(2)));
}

TEST_CASE("redo overlay lookup matches a materializing oracle") {
  Rng rng(11);
  for (int round = 0; round < 60; ++round) {
    Store nv;
    for (const char* n : {"x", "y", "z"}) {
      nv.insert(Loc{n, -1}, Value::make_int(rng.range(0, 9)));
    }
    Store log;
    for (const char* n : {"x", "y"}) {
      if (rng.chance(0.5)) log.insert(Loc{n, -1}, Value::make_int(rng.range(10, 19)));
    }
    Store vol;
    vol.insert(Loc{"v", -1}, Value::make_int(rng.range(0, 9)));

    ExprPtr e = make_bin(BinOp::Add, make_var("x"),
                         make_bin(BinOp::Mul, make_var("y"),
                                  make_bin(BinOp::Add, make_var("z"), make_var("v"))));
    EvalEnv env;
    env.nv_chain = {&log, &nv};
    env.vol = &vol;
    EvalResult lazy = eval_expr_env(env, *e);
    EvalResult materialized = eval_expr(overwrite(nv, log), vol, *e);
    CHECK(value_equal(lazy.value, materialized.value));
    CHECK(obs_seq_equal(lazy.reads, materialized.reads));
  }
}

TEST_CASE("task transitions commit the private log") {
  TaskProgram p = swap_tasks();
  InputOracle oracle;
  TaskConfig cfg = initial_task_config(p);
  // task 0: x:=1; y:=2; z:=3 (omega empty: direct writes); toTask(1)
  for (int i = 0; i < 3; ++i) cfg = step_task(cfg, oracle, std::nullopt).next;
  CHECK(cfg.tp.empty());
  TaskStep trans = step_task(cfg, oracle, std::nullopt);
  CHECK(trans.rule == "TSK-Trans");
  REQUIRE(trans.obs.size() == 1);
  CHECK(trans.obs[0].kind == Obs::Kind::Checkpoint);  // normalized transition
  cfg = trans.next;
  CHECK(cfg.current == 1);

  // task 1: a := x (local volatile), x := y and y := a go to Tp
  cfg = step_task(cfg, oracle, std::nullopt).next;
  TaskStep sx = step_task(cfg, oracle, std::nullopt);
  CHECK(sx.rule == "TSK-Update-S-Log");
  CHECK(value_equal(sx.next.tp.at(Loc{"x", -1}), Value::make_int(2)));
  CHECK(value_equal(sx.next.ts.at(Loc{"x", -1}), Value::make_int(1)));
  cfg = sx.next;
  cfg = step_task(cfg, oracle, std::nullopt).next;  // y := a
  cfg = step_task(cfg, oracle, std::nullopt).next;  // z := 1 (outside omega)
  CHECK(value_equal(cfg.ts.at(Loc{"z", -1}), Value::make_int(1)));

  TaskStep commit = step_task(cfg, oracle, std::nullopt);
  CHECK(commit.rule == "TSK-Trans");
  CHECK(value_equal(commit.next.ts.at(Loc{"x", -1}), Value::make_int(2)));
  CHECK(value_equal(commit.next.ts.at(Loc{"y", -1}), Value::make_int(1)));
  CHECK(commit.next.tp.empty());
}

TEST_CASE("task reboot restarts the current task with shared memory intact") {
  TaskProgram p = swap_tasks();
  InputOracle oracle;
  // fail inside task 1 after x := y landed in Tp (steps 0..3 = task 0,
  // step 4 = a:=x, step 5 = x:=y, fail at 6)
  auto run = run_task(p, oracle, one_failure(6, 2), 1000);
  REQUIRE(run.status == RunStatus::Done);
  Store eff = task_effective_nv(run.final);
  CHECK(value_equal(eff.at(Loc{"x", -1}), Value::make_int(2)));
  CHECK(value_equal(eff.at(Loc{"y", -1}), Value::make_int(1)));
  CHECK(value_equal(eff.at(Loc{"z", -1}), Value::make_int(2)));
}

TEST_CASE("reading an uninitialized volatile task-local faults") {
  TaskProgram p = parse_tasks(
      "ts { x = 0 }\ntlv { a = 5 }\ntask 0 () { x := 1; x := a }\n");
  InputOracle oracle;
  // a power failure clears the initialized bits; the read of a then faults
  auto run_ok = run_task(p, oracle, FailureSchedule{}, 100);
  CHECK(run_ok.status == RunStatus::Done);  // initial values count as written

  TaskConfig cfg = initial_task_config(p);
  cfg = step_task(cfg, oracle, std::make_optional<int64_t>(1)).next;  // power fail
  cfg = step_task(cfg, oracle, std::nullopt).next;                    // reboot
  cfg = step_task(cfg, oracle, std::nullopt).next;                    // x := 1
  CHECK_THROWS_AS(step_task(cfg, oracle, std::nullopt), EvalError);   // x := a
}

TEST_CASE("task well-formedness rejects read-before-write locals") {
  TaskProgram bad = parse_tasks("ts { x = 0 }\ntlv { a = 0 }\ntask 0 () { x := a; a := 1 }\n");
  CheckResult war = check_war(bad);
  REQUIRE(!war.ok());
  CHECK(war.violations[0].missing.count("a"));

  TaskProgram good = swap_tasks();
  CHECK(check_war(good).ok());
  CHECK(check_rio(good).ok());
}

TEST_CASE("task translation produces labeled checkpoint blocks") {
  TaskProgram p = swap_tasks();
  Program t = translate_tasks(p);
  REQUIRE(t.labels.size() == 3);
  CHECK(t.labels[0].first == "L0");
  CHECK(std::holds_alternative<GotoCmd>(t.body->node));

  // each block starts with the task's checkpoint
  for (size_t i = 0; i < 3; ++i) {
    const auto* seq = std::get_if<SeqCmd>(&t.labels[i].second->node);
    REQUIRE(seq != nullptr);
    const auto* cp = std::get_if<CheckpointInstr>(&seq->head.node);
    REQUIRE(cp != nullptr);
    CHECK(cp->omega == p.tasks[i].omega);
  }

  // toTask became goto; a task without transitions has none
  std::string text = program_to_string(t);
  CHECK(text.find("goto L1") != std::string::npos);
  CHECK(text.find("toTask") == std::string::npos);

  // instruction count is preserved excluding transitions
  for (size_t i = 0; i < 3; ++i) {
    int original = command_size(*p.tasks[i].body, /*count_transitions=*/false);
    int translated = command_size(*t.labels[i].second, true) - 1 /*checkpoint*/;
    const auto* has_goto = &t.labels[i].second;
    (void)has_goto;
    bool had_transition = command_size(*p.tasks[i].body, true) != original;
    if (had_transition) translated -= 1;  // the goto
    CHECK(original == translated);
  }
}

TEST_CASE("translation of a task with no transitions has no goto") {
  TaskProgram p = parse_tasks("ts { x = 0 }\ntask 0 () { x := 1 }\n");
  Program t = translate_tasks(p);
  std::string text = program_to_string(t);
  CHECK(text.find("goto") != std::string::npos);  // only the entry jump
  CHECK(program_to_string(t).find("goto L0") != std::string::npos);
  CHECK(t.labels.size() == 1);
  CHECK(command_to_string(*t.labels[0].second).find("goto") == std::string::npos);
}

TEST_CASE("ratchet inserts checkpoints before WAR writes") {
  // read-then-write of w gains a checkpoint before the write
  Program p1 = parse("nv { w = 0, x = 0 } vol {} main { x := w; w := 1 }");
  Program r1 = rewrite_ratchet(p1);
  std::string t1 = command_to_string(*r1.body);
  CHECK(t1.find("checkpoint()") != std::string::npos);
  CHECK(check_war(r1).ok());

  // x := x + 1 after a read splits through a fresh temporary
  Program p2 = parse("nv { x = 0, y = 0 } vol {} main { y := x; x := x + 1 }");
  Program r2 = rewrite_ratchet(p2);
  std::string t2 = command_to_string(*r2.body);
  CHECK(t2.find("_t0 := (x + 1)") != std::string::npos);
  CHECK(t2.find("x := _t0") != std::string::npos);
  CHECK(check_war(r2).ok());

  // write-dominated w needs no checkpoint
  Program p3 = parse("nv { w = 0, x = 0 } vol {} main { w := 3; x := w; w := x }");
  Program r3 = rewrite_ratchet(p3);
  CHECK(command_to_string(*r3.body).find("checkpoint") == std::string::npos);
  CHECK(check_war(r3).ok());
}

TEST_CASE("ratchet output passes the WAR check on fuzzed programs") {
  GenConfig cfg;
  cfg.checkpoint_density = 0.0;  // ratchet expects checkpoint-free sources
  cfg.input_ops = 0;  // inserted checkpoints shift input timestamps
  for (uint64_t seed = 1; seed <= 40; ++seed) {
    cfg.seed = seed;
    Program p = gen_program(cfg);
    Program r = rewrite_ratchet(p);
    CheckResult res = check_war(r);
    CHECK_MESSAGE(res.ok(), "seed ", seed);
    // the rewrite also executes equivalently under continuous power
    InputOracle oracle = gen_oracle(seed);
    ContRun a = run_cont(p, oracle, 100000);
    ContRun b = run_cont(r, oracle, 100000);
    for (const auto& [loc, v] : a.final.nv.entries()) {
      CHECK(value_equal(b.final.nv.at(loc), v));
    }
  }
}

TEST_CASE("jit restores the exact failure point on success") {
  Program p = parse("nv { x = 0, y = 0, i = 0 } vol {} main { x := 1; i := IN(); y := x + i }");
  InputOracle oracle;
  oracle.overrides[1] = 2;
  auto run = run_jit(p, oracle, one_failure(1, 3, /*cp_ok=*/true), 1000);
  REQUIRE(run.status == RunStatus::Done);
  ContRun cont = run_cont(p, oracle, 1000);
  // resumes exactly: same final store apart from input timestamps
  CHECK(value_equal(run.final.nv.at(Loc{"x", -1}), Value::make_int(1)));
  CHECK(value_equal(run.final.nv.at(Loc{"y", -1}),
                    Value::make_int(cont.final.nv.at(Loc{"y", -1}).num)));
}

TEST_CASE("jit restarts from the initial image when the checkpoint failed") {
  Program p = parse("nv { x = 5, y = 0 } vol {} main { x := 1; y := 2 }");
  InputOracle oracle;
  auto run = run_jit(p, oracle, one_failure(1, 2, /*cp_ok=*/false), 1000);
  REQUIRE(run.status == RunStatus::Done);
  // x was 1 when power failed; the restart rewrites N back to the initial
  // image and re-executes everything
  CHECK(value_equal(run.final.nv.at(Loc{"x", -1}), Value::make_int(1)));
  CHECK(value_equal(run.final.nv.at(Loc{"y", -1}), Value::make_int(2)));
  bool restarted = false;
  // re-run manually to observe the restart state
  JitConfig cfg = initial_jit_config(p);
  cfg = step_jit(cfg, oracle, true, std::nullopt).next;  // low power
  FailureEvent ev{1, 2, false};
  cfg = step_jit(cfg, oracle, false, ev).next;  // checkpoint fails
  JitStep rb = step_jit(cfg, oracle, false, std::nullopt);
  CHECK(rb.rule == "JIT-Restart");
  CHECK(value_equal(rb.next.nv.at(Loc{"x", -1}), Value::make_int(5)));
  restarted = true;
  CHECK(restarted);
}

TEST_CASE("jit without power events matches the continuous run") {
  GenConfig cfg;
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    cfg.seed = seed;
    Program p = gen_program(cfg);
    InputOracle oracle = gen_oracle(seed);
    auto jit = run_jit(p, oracle, FailureSchedule{}, 100000);
    ContRun cont = run_cont(p, oracle, 100000);
    REQUIRE(jit.status == RunStatus::Done);
    CHECK(jit.final.nv == cont.final.nv);
    CHECK(obs_seq_equal(jit.obs, cont.obs));
  }
}

TEST_CASE("translation preserves instruction counts on fuzzed task maps") {
  GenConfig cfg;
  for (uint64_t seed = 1; seed <= 30; ++seed) {
    cfg.seed = seed;
    TaskProgram p = gen_task_program(cfg);
    Program t = translate_tasks(p);
    REQUIRE(t.labels.size() == p.tasks.size());
    for (size_t i = 0; i < p.tasks.size(); ++i) {
      int original = command_size(*p.tasks[i].body, /*count_transitions=*/false);
      int transitions = command_size(*p.tasks[i].body, true) - original;
      // translated block = checkpoint + body with toTask |-> goto
      int translated = command_size(*t.labels[i].second, true);
      CHECK(translated == 1 + original + transitions);
    }
  }
}

TEST_CASE("generated task programs are well-formed and terminate") {
  GenConfig cfg;
  for (uint64_t seed = 1; seed <= 30; ++seed) {
    cfg.seed = seed;
    TaskProgram p = gen_task_program(cfg);
    CHECK(check_war(p).ok());
    CHECK(check_rio(p).ok());
    InputOracle oracle = gen_oracle(seed);
    auto run = run_task(p, oracle, FailureSchedule{}, 100000);
    CHECK(run.status == RunStatus::Done);
  }
}
