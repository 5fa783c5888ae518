#include <doctest.h>

#include "imtlab/equiv.hpp"
#include "imtlab/harness.hpp"
#include "imtlab/parse.hpp"

using namespace imt;

namespace {

Program fig5_program() { return parse(seeded_corpus()[2].text); }
Program fig2b() { return parse(seeded_corpus()[1].text); }

InputOracle fig5_oracle() {
  InputOracle oracle;
  oracle.overrides[1] = 2;
  oracle.overrides[9] = 0;
  return oracle;
}

FailureSchedule one_failure(int64_t step, int64_t duration) {
  FailureSchedule s;
  s.events.push_back(FailureEvent{step, duration, true});
  return s;
}

}  // namespace

TEST_CASE("obs_leq_m") {
  ObsSeq o;
  o.push_back(Obs::input(3));
  o.push_back(Obs::read(Loc{"x", -1}, Value::make_int(1)));
  CHECK(obs_leq_m(o, o));  // reflexive

  // in(1), reboot, in(9), rd z 3  <=m  in(9), rd z 3
  ObsSeq o1;
  o1.push_back(Obs::input(1));
  o1.push_back(Obs::reboot());
  o1.push_back(Obs::input(9));
  o1.push_back(Obs::read(Loc{"z", -1}, Value::make_int(3)));
  ObsSeq o2;
  o2.push_back(Obs::input(9));
  o2.push_back(Obs::read(Loc{"z", -1}, Value::make_int(3)));
  CHECK(obs_leq_m(o1, o2));

  ObsSeq r1{Obs::read(Loc{"x", -1}, Value::make_int(1))};
  ObsSeq r2{Obs::read(Loc{"x", -1}, Value::make_int(2))};
  CHECK(!obs_leq_m(r1, r2));

  ObsSeq with_cp{Obs::checkpoint()};
  CHECK_THROWS_AS(obs_leq_m(with_cp, o2), std::invalid_argument);
  ObsSeq bad_cont{Obs::reboot()};
  CHECK_THROWS_AS(obs_leq_m(o1, bad_cont), std::invalid_argument);
}

TEST_CASE("obs_leq_cm accepts the paper's trace instance") {
  // checkpoint, in(1), reboot, in(9), rd z 3  <=cm  in(9), rd z 3
  ObsSeq o1;
  o1.push_back(Obs::checkpoint());
  o1.push_back(Obs::input(1));
  o1.push_back(Obs::reboot());
  o1.push_back(Obs::input(9));
  o1.push_back(Obs::read(Loc{"z", -1}, Value::make_int(3)));
  ObsSeq o2;
  o2.push_back(Obs::input(9));
  o2.push_back(Obs::read(Loc{"z", -1}, Value::make_int(3)));
  CHECK(obs_leq_cm(o1, o2));

  CHECK(obs_leq_cm(ObsSeq{}, ObsSeq{}));

  // reflexivity on checkpoint-free sequences
  CHECK(obs_leq_cm(o2, o2));
}

TEST_CASE("failure-free intermittent observations match continuous ones") {
  GenConfig cfg;
  for (uint64_t seed = 1; seed <= 25; ++seed) {
    cfg.seed = seed;
    Program p = instrument(gen_program(cfg), Policy::WarEmwTainted);
    InputOracle oracle = gen_oracle(seed);
    IntRun ir = run_int(p, oracle, FailureSchedule{}, 100000);
    ContRun cr = run_cont(p, oracle, 100000);
    REQUIRE(ir.status == RunStatus::Done);
    CHECK(obs_leq_cm(ir.obs, strip_markers(cr.obs)));
  }
}

TEST_CASE("check_correspondence: empty schedule corresponds to itself") {
  Program p = instrument(fig2b(), Policy::WarEmwTainted);
  InputOracle oracle = gen_oracle(3);
  IntRun run = run_int(p, oracle, FailureSchedule{}, 10000);
  REQUIRE(run.status == RunStatus::Done);
  CorrespondenceResult corr = check_correspondence(p, run.trace, oracle);
  CHECK(corr.report.holds);
}

TEST_CASE("check_correspondence: the golden failure scenario") {
  Program p = fig5_program();
  InputOracle oracle = fig5_oracle();
  IntRun run = run_int(p, oracle, one_failure(4, 4), 1000);
  REQUIRE(run.status == RunStatus::Done);
  CorrespondenceResult corr = check_correspondence(p, run.trace, oracle);
  CHECK(corr.report.holds);
  CHECK(corr.continuous_final.nv == run.final.nv);
  CHECK(corr.continuous_final.tau == run.final.tau);
}

TEST_CASE("check_correspondence flags the WAR-only RIO bug with witness y") {
  Program p = instrument(fig2b(), Policy::WarOnly);
  InputOracle oracle;
  oracle.overrides[3] = 2;
  oracle.overrides[11] = 0;
  IntRun run = run_int(p, oracle, one_failure(6, 2), 1000);
  REQUIRE(run.status == RunStatus::Done);
  CorrespondenceResult corr = check_correspondence(p, run.trace, oracle);
  CHECK(!corr.report.holds);
  CHECK(corr.report.witness_locs.count("y"));
}

TEST_CASE("check_correspondence requires a terminal trace") {
  Program p = fig5_program();
  InputOracle oracle = fig5_oracle();
  FailureSchedule dense;
  for (int i = 0; i < 64; ++i) dense.events.push_back(FailureEvent{i, 1, true});
  IntRun run = run_int(p, oracle, dense, 100000);
  REQUIRE(run.status == RunStatus::RetryCapHit);
  CHECK_THROWS_AS(check_correspondence(p, run.trace, oracle), std::invalid_argument);
}

TEST_CASE("MstWt and MFstWt by exhaustive enumeration") {
  // region of the running example after the checkpoint, a = 0
  Program p = fig2b();
  const auto* seq = std::get_if<SeqCmd>(&p.body->node);
  REQUIRE(seq != nullptr);
  ContConfig start;
  start.tau = 1;
  start.nv = initial_store(p.nonvolatile);
  start.vol = initial_store(p.volatiles);
  start.cmd = seq->tail;

  BruteForceOptions opts;
  LocSet mst = mst_wt(start, opts);
  LocSet mfst = mfst_wt(start, opts);
  // with a = 0 the else path always runs: b, i, x written on every input
  CHECK(mst == LocSet{Loc{"b", -1}, Loc{"i", -1}, Loc{"x", -1}});
  CHECK(mfst == mst);  // none of them is read first
}

TEST_CASE("enumeration honors the size guard") {
  Program p = parse(
      "nv { i = 0 } vol {} main { i := IN(); i := IN(); i := IN(); i := IN(); i := IN(); "
      "i := IN(); i := IN(); i := IN(); i := IN(); i := IN(); i := IN(); i := IN(); i := "
      "IN() }");
  ContConfig start = initial_cont_config(p);
  BruteForceOptions opts;
  opts.max_traces = 64;
  CHECK_THROWS_AS(enumerate_region_traces(start, opts), EvalError);
}

TEST_CASE("relation_initial_point covers the paper's walk") {
  Program p = fig2b();
  InputOracle oracle;
  oracle.overrides[3] = 2;
  oracle.overrides[12] = 0;
  Program instrumented = instrument(p, Policy::WarEmwTainted);
  // fail after both the y and x writes of the input-dependent branch
  IntRun run = run_int(instrumented, oracle, one_failure(7, 2), 1000);
  REQUIRE(run.status == RunStatus::Done);

  // region start = configuration right after the checkpoint
  const auto& after_cp = run.trace.steps[0];
  REQUIRE(after_cp.rule == "I/O-CP-CheckPoint");
  ContConfig region_start{after_cp.config.tau, after_cp.config.nv, after_cp.config.vol,
                          after_cp.config.cmd};

  // state at the power failure: b, i, x, y differ from the continuous
  // initial store
  size_t fail_idx = 0;
  for (size_t i = 0; i < run.trace.steps.size(); ++i) {
    if (run.trace.steps[i].rule == "I/O-CP-PowerFail") fail_idx = i;
  }
  REQUIRE(fail_idx > 0);
  const Store& n_int = run.trace.steps[fail_idx].config.nv;
  const Store& n_cont = run.trace.start.nv;

  LocSet diff;
  for (const auto& [loc, v] : n_int.entries()) {
    if (!value_equal(v, n_cont.at(loc))) diff.insert(loc);
  }
  CHECK(diff == LocSet{Loc{"b", -1}, Loc{"i", -1}, Loc{"x", -1}, Loc{"y", -1}});

  LocSet ckpt_dom = expand(n_int, NameSet{"w", "y", "z"});
  BruteForceOptions opts;
  CHECK(relation_initial_point(n_int, n_cont, ckpt_dom, region_start, opts));
  // without y in the checkpointed set the relation breaks
  LocSet war_dom = expand(n_int, NameSet{"w", "z"});
  CHECK(!relation_initial_point(n_int, n_cont, war_dom, region_start, opts));

  // identical stores always relate
  CHECK(relation_initial_point(n_cont, n_cont, {}, region_start, opts));
}

TEST_CASE("relation_same_point accepts the post-reboot alignment") {
  Program p = instrument(fig2b(), Policy::WarEmwTainted);
  InputOracle oracle;
  oracle.overrides[3] = 2;
  oracle.overrides[11] = 0;
  IntRun run = run_int(p, oracle, one_failure(6, 2), 1000);
  REQUIRE(run.status == RunStatus::Done);

  // the re-execution's region start is the post-reboot configuration
  const IntermittentConfig* rb = nullptr;
  for (const auto& s : run.trace.steps) {
    if (s.rule == "I/O-CP-Reboot") rb = &s.config;
  }
  REQUIRE(rb != nullptr);
  ContConfig region_start{rb->tau, rb->nv, rb->vol, rb->cmd};

  // at the region start with an empty trace, the differing locations
  // (b and i from the failed attempt) are must-first-writes
  BruteForceOptions opts;
  CHECK(relation_same_point(rb->nv, run.trace.start.nv, region_start, {}, region_start,
                            opts));

  // with war-only instrumentation y stays stale, and y is not a
  // must-first-write: the relation rejects it
  Program war_only = instrument(fig2b(), Policy::WarOnly);
  IntRun bad = run_int(war_only, oracle, one_failure(6, 2), 1000);
  const IntermittentConfig* bad_rb = nullptr;
  for (const auto& s : bad.trace.steps) {
    if (s.rule == "I/O-CP-Reboot") bad_rb = &s.config;
  }
  REQUIRE(bad_rb != nullptr);
  ContConfig bad_start{bad_rb->tau, bad_rb->nv, bad_rb->vol, bad_rb->cmd};
  CHECK(!relation_same_point(bad_rb->nv, bad.trace.start.nv, bad_start, {}, bad_start, opts));
}

TEST_CASE("solid relation survives a reboot") {
  // after N' <| N_ckpt the differing set can only shrink: if the relation
  // held before the reboot (against the attempt's start) it holds after
  // (against the restored store)
  Program p = instrument(fig2b(), Policy::WarEmwTainted);
  InputOracle oracle;
  oracle.overrides[3] = 2;
  oracle.overrides[11] = 0;
  IntRun run = run_int(p, oracle, one_failure(6, 2), 1000);
  BruteForceOptions opts;
  LocSet ckpt_dom = expand(run.trace.start.nv, NameSet{"w", "y", "z"});

  const auto& after_cp = run.trace.steps[0];
  ContConfig attempt_start{after_cp.config.tau, after_cp.config.nv, after_cp.config.vol,
                           after_cp.config.cmd};
  for (size_t i = 0; i < run.trace.steps.size(); ++i) {
    const auto& step = run.trace.steps[i];
    if (step.rule == "I/O-CP-Reboot") {
      const Store& pre = run.trace.steps[i - 1].config.nv;
      const Store& post = step.config.nv;
      ContConfig restored{step.config.tau, step.config.nv, step.config.vol, step.config.cmd};
      if (relation_initial_point(pre, run.trace.start.nv, ckpt_dom, attempt_start, opts)) {
        CHECK(relation_initial_point(post, run.trace.start.nv, ckpt_dom, restored, opts));
      }
      attempt_start = restored;
    }
  }
}

TEST_CASE("bisimulation on the swap program with failures") {
  Program p = parse(seeded_corpus()[3].text);
  InputOracle oracle;
  for (int64_t fail_at : {0, 3, 5, 6, 8, 9, 11}) {
    RelationReport undo = bisim_lockstep(p, BisimPair::BasicUndo, oracle,
                                         one_failure(fail_at, 2), 10000);
    CHECK_MESSAGE(undo.holds, "undo diverged at failure step ", fail_at, ": ", undo.witness);
    RelationReport redo = bisim_lockstep(p, BisimPair::BasicRedo, oracle,
                                         one_failure(fail_at, 2), 10000);
    CHECK_MESSAGE(redo.holds, "redo diverged at failure step ", fail_at, ": ", redo.witness);
  }
}

TEST_CASE("bisimulation holds vacuously on a single skip") {
  Program p = parse("nv {} vol {} main { skip }");
  InputOracle oracle;
  CHECK(bisim_lockstep(p, BisimPair::BasicUndo, oracle, FailureSchedule{}).holds);
  CHECK(bisim_lockstep(p, BisimPair::BasicRedo, oracle, FailureSchedule{}).holds);
}

TEST_CASE("task lockstep against the translated redo program") {
  TaskProgram p = parse_tasks(seeded_corpus()[4].text);
  InputOracle oracle;
  CHECK(bisim_redo_task(p, oracle, FailureSchedule{}).holds);
  for (int64_t fail_at : {0, 2, 4, 5, 7, 9}) {
    RelationReport r = bisim_redo_task(p, oracle, one_failure(fail_at, 3), 10000);
    CHECK_MESSAGE(r.holds, "diverged with failure at ", fail_at, ": ", r.witness);
  }
}

TEST_CASE("task programs with inputs stay in lockstep") {
  TaskProgram p = parse_tasks(
      "ts { x = 0, y = 0, i = 0 }\n"
      "tlv { a = 0 }\n"
      "task 0 () { i := IN(); x := 1; toTask(1) }\n"
      "task 1 (y) { a := x; y := a + i; toTask(2) }\n"
      "task 2 () { x := y }\n");
  InputOracle oracle = gen_oracle(5);
  for (int64_t fail_at : {1, 3, 5, 6}) {
    RelationReport r = bisim_redo_task(p, oracle, one_failure(fail_at, 2), 10000);
    CHECK_MESSAGE(r.holds, "diverged with failure at ", fail_at, ": ", r.witness);
  }
}
