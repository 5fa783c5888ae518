#include "imtlab/equiv.hpp"

#include <deque>
#include <sstream>

namespace imt {
namespace {

ObsSeq suffix_after_last_reboot(const ObsSeq& seq) {
  size_t start = 0;
  for (size_t i = 0; i < seq.size(); ++i) {
    if (seq[i].kind == Obs::Kind::Reboot) start = i + 1;
  }
  return ObsSeq(seq.begin() + static_cast<ptrdiff_t>(start), seq.end());
}

// Segment suffixes after each segment's last reboot, concatenated: the
// canonical form an intermittent sequence must reduce to for <=cm.
ObsSeq reduce_intermittent(const ObsSeq& o1) {
  ObsSeq out;
  ObsSeq segment;
  for (const auto& o : o1) {
    if (o.kind == Obs::Kind::Checkpoint) {
      ObsSeq suffix = suffix_after_last_reboot(segment);
      out.insert(out.end(), suffix.begin(), suffix.end());
      segment.clear();
    } else {
      segment.push_back(o);
    }
  }
  ObsSeq suffix = suffix_after_last_reboot(segment);
  out.insert(out.end(), suffix.begin(), suffix.end());
  return out;
}

void require_no_markers(const ObsSeq& o2, const char* who) {
  for (const auto& o : o2) {
    if (o.kind == Obs::Kind::Reboot || o.kind == Obs::Kind::Checkpoint) {
      throw std::invalid_argument(std::string(who) + ": marker in continuous sequence");
    }
  }
}

}  // namespace

bool obs_leq_m(const ObsSeq& o1, const ObsSeq& o2) {
  for (const auto& o : o1) {
    if (o.kind == Obs::Kind::Checkpoint) {
      throw std::invalid_argument("obs_leq_m: checkpoint marker in intermittent sequence");
    }
  }
  require_no_markers(o2, "obs_leq_m");
  return obs_seq_equal(suffix_after_last_reboot(o1), o2);
}

bool obs_leq_cm(const ObsSeq& o1, const ObsSeq& o2) {
  require_no_markers(o2, "obs_leq_cm");
  return obs_seq_equal(reduce_intermittent(o1), o2);
}

// --- brute-force region traces ------------------------------------------------

namespace {

bool command_starts_checkpoint(const Command& c) {
  if (const auto* s = std::get_if<SingleCmd>(&c.node)) {
    return std::holds_alternative<CheckpointInstr>(s->instr.node);
  }
  if (const auto* s = std::get_if<SeqCmd>(&c.node)) {
    return std::holds_alternative<CheckpointInstr>(s->head.node);
  }
  return false;
}

bool command_head_is_input(const Command& c) {
  if (const auto* s = std::get_if<SingleCmd>(&c.node)) {
    return std::holds_alternative<InputInstr>(s->instr.node);
  }
  if (const auto* s = std::get_if<SeqCmd>(&c.node)) {
    return std::holds_alternative<InputInstr>(s->head.node);
  }
  return false;
}

struct TraceEnumerator {
  const BruteForceOptions& opts;
  const CodeContext& ctx;
  std::vector<RegionTrace> out;

  void walk(ContConfig cfg, std::vector<int64_t> inputs, LocSet writes, LocSet first_writes,
            LocSet accessed, int64_t steps) {
    for (;;) {
      if (cfg.terminal() || command_starts_checkpoint(*cfg.cmd)) {
        if (static_cast<int64_t>(out.size()) >= opts.max_traces) {
          throw EvalError("brute-force enumeration exceeds max_traces");
        }
        out.push_back(RegionTrace{std::move(inputs), std::move(writes),
                                  std::move(first_writes), std::move(cfg)});
        return;
      }
      if (steps >= opts.fuel) throw EvalError("fuel exhausted in region enumeration");
      if (command_head_is_input(*cfg.cmd)) {
        for (size_t i = 0; i < opts.domain.size(); ++i) {
          InputOracle feed;
          feed.overrides[cfg.tau] = opts.domain[i];
          ContStep s = step_cont(cfg, feed, ctx);
          std::vector<int64_t> inputs2 = inputs;
          inputs2.push_back(opts.domain[i]);
          LocSet w2 = writes, f2 = first_writes, a2 = accessed;
          absorb(s, cfg, w2, f2, a2);
          if (i + 1 == opts.domain.size()) {
            // last domain value continues in place
            inputs = std::move(inputs2);
            writes = std::move(w2);
            first_writes = std::move(f2);
            accessed = std::move(a2);
            cfg = std::move(s.next);
            ++steps;
            break;
          }
          walk(s.next, std::move(inputs2), std::move(w2), std::move(f2), std::move(a2),
               steps + 1);
        }
        continue;
      }
      InputOracle unused;
      ContStep s = step_cont(cfg, unused, ctx);
      absorb(s, cfg, writes, first_writes, accessed);
      cfg = std::move(s.next);
      ++steps;
    }
  }

  // Reads happen before the step's write; only non-volatile locations count.
  static void absorb(const ContStep& s, const ContConfig& pre, LocSet& writes,
                     LocSet& first_writes, LocSet& accessed) {
    for (const auto& o : s.obs) {
      if (o.kind == Obs::Kind::Read && pre.nv.contains(o.loc)) accessed.insert(o.loc);
    }
    for (const auto& w : s.writes) {
      if (!pre.nv.contains(w)) continue;
      writes.insert(w);
      if (!accessed.count(w)) first_writes.insert(w);
      accessed.insert(w);
    }
  }
};

}  // namespace

std::vector<RegionTrace> enumerate_region_traces(const ContConfig& start,
                                                 const BruteForceOptions& opts,
                                                 const CodeContext& ctx) {
  TraceEnumerator en{opts, ctx, {}};
  en.walk(start, {}, {}, {}, {}, 0);
  return en.out;
}

LocSet mst_wt(const ContConfig& start, const BruteForceOptions& opts, const CodeContext& ctx) {
  auto traces = enumerate_region_traces(start, opts, ctx);
  LocSet acc = traces.front().writes;
  for (size_t i = 1; i < traces.size(); ++i) {
    LocSet next;
    for (const auto& loc : acc) {
      if (traces[i].writes.count(loc)) next.insert(loc);
    }
    acc = std::move(next);
  }
  return acc;
}

LocSet mfst_wt(const ContConfig& start, const BruteForceOptions& opts, const CodeContext& ctx) {
  auto traces = enumerate_region_traces(start, opts, ctx);
  LocSet acc = traces.front().first_writes;
  for (size_t i = 1; i < traces.size(); ++i) {
    LocSet next;
    for (const auto& loc : acc) {
      if (traces[i].first_writes.count(loc)) next.insert(loc);
    }
    acc = std::move(next);
  }
  return acc;
}

// --- relation predicates -------------------------------------------------------

namespace {

LocSet differing_locs(const Store& a, const Store& b) {
  if (a.size() != b.size()) throw std::invalid_argument("store domains differ");
  LocSet out;
  for (const auto& [loc, v] : a.entries()) {
    if (!b.contains(loc)) throw std::invalid_argument("store domains differ");
    if (!value_equal(v, b.at(loc))) out.insert(loc);
  }
  return out;
}

}  // namespace

bool relation_initial_point(const Store& n_int, const Store& n_cont, const LocSet& ckpt_dom,
                            const ContConfig& region_start, const BruteForceOptions& opts) {
  LocSet diff = differing_locs(n_int, n_cont);
  if (diff.empty()) return true;
  LocSet mfw = mfst_wt(region_start, opts);
  for (const auto& loc : diff) {
    if (!ckpt_dom.count(loc) && !mfw.count(loc)) return false;
  }
  return true;
}

bool relation_same_point(const Store& n_int, const Store& n_cont,
                         const ContConfig& region_start, const std::vector<int64_t>& inputs,
                         const ContConfig& current, const BruteForceOptions& opts) {
  LocSet diff = differing_locs(n_int, n_cont);
  if (diff.empty()) return true;
  LocSet mfw = mfst_wt(region_start, opts);

  // Replay the unique trace from the region start to the current point.
  ContConfig cfg = region_start;
  size_t feed = 0;
  LocSet wt;
  int64_t steps = 0;
  while (!command_equal(*cfg.cmd, *current.cmd) || cfg.tau != current.tau) {
    if (cfg.terminal()) throw std::invalid_argument("current point unreachable in replay");
    if (steps++ >= opts.fuel) throw EvalError("fuel exhausted in relation replay");
    InputOracle oracle;
    if (command_head_is_input(*cfg.cmd)) {
      if (feed >= inputs.size()) throw std::invalid_argument("input feed too short");
      oracle.overrides[cfg.tau] = inputs[feed++];
    }
    ContStep s = step_cont(cfg, oracle);
    for (const auto& w : s.writes) {
      if (cfg.nv.contains(w)) wt.insert(w);
    }
    cfg = std::move(s.next);
  }
  if (!(cfg.nv == n_int)) {
    throw std::invalid_argument("replayed state does not match the intermittent store");
  }

  LocSet mst = mst_wt(current, opts);
  for (const auto& loc : diff) {
    if (!mfw.count(loc)) return false;
    if (!mst.count(loc)) return false;
    if (wt.count(loc)) return false;
  }
  return true;
}

// --- correspondence -------------------------------------------------------------

CorrespondenceResult check_correspondence(const Program& p, const Trace& trace,
                                          const InputOracle& oracle, int64_t fuel) {
  if (!trace.steps.empty() && !trace.steps.back().config.terminal()) {
    throw std::invalid_argument("check_correspondence requires a terminal trace");
  }
  if (trace.steps.empty() && !trace.start.terminal()) {
    throw std::invalid_argument("check_correspondence requires a terminal trace");
  }

  CorrespondenceResult res;

  // Final-attempt start time per checkpoint segment.
  std::vector<int64_t> attempt_start;
  {
    int64_t current = trace.start.tau;
    for (const auto& step : trace.steps) {
      if (step.rule == "I/O-CP-Reboot") {
        current = step.config.tau;
      } else if (step.rule == "I/O-CP-CheckPoint") {
        attempt_start.push_back(current);
        current = step.config.tau;
      }
    }
    attempt_start.push_back(current);
  }

  res.tau2 = attempt_start.front();

  CodeContext ctx;
  for (const auto& [label, cmd] : p.labels) ctx[label] = cmd;

  ContConfig cfg = initial_cont_config(p, res.tau2);
  ObsSeq o2;
  size_t segment = 0;
  int64_t steps = 0;
  try {
    while (!cfg.terminal()) {
      if (steps++ >= fuel) throw EvalError("fuel exhausted in continuous synthesis");
      ContStep s = step_cont(cfg, oracle, ctx);
      o2.insert(o2.end(), s.obs.begin(), s.obs.end());
      cfg = std::move(s.next);
      if (s.rule == "CheckPoint") {
        ++segment;
        if (segment < attempt_start.size() && attempt_start[segment] > cfg.tau) {
          cfg = sleep(cfg, attempt_start[segment]);
        }
      }
    }
  } catch (const EvalError& e) {
    res.report.holds = false;
    res.report.witness = std::string("continuous synthesis fault: ") + e.what();
    res.continuous_final = cfg;
    return res;
  }

  res.continuous_obs = strip_markers(o2);
  res.continuous_final = cfg;

  ObsSeq reduced = reduce_intermittent(trace.obs);
  const ObsSeq& expected = res.continuous_obs;
  size_t n = std::min(reduced.size(), expected.size());
  for (size_t i = 0; i < n; ++i) {
    if (!obs_equal(reduced[i], expected[i])) {
      res.report.holds = false;
      res.report.divergence_index = static_cast<int64_t>(i);
      std::ostringstream os;
      os << "observation mismatch at " << i << ": intermittent '" << reduced[i].to_string()
         << "' vs continuous '" << expected[i].to_string() << "'";
      res.report.witness = os.str();
      if (reduced[i].kind == Obs::Kind::Read) res.report.witness_locs.insert(reduced[i].loc.name);
      if (expected[i].kind == Obs::Kind::Read) {
        res.report.witness_locs.insert(expected[i].loc.name);
      }
      return res;
    }
  }
  if (reduced.size() != expected.size()) {
    res.report.holds = false;
    res.report.divergence_index = static_cast<int64_t>(n);
    res.report.witness = "observation length mismatch: intermittent " +
                         std::to_string(reduced.size()) + " vs continuous " +
                         std::to_string(expected.size());
    const ObsSeq& longer = reduced.size() > expected.size() ? reduced : expected;
    if (longer[n].kind == Obs::Kind::Read) res.report.witness_locs.insert(longer[n].loc.name);
    return res;
  }

  const IntermittentConfig& final_int =
      trace.steps.empty() ? trace.start : trace.steps.back().config;
  if (final_int.tau != cfg.tau) {
    res.report.holds = false;
    res.report.witness = "final timestamps differ: intermittent " +
                         std::to_string(final_int.tau) + " vs continuous " +
                         std::to_string(cfg.tau);
    return res;
  }
  LocSet nv_diff = differing_locs(final_int.nv, cfg.nv);
  LocSet vol_diff = differing_locs(final_int.vol, cfg.vol);
  if (!nv_diff.empty() || !vol_diff.empty()) {
    res.report.holds = false;
    std::ostringstream os;
    os << "final stores differ at";
    for (const auto& loc : nv_diff) {
      os << " " << loc.to_string();
      res.report.witness_locs.insert(loc.name);
    }
    for (const auto& loc : vol_diff) {
      os << " " << loc.to_string();
      res.report.witness_locs.insert(loc.name);
    }
    res.report.witness = os.str();
    return res;
  }
  return res;
}

// --- lockstep bisimulation --------------------------------------------------------

const char* bisim_pair_name(BisimPair pair) {
  switch (pair) {
    case BisimPair::BasicUndo: return "basic-undo";
    case BisimPair::BasicRedo: return "basic-redo";
    case BisimPair::RedoTask: return "redo-task";
  }
  return "?";
}

namespace {

struct BisimDriver {
  RelationReport report;

  void fail(int64_t step, const std::string& what) {
    if (!report.holds) return;
    report.holds = false;
    report.divergence_index = step;
    report.witness = what;
  }
};

bool reboot_pending(const Command& cmd) {
  if (const auto* s = std::get_if<SingleCmd>(&cmd.node)) {
    return std::holds_alternative<RebootInstr>(s->instr.node);
  }
  return false;
}

std::optional<int64_t> schedule_fire(std::deque<FailureEvent>& pending, int64_t step,
                                     bool rebooting) {
  if (!pending.empty() && pending.front().at_step <= step && !rebooting) {
    int64_t n = pending.front().off_duration;
    pending.pop_front();
    return n;
  }
  return std::nullopt;
}

bool names_equal_locs(const NameSet& names, const Store& reference, const Store& snapshot) {
  LocSet expanded;
  try {
    expanded = expand(reference, names);
  } catch (const StoreError&) {
    return false;
  }
  if (expanded.size() != snapshot.size()) return false;
  for (const auto& loc : expanded) {
    if (!snapshot.contains(loc)) return false;
  }
  return true;
}

}  // namespace

RelationReport bisim_lockstep(const Program& p, BisimPair pair, const InputOracle& oracle,
                              const FailureSchedule& schedule, int64_t fuel) {
  if (pair == BisimPair::RedoTask) {
    throw std::invalid_argument("redo-task lockstep needs a task program; use bisim_redo_task");
  }
  BisimDriver d;
  CodeContext ctx;
  for (const auto& [label, cmd] : p.labels) ctx[label] = cmd;

  IntermittentConfig basic = initial_int_config(p);
  UndoConfig undo = initial_undo_config(p);
  RedoConfig redo = initial_redo_config(p);
  std::deque<FailureEvent> pending(schedule.events.begin(), schedule.events.end());

  for (int64_t step = 0; step < fuel; ++step) {
    if (basic.terminal()) break;
    std::optional<int64_t> fail = schedule_fire(pending, step, reboot_pending(*basic.cmd));
    IntStep bs = step_int(basic, oracle, fail, ctx);

    ObsSeq other_obs;
    if (pair == BisimPair::BasicUndo) {
      UndoStep us = step_undo(undo, oracle, fail, ctx);
      other_obs = us.obs;
      undo = std::move(us.next);
    } else {
      RedoStep rs = step_redo(redo, oracle, fail, ctx);
      other_obs = rs.obs;
      redo = std::move(rs.next);
    }
    basic = std::move(bs.next);

    if (!obs_seq_equal(bs.obs, other_obs)) {
      d.fail(step, "observation mismatch: basic '" + obs_seq_to_string(bs.obs) + "' vs '" +
                       obs_seq_to_string(other_obs) + "'");
      return d.report;
    }

    if (pair == BisimPair::BasicUndo) {
      if (basic.tau != undo.tau) d.fail(step, "timestamps differ");
      if (!command_equal(*basic.cmd, *undo.cmd)) d.fail(step, "commands differ");
      if (!(basic.nv == undo.nv)) d.fail(step, "non-volatile stores differ");
      if (!(basic.vol == undo.vol)) d.fail(step, "volatile stores differ");
      if (!names_equal_locs(undo.ctx.omega, undo.nv, basic.ctx.saved_nv)) {
        d.fail(step, "omega does not match checkpointed domain");
      }
      if (!(basic.ctx.saved_vol == undo.ctx.saved_vol) ||
          !command_equal(*basic.ctx.saved_cmd, *undo.ctx.saved_cmd)) {
        d.fail(step, "saved contexts differ");
      }
      // dom(L) = LL, log values equal the checkpointed snapshot, and the
      // unlogged omega locations still hold their checkpoint-time values.
      if (undo.ctx.logged.size() != undo.ctx.log.size()) d.fail(step, "dom(L) != LL");
      for (const auto& loc : undo.ctx.logged) {
        if (!undo.ctx.log.contains(loc) ||
            !value_equal(undo.ctx.log.at(loc), basic.ctx.saved_nv.at(loc))) {
          d.fail(step, "log value differs from checkpointed value at " + loc.to_string());
          break;
        }
      }
      if (d.report.holds) {
        for (const auto& [loc, v] : basic.ctx.saved_nv.entries()) {
          if (!undo.ctx.logged.count(loc) && !value_equal(undo.nv.at(loc), v)) {
            d.fail(step, "unlogged omega location diverged: " + loc.to_string());
            break;
          }
        }
      }
    } else {
      if (basic.tau != redo.tau) d.fail(step, "timestamps differ");
      if (!command_equal(*basic.cmd, *redo.cmd)) d.fail(step, "commands differ");
      if (!(basic.vol == redo.vol)) d.fail(step, "volatile stores differ");
      if (!names_equal_locs(redo.ctx.omega, redo.nv, basic.ctx.saved_nv)) {
        d.fail(step, "omega does not match checkpointed domain");
      }
      if (!(basic.ctx.saved_vol == redo.ctx.saved_vol) ||
          !command_equal(*basic.ctx.saved_cmd, *redo.ctx.saved_cmd)) {
        d.fail(step, "saved contexts differ");
      }
      // Locations where the stores differ are exactly covered by the log,
      // log values match basic's store (N_d = N_r <| L), and omega
      // locations in the redo store still hold checkpoint-time values.
      for (const auto& [loc, v] : redo.ctx.log.entries()) {
        if (!redo.ctx.omega.count(loc.name)) {
          d.fail(step, "log outside omega: " + loc.to_string());
          break;
        }
        if (!value_equal(v, basic.nv.at(loc))) {
          d.fail(step, "log value differs from basic store at " + loc.to_string());
          break;
        }
      }
      if (d.report.holds) {
        for (const auto& [loc, v] : basic.nv.entries()) {
          if (!value_equal(v, redo.nv.at(loc)) && !redo.ctx.log.contains(loc)) {
            d.fail(step, "divergent location missing from log: " + loc.to_string());
            break;
          }
        }
      }
      if (d.report.holds) {
        for (const auto& [loc, v] : basic.ctx.saved_nv.entries()) {
          if (!value_equal(redo.nv.at(loc), v)) {
            d.fail(step, "omega location not preserved in redo store: " + loc.to_string());
            break;
          }
        }
      }
    }
    if (!d.report.holds) return d.report;
  }
  return d.report;
}

RelationReport bisim_redo_task(const TaskProgram& p, const InputOracle& oracle,
                               const FailureSchedule& schedule, int64_t fuel) {
  BisimDriver d;
  Program translated = translate_tasks(p);
  CodeContext ctx;
  for (const auto& [label, cmd] : translated.labels) ctx[label] = cmd;

  TaskConfig task = initial_task_config(p);
  // The redo side executes goto + entry checkpoint before lockstep begins;
  // starting one tick earlier aligns the clocks.
  RedoConfig redo = initial_redo_config(translated, /*tau=*/-1);
  {
    RedoStep g = step_redo(redo, oracle, std::nullopt, ctx);
    redo = std::move(g.next);
    RedoStep cp = step_redo(redo, oracle, std::nullopt, ctx);
    redo = std::move(cp.next);
  }

  std::deque<FailureEvent> pending(schedule.events.begin(), schedule.events.end());

  for (int64_t step = 0; step < fuel; ++step) {
    if (task.terminal()) break;
    std::optional<int64_t> fail = schedule_fire(pending, step, reboot_pending(*task.cmd));

    bool transition = false;
    if (!fail) {
      if (const auto* s = std::get_if<SingleCmd>(&task.cmd->node)) {
        transition = std::holds_alternative<ToTaskInstr>(s->instr.node);
      }
    }

    TaskStep tsk = step_task(task, oracle, fail);
    task = std::move(tsk.next);

    ObsSeq redo_obs;
    if (transition) {
      // toTask on the task side corresponds to goto + checkpoint, treated
      // as one atomic step.
      RedoStep g = step_redo(redo, oracle, std::nullopt, ctx);
      redo_obs = g.obs;
      redo = std::move(g.next);
      RedoStep cp = step_redo(redo, oracle, std::nullopt, ctx);
      redo_obs.insert(redo_obs.end(), cp.obs.begin(), cp.obs.end());
      redo = std::move(cp.next);
    } else {
      RedoStep rs = step_redo(redo, oracle, fail, ctx);
      redo_obs = rs.obs;
      redo = std::move(rs.next);
    }

    if (!obs_seq_equal(tsk.obs, redo_obs)) {
      d.fail(step, "observation mismatch: task '" + obs_seq_to_string(tsk.obs) + "' vs redo '" +
                       obs_seq_to_string(redo_obs) + "'");
      return d.report;
    }

    if (task.tau != redo.tau) d.fail(step, "timestamps differ");
    if (d.report.holds && !command_equal(*translate_command(*task.cmd), *redo.cmd)) {
      d.fail(step, "translated command differs from redo command");
    }
    if (d.report.holds && task.current_task().omega != redo.ctx.omega) {
      d.fail(step, "omegas differ");
    }
    if (d.report.holds && !(task.tp == redo.ctx.log)) d.fail(step, "Tp != L");
    if (d.report.holds &&
        !command_equal(*translate_command(*task.current_task().body), *redo.ctx.saved_cmd)) {
      d.fail(step, "saved continuation differs from the translated task body");
    }
    if (d.report.holds) {
      // N_r = Ts + Tl_N: both hold entry values inside omega (updates are
      // diverted to the logs) and current values outside it.
      Store union_nv = task.ts;
      for (const auto& [loc, v] : task.tl_nv.entries()) union_nv.insert(loc, v);
      if (!(redo.nv == union_nv)) d.fail(step, "N_r differs from Ts + Tl_N");
    }
    if (d.report.holds) {
      for (const auto& [loc, v] : task.tl_vol.entries()) {
        if (task.tl_vol_uninit.count(loc)) continue;
        if (!value_equal(redo.vol.at(loc), v)) {
          d.fail(step, "initialized volatile local differs: " + loc.to_string());
          break;
        }
      }
    }
    if (!d.report.holds) return d.report;
  }
  return d.report;
}

}  // namespace imt
