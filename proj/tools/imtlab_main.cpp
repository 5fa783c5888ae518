// Command-line front end: parse/analyze/instrument/run/verify/bisim/fuzz.
// Exit codes: 0 all checks pass, 1 verdict failures, 2 usage or I/O errors.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "imtlab/harness.hpp"
#include "imtlab/parse.hpp"

namespace {

using namespace imt;
using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

struct ScheduleFlags {
  std::string inline_spec;  // "empty" or "step:dur[:ok],..."
  std::string file;
  uint64_t seed = 0;
  bool seed_set = false;
  double rate = 0.5;
};

FailureSchedule resolve_schedule(const ScheduleFlags& flags, const Program& p,
                                 const InputOracle& oracle) {
  if (!flags.file.empty()) {
    if (flags.seed_set || !flags.inline_spec.empty()) {
      std::cerr << "warning: --schedule-file overrides other schedule flags\n";
    }
    return schedule_from_json(read_file(flags.file));
  }
  if (!flags.inline_spec.empty()) {
    FailureSchedule out;
    if (flags.inline_spec == "empty") return out;
    std::stringstream ss(flags.inline_spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
      FailureEvent ev;
      size_t c1 = item.find(':');
      if (c1 == std::string::npos) throw std::runtime_error("bad schedule entry: " + item);
      ev.at_step = std::stoll(item.substr(0, c1));
      std::string rest = item.substr(c1 + 1);
      size_t c2 = rest.find(':');
      if (c2 == std::string::npos) {
        ev.off_duration = std::stoll(rest);
      } else {
        ev.off_duration = std::stoll(rest.substr(0, c2));
        ev.checkpoint_succeeds = rest.substr(c2 + 1) != "fail";
      }
      out.events.push_back(ev);
    }
    return out;
  }
  if (flags.seed_set) {
    DryRunInfo dry = dry_run(p, oracle);
    return gen_schedule(dry.steps, flags.seed, flags.rate, dry.checkpoint_steps);
  }
  return FailureSchedule{};
}

json violations_to_json(const std::vector<Violation>& violations) {
  json arr = json::array();
  for (const auto& v : violations) {
    json e;
    e["judgment"] = v.judgment;
    e["region"] = v.region;
    e["instr"] = v.first_instr;
    e["missing"] = std::vector<std::string>(v.missing.begin(), v.missing.end());
    arr.push_back(e);
  }
  return arr;
}

int cmd_parse(const std::string& path) {
  std::string text = read_file(path);
  if (looks_like_task_program(text)) {
    TaskProgram p = parse_tasks(text);
    std::cout << task_program_to_string(p);
  } else {
    Program p = parse(text);
    std::cout << program_to_string(p);
  }
  return 0;
}

int cmd_analyze(const std::string& path, const std::string& out_path) {
  std::string text = read_file(path);
  json j;
  if (looks_like_task_program(text)) {
    TaskProgram p = parse_tasks(text);
    j["war_violations"] = violations_to_json(check_war(p).violations);
    j["rio_violations"] = violations_to_json(check_rio(p).violations);
    json regions = json::array();
    DeclInfo info = decl_info(p);
    for (const auto& t : p.tasks) {
      json r;
      r["region"] = "task" + std::to_string(t.id);
      r["omega"] = std::vector<std::string>(t.omega.begin(), t.omega.end());
      NameSet mw = must_write(*t.body, {}, info);
      r["must_write"] = std::vector<std::string>(mw.begin(), mw.end());
      regions.push_back(r);
    }
    j["regions"] = regions;
  } else {
    Program p = parse(text);
    AnalysisReport report = analyze(p);
    json regions = json::array();
    for (const auto& r : report.regions) {
      json e;
      e["region"] = r.region;
      e["war"] = std::vector<std::string>(r.war.begin(), r.war.end());
      e["emw"] = std::vector<std::string>(r.emw.begin(), r.emw.end());
      e["emw_tainted"] =
          std::vector<std::string>(r.emw_tainted.begin(), r.emw_tainted.end());
      e["must_write"] =
          std::vector<std::string>(r.must_write_set.begin(), r.must_write_set.end());
      regions.push_back(e);
    }
    j["regions"] = regions;
    j["war_violations"] = violations_to_json(report.war_violations);
    j["rio_violations"] = violations_to_json(report.rio_violations);
  }
  std::string out = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << out;
  } else {
    write_file(out_path, out);
  }
  return 0;
}

int cmd_instrument(const std::string& path, const std::string& policy,
                   const std::string& out_path) {
  Program p = parse(read_file(path));
  Program instrumented = instrument(p, parse_policy(policy));
  std::string out = program_to_string(instrumented);
  if (out_path.empty()) {
    std::cout << out;
  } else {
    write_file(out_path, out);
  }
  return 0;
}

int cmd_translate(const std::string& path, const std::string& out_path) {
  TaskProgram p = parse_tasks(read_file(path));
  std::string out = program_to_string(translate_tasks(p));
  if (out_path.empty()) {
    std::cout << out;
  } else {
    write_file(out_path, out);
  }
  return 0;
}

int cmd_run(const std::string& path, const std::string& model, const ScheduleFlags& sched,
            uint64_t oracle_seed, const std::string& oracle_file,
            const std::string& out_path, int64_t fuel) {
  std::string text = read_file(path);
  InputOracle oracle =
      oracle_file.empty() ? gen_oracle(oracle_seed) : oracle_from_json(read_file(oracle_file));

  if (model == "task") {
    TaskProgram p = parse_tasks(text);
    FailureSchedule schedule;
    if (!sched.file.empty()) {
      schedule = schedule_from_json(read_file(sched.file));
    } else if (!sched.inline_spec.empty() && sched.inline_spec != "empty") {
      ScheduleFlags inline_only = sched;
      inline_only.seed_set = false;
      Program unused;
      schedule = resolve_schedule(inline_only, unused, oracle);
    } else if (sched.seed_set) {
      auto dry = run_task(p, oracle, FailureSchedule{}, fuel);
      schedule = gen_schedule(dry.steps, sched.seed, sched.rate);
    }
    auto run = run_task(p, oracle, schedule, fuel);
    std::cout << "status=" << (run.status == RunStatus::Done ? "done" : "stopped")
              << " steps=" << run.steps << "\n";
    std::cout << "obs: " << obs_seq_to_string(run.obs) << "\n";
    std::cout << "nv: " << store_to_string(task_effective_nv(run.final)) << "\n";
    return 0;
  }

  Program p = parse(text);
  FailureSchedule schedule = resolve_schedule(sched, p, oracle);

  if (model == "basic") {
    IntRun run = run_int(p, oracle, schedule, fuel);
    std::ostringstream os;
    write_basic_trace(os, p, oracle, schedule, run.trace);
    if (out_path.empty()) {
      std::cout << os.str();
    } else {
      write_file(out_path, os.str());
    }
    return 0;
  }

  ObsSeq obs;
  Store final_nv;
  std::string status = "done";
  if (model == "continuous") {
    ContRun run = run_cont(p, oracle, fuel);
    obs = run.obs;
    final_nv = run.final.nv;
  } else if (model == "undo") {
    auto run = run_undo(p, oracle, schedule, fuel);
    obs = run.obs;
    final_nv = run.final.nv;
    if (run.status != RunStatus::Done) status = "stopped";
  } else if (model == "redo") {
    auto run = run_redo(p, oracle, schedule, fuel);
    obs = run.obs;
    final_nv = redo_effective_nv(run.final);
    if (run.status != RunStatus::Done) status = "stopped";
  } else if (model == "jit") {
    auto run = run_jit(p, oracle, schedule, fuel);
    obs = run.obs;
    final_nv = run.final.nv;
    if (run.status != RunStatus::Done) status = "stopped";
  } else {
    throw std::runtime_error("unknown model '" + model + "'");
  }
  std::cout << "status=" << status << "\n";
  std::cout << "obs: " << obs_seq_to_string(obs) << "\n";
  std::cout << "nv: " << store_to_string(final_nv) << "\n";
  return 0;
}

int cmd_verify(const std::string& trace_path, int64_t fuel) {
  std::ifstream in(trace_path);
  if (!in) throw std::runtime_error("cannot open " + trace_path);
  TraceFile tf = read_trace_file(in);
  Program p = parse(tf.program_text);
  IntRun run = run_int(p, tf.oracle, tf.schedule, fuel);
  // Cross-check the replay against the recorded step lines.
  std::ostringstream os;
  write_basic_trace(os, p, tf.oracle, tf.schedule, run.trace);
  {
    std::istringstream replayed(os.str());
    TraceFile check = read_trace_file(replayed);
    if (check.step_lines != tf.step_lines) {
      std::cerr << "replay mismatch: trace file does not match deterministic replay\n";
      return 1;
    }
  }
  if (run.status != RunStatus::Done) {
    std::cerr << "trace is not terminal; cannot check correspondence\n";
    return 1;
  }
  CorrespondenceResult corr = check_correspondence(p, run.trace, tf.oracle, fuel);
  if (corr.report.holds) {
    std::cout << "correspondence holds (tau2=" << corr.tau2 << ")\n";
    return 0;
  }
  std::cout << "correspondence FAILS: " << corr.report.witness << "\n";
  return 1;
}

int cmd_bisim(const std::string& path, const std::string& pair, const ScheduleFlags& sched,
              uint64_t oracle_seed, int64_t fuel) {
  std::string text = read_file(path);
  InputOracle oracle = gen_oracle(oracle_seed);
  RelationReport report;
  if (pair == "redo-task") {
    TaskProgram p = parse_tasks(text);
    ScheduleFlags flags = sched;
    Program dummy;
    FailureSchedule schedule = resolve_schedule(flags, dummy, oracle);
    report = bisim_redo_task(p, oracle, schedule, fuel);
  } else {
    Program p = parse(text);
    FailureSchedule schedule = resolve_schedule(sched, p, oracle);
    BisimPair bp;
    if (pair == "basic-undo") {
      bp = BisimPair::BasicUndo;
    } else if (pair == "basic-redo") {
      bp = BisimPair::BasicRedo;
    } else {
      throw std::runtime_error("unknown pair '" + pair + "'");
    }
    report = bisim_lockstep(p, bp, oracle, schedule, fuel);
  }
  if (report.holds) {
    std::cout << "bisimulation holds\n";
    return 0;
  }
  std::cout << "bisimulation FAILS at step " << report.divergence_index << ": "
            << report.witness << "\n";
  return 1;
}

int cmd_fuzz(int cases, const std::string& policy, uint64_t seed, double rate,
             int schedules, const std::string& out_path) {
  CampaignOptions opts;
  opts.policy = parse_policy(policy);
  opts.cases = cases;
  opts.gen.seed = seed;
  opts.failure_rate = rate;
  opts.schedules_per_case = schedules;
  auto t0 = std::chrono::steady_clock::now();
  CampaignReport report = run_campaign(opts);
  auto t1 = std::chrono::steady_clock::now();
  std::cerr << "campaign took "
            << std::chrono::duration<double>(t1 - t0).count() << "s\n";
  std::string out = campaign_report_to_json(report) + "\n";
  if (out_path.empty()) {
    std::cout << out;
  } else {
    write_file(out_path, out);
    std::cout << "total=" << report.total << " passed=" << report.passed
              << " failed=" << report.failed << " capped=" << report.capped << "\n";
  }
  return report.failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"intermittent-computing laboratory"};
  app.require_subcommand(1);

  std::string input, output, model = "basic", policy = "war+emw-tainted";
  std::string pair = "basic-undo";
  ScheduleFlags sched;
  uint64_t oracle_seed = 0;
  std::string oracle_file;
  int64_t fuel = 200000;
  int cases = 100, schedules = 5;
  double rate = 0.5;
  uint64_t seed = 1;

  auto* parse_cmd = app.add_subcommand("parse", "parse and pretty-print a program");
  parse_cmd->add_option("input", input)->required();

  auto* analyze_cmd = app.add_subcommand("analyze", "emit the analysis report");
  analyze_cmd->add_option("input", input)->required();
  analyze_cmd->add_option("-o,--output", output);

  auto* instr_cmd = app.add_subcommand("instrument", "fill checkpoint sets");
  instr_cmd->add_option("input", input)->required();
  instr_cmd->add_option("--policy", policy)->capture_default_str();
  instr_cmd->add_option("-o,--output", output);

  auto* translate_cmd = app.add_subcommand("translate", "task program to labeled checkpoints");
  translate_cmd->add_option("input", input)->required();
  translate_cmd->add_option("-o,--output", output);

  auto* run_cmd = app.add_subcommand("run", "execute under a model, emit trace");
  run_cmd->add_option("input", input)->required();
  run_cmd->add_option("--model", model)->capture_default_str();
  run_cmd->add_option("--schedule", sched.inline_spec);
  run_cmd->add_option("--schedule-file", sched.file);
  run_cmd->add_option("--schedule-seed", sched.seed)->trigger_on_parse();
  run_cmd->add_option("--failure-rate", sched.rate);
  run_cmd->add_option("--oracle-seed", oracle_seed);
  run_cmd->add_option("--oracle-file", oracle_file);
  run_cmd->add_option("-o,--output", output);
  run_cmd->add_option("--fuel", fuel);

  auto* verify_cmd = app.add_subcommand("verify", "check correspondence on a trace");
  verify_cmd->add_option("input", input)->required();
  verify_cmd->add_option("--fuel", fuel);

  auto* bisim_cmd = app.add_subcommand("bisim", "lockstep bisimulation check");
  bisim_cmd->add_option("input", input)->required();
  bisim_cmd->add_option("--pair", pair)->capture_default_str();
  bisim_cmd->add_option("--schedule", sched.inline_spec);
  bisim_cmd->add_option("--schedule-file", sched.file);
  bisim_cmd->add_option("--oracle-seed", oracle_seed);
  bisim_cmd->add_option("--fuel", fuel);

  auto* fuzz_cmd = app.add_subcommand("fuzz", "random differential campaign");
  fuzz_cmd->add_option("--cases", cases)->capture_default_str();
  fuzz_cmd->add_option("--policy", policy)->capture_default_str();
  fuzz_cmd->add_option("--seed", seed)->capture_default_str();
  fuzz_cmd->add_option("--failure-rate", rate)->capture_default_str();
  fuzz_cmd->add_option("--schedules", schedules)->capture_default_str();
  fuzz_cmd->add_option("-o,--output", output);

  CLI11_PARSE(app, argc, argv);

  try {
    if (parse_cmd->parsed()) return cmd_parse(input);
    if (analyze_cmd->parsed()) return cmd_analyze(input, output);
    if (instr_cmd->parsed()) return cmd_instrument(input, policy, output);
    if (translate_cmd->parsed()) return cmd_translate(input, output);
    if (run_cmd->parsed()) {
      sched.seed_set = run_cmd->count("--schedule-seed") > 0;
      return cmd_run(input, model, sched, oracle_seed, oracle_file, output, fuel);
    }
    if (verify_cmd->parsed()) return cmd_verify(input, fuel);
    if (bisim_cmd->parsed()) return cmd_bisim(input, pair, sched, oracle_seed, fuel);
    if (fuzz_cmd->parsed()) return cmd_fuzz(cases, policy, seed, rate, schedules, output);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
