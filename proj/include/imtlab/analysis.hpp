#pragma once

#include <string>
#include <vector>

#include "imtlab/ast.hpp"

namespace imt {

// One violation per checkpoint region: the first failing instruction plus
// the full set of locations the region's checkpoint set is missing.
struct Violation {
  std::string judgment;       // "WAR" or "RIO"
  std::string region;         // label of the region's origin
  std::string first_instr;    // pretty-printed first failing instruction
  NameSet missing;            // locations that would have to be checkpointed
};

struct CheckResult {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// WAR checking: every non-volatile location read and then written inside a
// region must be write-dominated or in the region's checkpoint set. Task
// programs additionally require the first access to a task-local location
// to be a write; pass the task-local names via `task_locals`.
CheckResult check_war(const Program& p);
CheckResult check_war_command(const Command& c, const NameSet& omega, const DeclInfo& info,
                              const NameSet& task_locals = {}, const std::string& region = "main");
CheckResult check_war(const TaskProgram& p);

// DINO-style WAR collection: fills every checkpoint's omega with the
// region's read-before-write locations (whole arrays on any read/write
// conflict). Existing omega entries are kept; a leading checkpoint is
// inserted when the body does not start with one.
Program collect_war_dino(const Program& p);

// Syntactic must-write set of c starting from M0: non-volatile variables
// assigned on every path up to the next checkpoint; branches intersect,
// array writes never join.
NameSet must_write(const Command& c, const NameSet& m0, const DeclInfo& info);

// RIO checking: input-dependent branches switch to the tainted judgment in
// which every non-volatile variable write must hit must-write or the
// checkpoint set and every non-volatile array write must be checkpointed.
CheckResult check_rio(const Program& p);
CheckResult check_rio_command(const Command& c, const NameSet& omega, const DeclInfo& info,
                              const std::string& region = "main");
CheckResult check_rio(const TaskProgram& p);

// Exclusive may-write collection. With taint optimization only
// input-dependent branches contribute; without it every branch is treated
// as input-dependent (the conservative EMW variant).
Program collect_emw(const Program& p, bool taint_optimized);

enum class Policy { WarOnly, Emw, WarEmwTainted };

const char* policy_name(Policy p);
Policy parse_policy(const std::string& name);

// Union of the selected collectors' omegas per checkpoint; idempotent.
Program instrument(const Program& p, Policy policy);

// Static input-taint tracking along a straight-line instruction sequence:
// threads the input-dependent set I through one instruction (the taint
// component of the RIO instruction judgment). Used to compare dynamic
// against static taint.
NameSet taint_step(const Instr& instr, const NameSet& taint_in);

// Machine-readable analysis summary per checkpoint.
struct RegionReport {
  std::string region;
  NameSet war;           // DINO collection result
  NameSet emw;           // conservative EMW
  NameSet emw_tainted;   // taint-optimized EMW
  NameSet must_write_set;
};

struct AnalysisReport {
  std::vector<RegionReport> regions;
  std::vector<Violation> war_violations;
  std::vector<Violation> rio_violations;
};

AnalysisReport analyze(const Program& p);

}  // namespace imt
