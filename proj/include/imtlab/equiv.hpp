#pragma once

#include <optional>
#include <string>

#include "imtlab/analysis.hpp"
#include "imtlab/sem_intermittent.hpp"
#include "imtlab/variants.hpp"

namespace imt {

// --- observation-prefix relations ------------------------------------------

// O1 <=m O2: everything up to O1's final reboot is discarded; the remaining
// suffix must equal O2. Pre: O1 has no checkpoint markers, O2 has neither
// reboot nor checkpoint markers.
bool obs_leq_m(const ObsSeq& o1, const ObsSeq& o2);

// O1 <=cm O2: split O1 at checkpoint markers and match each segment against
// consecutive slices of O2 via <=m. Segments are deterministic given their
// inputs, so matching slice-by-length is exact.
bool obs_leq_cm(const ObsSeq& o1, const ObsSeq& o2);

// --- brute-force trace sets (runof, Wt, FstWt, MstWt, MFstWt) ---------------

struct BruteForceOptions {
  std::vector<int64_t> domain = {0, 2};  // per dynamic IN() occurrence
  int64_t max_traces = 4096;             // explicit size guard
  int64_t fuel = 100000;
};

struct RegionTrace {
  std::vector<int64_t> inputs;  // the feed that produced this trace
  LocSet writes;                // Wt(T), non-volatile
  LocSet first_writes;          // FstWt(T): first access is a write
  ContConfig final;
};

// All traces from (nv, vol, c) to the nearest checkpoint (or terminal),
// enumerating input feeds over the domain. Throws EvalError when the
// enumeration exceeds max_traces.
std::vector<RegionTrace> enumerate_region_traces(const ContConfig& start,
                                                 const BruteForceOptions& opts,
                                                 const CodeContext& ctx = {});

// Locations written on every feed (MstWt) / first-written on every feed
// (MFstWt), computed by exhaustive enumeration.
LocSet mst_wt(const ContConfig& start, const BruteForceOptions& opts,
              const CodeContext& ctx = {});
LocSet mfst_wt(const ContConfig& start, const BruteForceOptions& opts,
               const CodeContext& ctx = {});

// --- memory relation predicates (diagnostic, small instances only) ----------

// Related memories between current and initial execution point: every
// differing location is checkpointed or must-first-written from the region
// start.
bool relation_initial_point(const Store& n_int, const Store& n_cont, const LocSet& ckpt_dom,
                            const ContConfig& region_start, const BruteForceOptions& opts);

// Related memories at the same execution point: every differing location is
// must-first-written for the whole region, must-written from the current
// point on, and unwritten on the concrete trace from the region start to
// the current point (replayed from the recorded input feed).
bool relation_same_point(const Store& n_int, const Store& n_cont,
                         const ContConfig& region_start, const std::vector<int64_t>& inputs,
                         const ContConfig& current, const BruteForceOptions& opts);

// --- Def. 4.1 correspondence -------------------------------------------------

struct RelationReport {
  bool holds = true;
  int64_t divergence_index = -1;  // index into the compared sequence
  std::string witness;            // human-readable description
  NameSet witness_locs;           // locations blamed for the divergence
};

struct CorrespondenceResult {
  RelationReport report;
  int64_t tau2 = 0;       // chosen continuous start time
  ObsSeq continuous_obs;  // markers stripped
  ContConfig continuous_final;
};

// Checks that a terminal intermittent trace corresponds to a continuous
// execution: synthesizes the witness run (same oracle, sleeps aligning each
// region's final attempt), then checks obs_leq_cm and erased-configuration
// equality.
CorrespondenceResult check_correspondence(const Program& p, const Trace& trace,
                                          const InputOracle& oracle, int64_t fuel = 100000);

// --- lockstep bisimulation ----------------------------------------------------

enum class BisimPair { BasicUndo, BasicRedo, RedoTask };

const char* bisim_pair_name(BisimPair pair);

RelationReport bisim_lockstep(const Program& p, BisimPair pair, const InputOracle& oracle,
                              const FailureSchedule& schedule, int64_t fuel = 100000);

// redo<->task: the redo side runs the translated program; a toTask step is
// matched against the goto+checkpoint pair on the redo side.
RelationReport bisim_redo_task(const TaskProgram& p, const InputOracle& oracle,
                               const FailureSchedule& schedule, int64_t fuel = 100000);

}  // namespace imt
