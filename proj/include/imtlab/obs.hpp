#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "imtlab/store.hpp"
#include "imtlab/value.hpp"

namespace imt {

// Events generated by execution: memory reads, input reads, and occurrences
// of reboot and checkpoint. Input observations compare by timestamp.
struct Obs {
  enum class Kind : uint8_t { Read, Input, Reboot, Checkpoint };

  Kind kind = Kind::Read;
  Loc loc;      // Read
  Value value;  // Read
  int64_t tau = 0;  // Input

  static Obs read(const Loc& loc, const Value& v) {
    Obs o;
    o.kind = Kind::Read;
    o.loc = loc;
    o.value = v;
    return o;
  }
  static Obs input(int64_t tau) {
    Obs o;
    o.kind = Kind::Input;
    o.tau = tau;
    return o;
  }
  static Obs reboot() {
    Obs o;
    o.kind = Kind::Reboot;
    return o;
  }
  static Obs checkpoint() {
    Obs o;
    o.kind = Kind::Checkpoint;
    return o;
  }

  std::string to_string() const;
};

bool obs_equal(const Obs& a, const Obs& b);

using ObsSeq = std::vector<Obs>;

bool obs_seq_equal(const ObsSeq& a, const ObsSeq& b);
std::string obs_seq_to_string(const ObsSeq& seq);

// Drop checkpoint (and task-transition, which is normalized to checkpoint)
// markers; used when comparing against continuous observations.
ObsSeq strip_markers(const ObsSeq& seq);

}  // namespace imt
