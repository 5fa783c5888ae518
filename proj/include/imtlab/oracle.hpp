#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace imt {

// Deterministic hash used everywhere randomness must replay bit-exactly
// across runs and platforms.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d4ecb9aae1edebULL;
  return x ^ (x >> 31);
}

// Small deterministic PRNG (std distributions are not portable).
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(splitmix64(seed ^ 0x5bf03635fbdd3a7bULL)) {}

  uint64_t next() {
    state_ = splitmix64(state_);
    return state_;
  }

  // Uniform in [0, bound).
  uint64_t below(uint64_t bound) { return bound == 0 ? 0 : next() % bound; }

  int64_t range(int64_t lo, int64_t hi) {  // inclusive
    return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo + 1)));
  }

  bool chance(double p) {
    return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0) < p;
  }

 private:
  uint64_t state_;
};

// Total function timestamp -> input magnitude: a seeded base function over a
// value domain plus explicit per-timestamp overrides (golden scenarios).
struct InputOracle {
  uint64_t seed = 0;
  std::vector<int64_t> domain = {0, 2};
  std::map<int64_t, int64_t> overrides;

  int64_t operator()(int64_t tau) const {
    auto it = overrides.find(tau);
    if (it != overrides.end()) return it->second;
    if (domain.empty()) return 0;
    uint64_t h = splitmix64(seed ^ splitmix64(static_cast<uint64_t>(tau)));
    return domain[h % domain.size()];
  }
};

// One scheduled power event. For checkpointed models only `off_duration`
// matters; the JIT model also consults `checkpoint_succeeds`.
struct FailureEvent {
  int64_t at_step = 0;       // interpreter step index at which power fails
  int64_t off_duration = 1;  // n >= 1 passed to reboot(n)
  bool checkpoint_succeeds = true;  // JIT only
};

struct FailureSchedule {
  std::vector<FailureEvent> events;  // strictly increasing at_step

  bool empty() const { return events.empty(); }
};

}  // namespace imt
