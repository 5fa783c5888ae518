#include "imtlab/obs.hpp"

#include <sstream>

namespace imt {

std::string Obs::to_string() const {
  switch (kind) {
    case Kind::Read:
      return "rd " + loc.to_string() + " " + value_to_string(value);
    case Kind::Input:
      return "in(" + std::to_string(tau) + ")";
    case Kind::Reboot:
      return "reboot";
    case Kind::Checkpoint:
      return "checkpoint";
  }
  return "?";
}

bool obs_equal(const Obs& a, const Obs& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Obs::Kind::Read:
      return a.loc == b.loc && value_equal(a.value, b.value);
    case Obs::Kind::Input:
      return a.tau == b.tau;
    default:
      return true;
  }
}

bool obs_seq_equal(const ObsSeq& a, const ObsSeq& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (!obs_equal(a[i], b[i])) return false;
  }
  return true;
}

std::string obs_seq_to_string(const ObsSeq& seq) {
  std::ostringstream os;
  bool first = true;
  for (const auto& o : seq) {
    if (!first) os << ", ";
    first = false;
    os << o.to_string();
  }
  return os.str();
}

ObsSeq strip_markers(const ObsSeq& seq) {
  ObsSeq out;
  for (const auto& o : seq) {
    if (o.kind != Obs::Kind::Checkpoint) out.push_back(o);
  }
  return out;
}

}  // namespace imt
