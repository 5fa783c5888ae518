#include "imtlab/value.hpp"

namespace imt {

bool value_equal(const Value& a, const Value& b) {
  if (a.kind == Value::Kind::Input || b.kind == Value::Kind::Input) {
    if (a.kind != b.kind) return false;
    return a.tau == b.tau;
  }
  if (a.kind != b.kind) return false;
  return a.num == b.num;
}

std::string value_to_string(const Value& v) {
  std::string s;
  switch (v.kind) {
    case Value::Kind::Int:
      s = std::to_string(v.num);
      break;
    case Value::Kind::Bool:
      s = v.num ? "true" : "false";
      break;
    case Value::Kind::Input:
      s = "in(" + std::to_string(v.tau) + ")=" + std::to_string(v.num);
      break;
  }
  if (v.tainted) s += "^t";
  return s;
}

}  // namespace imt
