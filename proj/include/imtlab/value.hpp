#pragma once

#include <cstdint>
#include <string>

namespace imt {

// Runtime values. Inputs carry the logical time of the IN() that produced
// them plus the magnitude the oracle returned for that time; arithmetic and
// comparisons use the magnitude, while observation equality for inputs is
// by timestamp only.
struct Value {
  enum class Kind : uint8_t { Int, Bool, Input };

  Kind kind = Kind::Int;
  int64_t num = 0;   // magnitude (Int/Input) or 0/1 (Bool)
  int64_t tau = 0;   // Input only
  bool tainted = false;

  static Value make_int(int64_t n, bool t = false) { return Value{Kind::Int, n, 0, t}; }
  static Value make_bool(bool b, bool t = false) { return Value{Kind::Bool, b ? 1 : 0, 0, t}; }
  static Value make_input(int64_t tau, int64_t magnitude) {
    return Value{Kind::Input, magnitude, tau, true};
  }

  bool is_bool() const { return kind == Kind::Bool; }
  bool is_numeric() const { return kind != Kind::Bool; }
  bool truthy() const { return num != 0; }
};

// Equality used by observation and store comparison: inputs compare by
// timestamp (the same in(tau) always denotes the same reading), other
// values by magnitude. Taint flags are ignored.
bool value_equal(const Value& a, const Value& b);

// Render as source/trace text: "4", "true", "in(9)=2", with "^t" suffix
// when tainted.
std::string value_to_string(const Value& v);

}  // namespace imt
