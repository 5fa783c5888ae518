#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "imtlab/value.hpp"

namespace imt {

// A memory location: a scalar variable or one array cell. Ordered by name
// then index so store iteration (and trace serialization) is deterministic.
struct Loc {
  std::string name;
  int32_t index = -1;  // -1 for scalars

  bool is_cell() const { return index >= 0; }
  std::string to_string() const;

  friend bool operator<(const Loc& a, const Loc& b) {
    if (a.name != b.name) return a.name < b.name;
    return a.index < b.index;
  }
  friend bool operator==(const Loc& a, const Loc& b) {
    return a.name == b.name && a.index == b.index;
  }
};

// Ordered set of variable names and whole-array names; an array name stands
// for every cell of that array.
using NameSet = std::set<std::string>;

using LocSet = std::set<Loc>;

struct StoreError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Finite map location -> value with a domain fixed at creation time.
class Store {
 public:
  Store() = default;

  void insert(const Loc& loc, const Value& v) { map_[loc] = v; }
  bool contains(const Loc& loc) const { return map_.count(loc) != 0; }
  bool contains_name(const std::string& name) const;
  bool empty() const { return map_.empty(); }
  size_t size() const { return map_.size(); }

  const Value& at(const Loc& loc) const;
  void set(const Loc& loc, const Value& v);

  const std::map<Loc, Value>& entries() const { return map_; }

  friend bool operator==(const Store& a, const Store& b);

 private:
  std::map<Loc, Value> map_;
};

// m1 <| m2: update locations of m1 with the values m2 holds for them.
// Requires dom(m2) subset of dom(m1).
Store overwrite(const Store& m1, const Store& m2);

// Expand a set of names (scalars and whole arrays) to the concrete cells
// present in m. Unknown names raise StoreError.
LocSet expand(const Store& m, const NameSet& names);

// m|omega: the part of m whose domain is the expansion of omega.
Store restrict(const Store& m, const NameSet& omega);
Store restrict_locs(const Store& m, const LocSet& locs);

// reset(V): same domain, every value replaced by the canonical reset value
// (an untainted Int; 0 by default, configurable for sensitivity tests).
Store reset_volatile(const Store& v, int64_t reset_value = 0);

// Locations currently holding tainted values.
LocSet tainted_locs(const Store& m);

std::string store_to_string(const Store& m);

}  // namespace imt
