#include "imtlab/store.hpp"

#include <sstream>

namespace imt {

std::string Loc::to_string() const {
  if (!is_cell()) return name;
  return name + "[" + std::to_string(index) + "]";
}

bool Store::contains_name(const std::string& name) const {
  auto it = map_.lower_bound(Loc{name, -1});
  return it != map_.end() && it->first.name == name;
}

const Value& Store::at(const Loc& loc) const {
  auto it = map_.find(loc);
  if (it == map_.end()) throw StoreError("unknown location: " + loc.to_string());
  return it->second;
}

void Store::set(const Loc& loc, const Value& v) {
  auto it = map_.find(loc);
  if (it == map_.end()) throw StoreError("unknown location: " + loc.to_string());
  it->second = v;
}

bool operator==(const Store& a, const Store& b) {
  if (a.map_.size() != b.map_.size()) return false;
  auto ia = a.map_.begin();
  auto ib = b.map_.begin();
  for (; ia != a.map_.end(); ++ia, ++ib) {
    if (!(ia->first == ib->first)) return false;
    if (!value_equal(ia->second, ib->second)) return false;
  }
  return true;
}

Store overwrite(const Store& m1, const Store& m2) {
  Store out = m1;
  for (const auto& [loc, v] : m2.entries()) {
    if (!out.contains(loc)) {
      throw StoreError("overwrite: location outside domain: " + loc.to_string());
    }
    out.set(loc, v);
  }
  return out;
}

LocSet expand(const Store& m, const NameSet& names) {
  LocSet out;
  for (const auto& name : names) {
    bool found = false;
    for (auto it = m.entries().lower_bound(Loc{name, -1});
         it != m.entries().end() && it->first.name == name; ++it) {
      out.insert(it->first);
      found = true;
    }
    if (!found) throw StoreError("unknown location: " + name);
  }
  return out;
}

Store restrict(const Store& m, const NameSet& omega) {
  return restrict_locs(m, expand(m, omega));
}

Store restrict_locs(const Store& m, const LocSet& locs) {
  Store out;
  for (const auto& loc : locs) out.insert(loc, m.at(loc));
  return out;
}

Store reset_volatile(const Store& v, int64_t reset_value) {
  Store out;
  for (const auto& [loc, _] : v.entries()) {
    out.insert(loc, Value::make_int(reset_value));
  }
  return out;
}

LocSet tainted_locs(const Store& m) {
  LocSet out;
  for (const auto& [loc, v] : m.entries()) {
    if (v.tainted) out.insert(loc);
  }
  return out;
}

std::string store_to_string(const Store& m) {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (const auto& [loc, v] : m.entries()) {
    if (!first) os << ", ";
    first = false;
    os << loc.to_string() << "=" << value_to_string(v);
  }
  os << "}";
  return os.str();
}

}  // namespace imt
