#include <doctest.h>

#include "imtlab/oracle.hpp"
#include "imtlab/store.hpp"

using namespace imt;

namespace {

Store make_store(std::initializer_list<std::pair<const char*, int64_t>> entries) {
  Store s;
  for (const auto& [name, v] : entries) s.insert(Loc{name, -1}, Value::make_int(v));
  return s;
}

Store random_store(Rng& rng, const std::vector<std::string>& names) {
  Store s;
  for (const auto& n : names) s.insert(Loc{n, -1}, Value::make_int(rng.range(0, 9)));
  return s;
}

// Independent oracle: update via an explicit loop over all locations.
Store overwrite_naive(const Store& m1, const Store& m2) {
  Store out;
  for (const auto& [loc, v] : m1.entries()) {
    out.insert(loc, m2.contains(loc) ? m2.at(loc) : v);
  }
  return out;
}

}  // namespace

TEST_CASE("overwrite basics") {
  Store m = make_store({{"x", 1}, {"y", 2}});
  CHECK(overwrite(m, Store{}) == m);
  Store upd = make_store({{"y", 5}});
  CHECK(overwrite(m, upd) == make_store({{"x", 1}, {"y", 5}}));

  Store bad = make_store({{"q", 0}});
  CHECK_THROWS_AS(overwrite(m, bad), StoreError);
}

TEST_CASE("overwrite agrees with the naive loop oracle") {
  Rng rng(42);
  std::vector<std::string> names = {"a", "b", "c", "d", "e"};
  for (int round = 0; round < 100; ++round) {
    Store base = random_store(rng, names);
    std::vector<std::string> subset;
    for (const auto& n : names) {
      if (rng.chance(0.5)) subset.push_back(n);
    }
    Store upd = random_store(rng, subset);
    CHECK(overwrite(base, upd) == overwrite_naive(base, upd));
  }
}

TEST_CASE("restrict") {
  CHECK(restrict(make_store({{"x", 1}}), NameSet{}).empty());

  Store m = make_store({{"w", 4}, {"y", 0}, {"z", 3}, {"x", 7}});
  Store r = restrict(m, NameSet{"w", "y", "z"});
  CHECK(r.size() == 3);
  CHECK(value_equal(r.at(Loc{"w", -1}), Value::make_int(4)));
  CHECK(!r.contains(Loc{"x", -1}));

  Store with_array;
  for (int i = 0; i < 4; ++i) with_array.insert(Loc{"a", i}, Value::make_int(i));
  with_array.insert(Loc{"x", -1}, Value::make_int(9));
  Store ra = restrict(with_array, NameSet{"a"});
  CHECK(ra.size() == 4);

  CHECK_THROWS_AS(restrict(m, NameSet{"nope"}), StoreError);
}

TEST_CASE("reset_volatile") {
  Store v = make_store({{"v", 9}});
  Store r = reset_volatile(v);
  CHECK(value_equal(r.at(Loc{"v", -1}), Value::make_int(0)));
  CHECK(reset_volatile(r) == r);  // idempotent

  Store alt = reset_volatile(v, 7);
  CHECK(value_equal(alt.at(Loc{"v", -1}), Value::make_int(7)));
}

TEST_CASE("overwrite is associative when update domains coincide") {
  Rng rng(99);
  std::vector<std::string> names = {"a", "b", "c", "d"};
  for (int round = 0; round < 100; ++round) {
    Store m = random_store(rng, names);
    std::vector<std::string> subset;
    for (const auto& n : names) {
      if (rng.chance(0.6)) subset.push_back(n);
    }
    Store u1 = random_store(rng, subset);
    Store u2 = random_store(rng, subset);
    CHECK(overwrite(overwrite(m, u1), u2) == overwrite(m, overwrite(u1, u2)));
  }
}

TEST_CASE("restrict after overwrite recovers the update") {
  Rng rng(7);
  std::vector<std::string> names = {"a", "b", "c", "d", "e"};
  for (int round = 0; round < 100; ++round) {
    Store m = random_store(rng, names);
    std::vector<std::string> subset;
    NameSet subset_names;
    for (const auto& n : names) {
      if (rng.chance(0.5)) {
        subset.push_back(n);
        subset_names.insert(n);
      }
    }
    Store u = random_store(rng, subset);
    CHECK(restrict(overwrite(m, u), subset_names) == u);
  }
}

TEST_CASE("values compare by timestamp for inputs and magnitude otherwise") {
  CHECK(value_equal(Value::make_input(3, 0), Value::make_input(3, 0)));
  CHECK(!value_equal(Value::make_input(3, 0), Value::make_input(4, 0)));
  CHECK(value_equal(Value::make_int(2, true), Value::make_int(2, false)));
  CHECK(!value_equal(Value::make_int(2), Value::make_bool(true)));
  CHECK(value_to_string(Value::make_input(9, 2)) == "in(9)=2^t");
}
