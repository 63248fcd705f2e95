#include <doctest.h>

#include "fixtures.hpp"

using namespace erasure;

TEST_CASE("violation depends on insertion order") {
  auto late_city = fixtures::area_code(true);
  auto res = dep_inst(late_city.store.current(), late_city.rules, late_city.area);
  CHECK(res.t_b == 2);
  REQUIRE(res.rules.size() == 1);
  CHECK(violates_p2e2(res.rules[0], 2));

  auto early_city = fixtures::area_code(false);
  res = dep_inst(early_city.store.current(), early_city.rules, early_city.area);
  CHECK(res.t_b == 3);
  CHECK(res.rules.empty());
  CHECK(res.expanded.size() == 1);
}

TEST_CASE("traversal reaches exactly the dependency set") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    auto w = fixtures::random_workload(seed, 200);
    StateView now = w.store.current();
    for (const auto& t : w.targets) {
      auto res = dep_inst(now, w.rules, t);
      auto oracle = dep_set_oracle(t, now, w.rules);
      CHECK(res.expanded == oracle);
      for (const auto& d : res.rules) CHECK(violates_p2e2(d, res.t_b));
    }
  }
}

TEST_CASE("erasing cells can only shrink a dependency set") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto w = fixtures::random_workload(seed, 200);
    StateView now = w.store.current();
    for (const auto& t : w.targets) {
      auto full = dep_set_oracle(t, now, w.rules);
      for (const auto& d : full) {
        if (d.tail.front() == t) continue;
        std::pair<CellRef, Value> o{d.tail.front(), Value::null()};
        auto less = dep_set_oracle(t, now.with_values(std::span(&o, 1)), w.rules);
        CHECK(std::includes(full.begin(), full.end(), less.begin(), less.end()));
        break;
      }
    }
  }
}

TEST_CASE("the oracle accepts sufficient and rejects insufficient deletions") {
  auto ex = fixtures::area_code(true);
  StateView now = ex.store.current();
  DeletionSet only_target{{ex.area}};
  DeletionSet both{{ex.city, ex.area}};
  CHECK_FALSE(fixtures::erased_ok(now, ex.rules, ex.store, ex.area, only_target));
  CHECK(fixtures::erased_ok(now, ex.rules, ex.store, ex.area, both));

  auto early = fixtures::area_code(false);
  CHECK(fixtures::erased_ok(early.store.current(), early.rules, early.store, early.area, {{early.area}}));
}

TEST_CASE("the expander caches and counts") {
  auto s = fixtures::social_example();
  RuleExpander ex(s.store.current(), s.rules);
  CellRef likes{"Posts", 1, "pLikes"};
  const auto& first = ex.as_tail(likes);
  std::size_t evals = ex.evaluations();
  const auto& second = ex.as_tail(likes);
  CHECK(&first == &second);
  CHECK(ex.evaluations() == evals);
  REQUIRE(first.size() == 1);
  CHECK(first[0].head == CellRef{"Statistics", 1, "totLikes"});
  CHECK(ex.instantiated_rules() == 1);
  CHECK(ex.instantiated_cells() == 2);
}
