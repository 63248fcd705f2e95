#include <doctest.h>

#include "fixtures.hpp"

using namespace erasure;

TEST_CASE("indexed evaluation agrees with the nested loop oracle") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto w = fixtures::random_workload(seed, 200);
    StateView now = w.store.current();
    for (const auto& r : fixtures::rule_pool(*w.schema)) {
      auto fast = query::evaluate(r.condition, now);
      auto slow = query::evaluate_naive(r.condition, now);
      REQUIRE(fast.size() == slow.size());
      for (std::size_t i = 0; i < fast.size(); ++i) {
        CHECK(fast[i].rids == slow[i].rids);
        CHECK(fast[i].witness == slow[i].witness);
      }
    }
  }
}

TEST_CASE("a pinned variable filters the full result") {
  auto w = fixtures::random_workload(11, 200);
  StateView now = w.store.current();
  for (const auto& r : fixtures::rule_pool(*w.schema)) {
    auto all = query::evaluate(r.condition, now);
    for (RecordId rid = 1; rid <= 3; ++rid) {
      auto pinned = query::evaluate(r.condition, now, query::Pin{0, rid});
      std::vector<query::Binding> want;
      for (const auto& b : all)
        if (b.rids[0] == rid) want.push_back(b);
      CHECK(pinned == want);
    }
  }
}

TEST_CASE("witness is the latest change the binding depends on") {
  auto ex = fixtures::area_code(false);
  auto b = query::evaluate(ex.rules[0].condition, ex.store.current());
  REQUIRE(b.size() == 1);
  CHECK(b[0].witness == 2);  // City inserted at 2
  ex.store.update_cell(7, ex.city, "Irvine");
  b = query::evaluate(ex.rules[0].condition, ex.store.current());
  CHECK(b[0].witness == 7);
}

TEST_CASE("a row leaving an aggregate group moves the group witness") {
  auto schema = fixtures::random_schema();
  Store st(schema);
  st.insert_record(1, "A", 1, {{"k", 1}, {"a2", 5}, {"w", 2}});
  st.insert_record(1, "A", 2, {{"k", 1}, {"a2", 5}, {"w", 4}});
  st.insert_record(1, "B", 1, {{"k", 1}, {"b1", 3}});
  auto pool = fixtures::rule_pool(*schema);
  const RDR* p6 = nullptr;
  for (const auto& r : pool)
    if (r.id == "P6") p6 = &r;
  REQUIRE(p6);
  auto before = instantiate_all(*p6, st.current());
  REQUIRE(before.size() == 1);
  CHECK(before[0].tail[0] == CellRef{"A", 2, "a2"});
  st.update_cell(5, {"A", 2, "k"}, 3);  // record 2 moves to another group
  auto now = instantiate_all(*p6, st.current());
  REQUIRE(now.size() == 1);
  CHECK(now[0].tail[0] == CellRef{"A", 1, "a2"});
  CHECK(now[0].witness >= 5);
}

TEST_CASE("malformed conditions are rejected") {
  auto schema = fixtures::random_schema();
  CHECK_THROWS_AS(make_rdr("x", "a1(X) <- a2(X)", "SELECT X.rid AS X FROM Nope X", *schema), Error);
  CHECK_THROWS_AS(make_rdr("x", "a1(X) <- a2(X)", "SELECT X.rid AS X FROM A X WHERE X.zz = 1", *schema), Error);
  CHECK_THROWS_AS(make_rdr("x", "a1(X) <- a2(Y)", "SELECT X.rid AS X FROM A X", *schema), Error);
  CHECK_THROWS(make_rdr("x", "a1(X) <- ", "SELECT X.rid AS X FROM A X", *schema));
}
