#include <doctest.h>

#include "fixtures.hpp"

using namespace erasure;

namespace {

// R(a, b, c) with b <- a and c <- b on every record, inserted c, b, a.
struct Chain {
  SchemaPtr schema;
  std::vector<RDR> rules;
  Store store;
};

Chain chain() {
  auto schema = Schema::from_json(nlohmann::json::parse(R"({"relations": [
    {"name": "R", "attributes": ["a", "b", "c"]}]})"));
  auto rules = parse_rules(
      "rule B\ndependence: b(X) <- a(X)\ncondition: SELECT X.rid AS X FROM R X\n\n"
      "rule C\ndependence: c(X) <- b(X)\ncondition: SELECT X.rid AS X FROM R X\n",
      *schema);
  Store st(schema);
  st.insert_record(1, "R", 1);
  st.insert_cell(2, {"R", 1, "c"}, 1);
  st.insert_cell(3, {"R", 1, "b"}, 1);
  st.insert_cell(4, {"R", 1, "a"}, 1);
  return {schema, std::move(rules), std::move(st)};
}

}  // namespace

TEST_CASE("a batch of one is the single-erasure path") {
  auto s = fixtures::social_example();
  StateView now = s.store.current();
  for (auto alg : {Algorithm::Ilp, Algorithm::Hgr, Algorithm::Apx, Algorithm::BaselineMinSet}) {
    CellRef t{"Posts", 4, "pLoc"};
    auto one = erase_one(t, now, s.rules, {alg});
    auto batch = batch_erase({make_request(t, 10)}, now, s.rules, {alg});
    CHECK(batch.deletion.cells == one.deletion.cells);
    CHECK(batch.instantiated_cells == one.instantiated_cells);
  }
}

TEST_CASE("targets on a shared rule share instantiation work") {
  auto c = chain();
  StateView now = c.store.current();
  CellRef a{"R", 1, "a"}, b{"R", 1, "b"};
  auto ra = erase_one(a, now, c.rules), rb = erase_one(b, now, c.rules);
  auto both = batch_erase({make_request(b, 5), make_request(a, 6)}, now, c.rules);
  CHECK(both.instantiated_cells < ra.instantiated_cells + rb.instantiated_cells);
  CHECK(both.deletion.contains(a));
  CHECK(both.deletion.contains(b));
  for (const auto& t : both.targets) CHECK(fixtures::erased_ok(now, c.rules, c.store, t.target, both.deletion));
}

TEST_CASE("batched targets all pass the oracle") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    auto w = fixtures::random_workload(seed, 200);
    if (w.targets.size() < 2) continue;
    StateView now = w.store.current();
    std::vector<ErasureRequest> reqs;
    for (const auto& t : w.targets) reqs.push_back(make_request(t, 1000));
    for (auto alg : {Algorithm::Ilp, Algorithm::Hgr, Algorithm::Apx}) {
      auto r = batch_erase(reqs, now, w.rules, {alg});
      CHECK(r.targets.size() == w.targets.size());
      for (const auto& t : w.targets) CHECK(fixtures::erased_ok(now, w.rules, w.store, t, r.deletion));
      std::size_t singles = 0;
      for (const auto& t : w.targets) singles += erase_one(t, now, w.rules, {alg}).instantiated_cells;
      CHECK(r.instantiated_cells <= singles);
    }
  }
}

TEST_CASE("null targets drop out and duplicates collapse") {
  auto ex = fixtures::area_code(true);
  ex.store.erase_cell(4, ex.city);
  StateView now = ex.store.current();
  auto r = batch_erase({make_request(ex.area, 5), make_request(ex.area, 6), make_request(ex.city, 6)}, now, ex.rules);
  REQUIRE(r.targets.size() == 1);
  CHECK(r.targets[0].target == ex.area);
  CHECK(r.deletion.cells == std::vector<CellRef>{ex.area});
}

TEST_CASE("deletions apply once per live cell") {
  auto ex = fixtures::area_code(true);
  auto r = erase_one(ex.area, ex.store.current(), ex.rules);
  CHECK(apply_deletions(ex.store, r.deletion, 10) == 2);
  CHECK(apply_deletions(ex.store, r.deletion, 11) == 0);
  CHECK(ex.store.current().live_cell_count() == 1);
}

TEST_CASE("windows by count and by time") {
  std::vector<ErasureRequest> reqs;
  for (Timestamp t : {1, 2, 5, 9, 10, 30}) reqs.push_back(make_request({"R", t, "a"}, t));
  auto by_count = make_windows(reqs, BatchMode::Count, 4);
  REQUIRE(by_count.size() == 2);
  CHECK(by_count[0].size() == 4);
  CHECK(by_count[1].size() == 2);
  auto by_time = make_windows(reqs, BatchMode::Time, 5);
  REQUIRE(by_time.size() == 3);
  CHECK(by_time[0].size() == 3);  // 1, 2, 5
  CHECK(by_time[1].size() == 2);  // 9, 10
  CHECK(by_time[2].size() == 1);
}

TEST_CASE("algorithm names round trip") {
  for (auto a : {Algorithm::Ilp, Algorithm::Hgr, Algorithm::Apx, Algorithm::BaselineInst, Algorithm::BaselineOpr,
                 Algorithm::BaselineMinSet})
    CHECK(parse_algorithm(to_string(a)) == a);
  CHECK_FALSE(parse_algorithm("magic"));
}
