#include <doctest.h>

#include "fixtures.hpp"

using namespace erasure;

TEST_CASE("rules parse and print back") {
  auto schema = social_schema();
  auto rules = social_rules(*schema);
  REQUIRE(rules.size() == 6);
  CHECK(rules[0].id == "R1");
  CHECK(rules[0].dependence_text() == "totLikes(R) <- pLikes(M)");
  CHECK(rules[5].tail.size() == 2);
  auto again = parse_rules(format_rules(rules), *schema);
  REQUIRE(again.size() == rules.size());
  for (std::size_t i = 0; i < rules.size(); ++i) CHECK(again[i].dependence_text() == rules[i].dependence_text());
}

TEST_CASE("duplicate ids and members read by aggregates are rejected") {
  auto schema = fixtures::random_schema();
  CHECK_THROWS_AS(parse_rules("rule P\ndependence: a1(X) <- a2(X)\ncondition: SELECT X.rid AS X FROM A X\n"
                              "rule P\ndependence: a1(X) <- a3(X)\ncondition: SELECT X.rid AS X FROM A X\n",
                              *schema),
                  Error);
  auto bad = parse_rules(
      "rule Q\ndependence: a1(X) <- a2(X)\n"
      "condition: SELECT X.rid AS X FROM A X, (SELECT A2.k AS k, MAX(A2.a2) AS m FROM A A2 GROUP BY A2.k) L\n"
      "           WHERE L.k = X.k\n",
      *schema);
  CHECK_THROWS_AS(validate_rule_set(bad), Error);
}

TEST_CASE("R1 binds every post of the user") {
  auto s = fixtures::social_example();
  auto inst = instantiate_all(s.rules[0], s.store.current());
  std::vector<InstantiatedRDR> bob;
  for (const auto& d : inst)
    if (d.head == CellRef{"Statistics", 1, "totLikes"}) bob.push_back(d);
  REQUIRE(bob.size() == 3);
  CHECK(bob[0].tail == std::vector<CellRef>{{"Posts", 1, "pLikes"}});
  CHECK(bob[1].tail == std::vector<CellRef>{{"Posts", 2, "pLikes"}});
  CHECK(bob[2].tail == std::vector<CellRef>{{"Posts", 4, "pLikes"}});
  CHECK(inst.size() == 4);
}

TEST_CASE("R2 keeps only the latest post after the device time") {
  auto s = fixtures::social_example();
  auto inst = instantiate_all(s.rules[1], s.store.current());
  // Bob's latest post is 4 at t=5 and his device time is 3; Alice's post 3 is at 4.
  REQUIRE(inst.size() == 2);
  CHECK(inst[0].head == CellRef{"Person", 1, "lstLoc"});
  CHECK(inst[0].tail == std::vector<CellRef>{{"Posts", 4, "pLoc"}});
  CHECK(inst[1].tail == std::vector<CellRef>{{"Posts", 3, "pLoc"}});
}

TEST_CASE("null members suppress an instantiation") {
  auto ex = fixtures::area_code(false);
  CHECK(instantiate_all(ex.rules[0], ex.store.current()).size() == 1);
  ex.store.erase_cell(4, ex.area);
  CHECK(instantiate_all(ex.rules[0], ex.store.current()).empty());
}
