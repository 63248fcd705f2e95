#include "fixtures.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

namespace fixtures {

AreaCodeFixture area_code(bool area_first) {
  auto schema = Schema::from_json(nlohmann::json::parse(R"({"relations": [
    {"name": "R", "attributes": ["Name", "City", "AreaCode"]}]})"));
  auto rules = parse_rules(
      "rule E1\n"
      "dependence: AreaCode(X) <- City(X)\n"
      "condition: SELECT T.rid AS X FROM R T WHERE T.City = 'Irvine'\n",
      *schema);
  Store store(schema);
  CellRef area{"R", 1, "AreaCode"}, city{"R", 1, "City"};
  store.insert_record(1, "R", 1, {{"Name", "Bob"}});
  if (area_first) {
    store.insert_cell(2, area, 949);
    store.insert_cell(3, city, "Irvine");
  } else {
    store.insert_cell(2, city, "Irvine");
    store.insert_cell(3, area, 949);
  }
  return {schema, std::move(rules), std::move(store), area, city};
}

CellRef cell(int k, const char* rel) { return CellRef{rel, k, "c"}; }

namespace {

InstantiatedRDR edge(const std::string& id, int head, std::vector<int> tail, const char* rel = "R") {
  InstantiatedRDR d;
  d.rule_id = id;
  d.head = cell(head, rel);
  for (int t : tail) d.tail.push_back(cell(t, rel));
  std::sort(d.tail.begin(), d.tail.end());
  return d;
}

}  // namespace

std::vector<InstantiatedRDR> two_branch_rules() {
  return {edge("d1", 1, {5, 7}), edge("d2", 5, {2}),  edge("d3", 5, {8}),
          edge("d4", 1, {9, 10}), edge("d5", 10, {11}), edge("d6", 11, {12})};
}

DependenceHypergraph two_branch() { return hypergraph_from(two_branch_rules(), cell(1)); }

DependenceHypergraph greedy_gap() {
  std::map<CellRef, double> cost{{cell(1), 1}, {cell(2), 1}, {cell(3), 2}, {cell(4), 5}};
  return hypergraph_from({edge("d1", 1, {2, 3}), edge("d2", 2, {4})}, cell(1),
                         [cost](const CellRef& c) { return cost.at(c); });
}

DependenceHypergraph random_acyclic(std::mt19937_64& rng, std::size_t max_rules, std::size_t max_arity,
                                    bool weighted) {
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  std::size_t rules = pick(1, max_rules);
  int next = 1;
  std::vector<int> cells{next++};
  std::vector<InstantiatedRDR> out;
  for (std::size_t i = 0; i < rules; ++i) {
    int head = cells[pick(0, cells.size() - 1)];
    std::vector<int> tail;
    for (std::size_t k = pick(1, max_arity - 1); k > 0; --k) tail.push_back(next++);
    cells.insert(cells.end(), tail.begin(), tail.end());
    out.push_back(edge("h" + std::to_string(i), head, tail, "H"));
  }
  std::map<CellRef, double> cost;
  for (int c : cells) cost[cell(c, "H")] = weighted ? static_cast<double>(pick(1, 5)) : 1.0;
  return hypergraph_from(out, cell(1, "H"), [cost](const CellRef& c) { return cost.at(c); });
}

SchemaPtr random_schema() {
  return Schema::from_json(nlohmann::json::parse(R"({"relations": [
    {"name": "A", "attributes": ["k", "a1", "a2", "a3", "w"]},
    {"name": "B", "attributes": ["k", "b1", "b2"]}]})"));
}

std::vector<RDR> rule_pool(const Schema& schema) {
  const char* text = R"(rule P1
dependence: a1(X) <- a2(X)
condition: SELECT X.rid AS X FROM A X WHERE X.k < 3

rule P2
dependence: a2(X) <- a3(X)
condition: SELECT X.rid AS X FROM A X WHERE X.w >= 2

rule P3
dependence: a1(X) <- b1(Y)
condition: SELECT X.rid AS X, Y.rid AS Y FROM A X, B Y WHERE X.k = Y.k

rule P4
dependence: b2(Y) <- a3(X), b1(Y)
condition: SELECT X.rid AS X, Y.rid AS Y FROM A X, B Y WHERE X.k = Y.k AND X.w > 1

rule P5
dependence: a3(X) <- a1(Z)
condition: SELECT X.rid AS X, Z.rid AS Z FROM A X, A Z WHERE X.k = Z.k AND X.w < Z.w

rule P6
dependence: b1(Y) <- a2(X)
condition: SELECT Y.rid AS Y, X.rid AS X FROM B Y, A X,
           (SELECT A2.k AS k, MAX(A2.w) AS top FROM A A2 GROUP BY A2.k) L
           WHERE Y.k = X.k AND L.k = X.k AND X.w = L.top

rule P7
dependence: a2(X) <- b2(Y), a1(X)
condition: SELECT X.rid AS X, Y.rid AS Y FROM A X, B Y WHERE X.k = Y.k AND Y.k > 0

rule P8
dependence: b1(Y) <- b2(Y)
condition: SELECT Y.rid AS Y FROM B Y WHERE Y.k >= 1

rule P9
dependence: a3(X) <- b2(Y)
condition: SELECT X.rid AS X, Y.rid AS Y FROM A X, B Y,
           (SELECT A3.k AS k, COUNT(*) AS n FROM A A3 GROUP BY A3.k) C
           WHERE X.k = Y.k AND C.k = X.k AND C.n >= 2

rule P10
dependence: a2(X) <- a1(Z), a3(Z)
condition: SELECT X.rid AS X, Z.rid AS Z FROM A X, A Z WHERE X.w = Z.k
)";
  auto rules = parse_rules(text, schema);
  validate_rule_set(rules);
  return rules;
}

RandomWorkload random_workload(std::uint64_t seed, std::size_t max_cells, std::size_t max_rules) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng); };
  auto schema = random_schema();
  auto pool = rule_pool(*schema);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(static_cast<std::size_t>(pick(1, static_cast<std::int64_t>(std::min(max_rules, pool.size())))));

  const std::int64_t cap = static_cast<std::int64_t>(max_cells) / 8;
  const std::int64_t n_a = pick(1, std::min<std::int64_t>(cap, 30));
  const std::int64_t n_b = pick(1, std::min<std::int64_t>(cap, 30));
  std::vector<CellRef> all;
  for (RecordId r = 1; r <= n_a; ++r)
    for (const char* a : {"k", "a1", "a2", "a3", "w"}) all.push_back({"A", r, a});
  for (RecordId r = 1; r <= n_b; ++r)
    for (const char* a : {"k", "b1", "b2"}) all.push_back({"B", r, a});

  auto value_for = [&](const CellRef& c) -> Value {
    if (c.attribute == "k") return static_cast<int>(pick(0, 4));
    if (c.attribute == "w") return static_cast<int>(pick(0, 5));
    return static_cast<int>(pick(0, 9));
  };

  Store store(schema);
  Timestamp t = 1;
  for (RecordId r = 1; r <= n_a; ++r) store.insert_record(t, "A", r);
  for (RecordId r = 1; r <= n_b; ++r) store.insert_record(t, "B", r);
  std::vector<CellRef> order = all;
  std::shuffle(order.begin(), order.end(), rng);
  for (const auto& c : order) {
    if (pick(0, 9) == 0) continue;
    t += pick(0, 2);
    store.insert_cell(t, c, value_for(c));
  }
  const std::int64_t ops = pick(0, 80);
  for (std::int64_t i = 0; i < ops; ++i) {
    const CellRef& c = all[static_cast<std::size_t>(pick(0, static_cast<std::int64_t>(all.size()) - 1))];
    t += pick(1, 3);
    bool live = !store.current().value_of(c).is_null();
    if (!live) store.insert_cell(t, c, value_for(c));
    else if (pick(0, 2) == 0) store.erase_cell(t, c);
    else store.update_cell(t, c, value_for(c));
  }

  std::set<std::pair<std::string, std::string>> members;
  for (const auto& r : pool) {
    const auto& rel = schema->relation(r.head_member.relation);
    members.insert({rel.name, r.head.attribute});
    for (std::size_t i = 0; i < r.tail.size(); ++i)
      members.insert({schema->relation(r.tail_members[i].relation).name, r.tail[i].attribute});
  }
  StateView now = store.current();
  std::vector<CellRef> cands;
  for (const auto& c : all)
    if (members.count({c.relation, c.attribute}) && !now.value_of(c).is_null()) cands.push_back(c);
  std::shuffle(cands.begin(), cands.end(), rng);
  if (cands.size() > 3) cands.resize(3);
  return {schema, std::move(pool), std::move(store), std::move(cands)};
}

Social social_example() {
  auto schema = social_schema();
  auto rules = social_rules(*schema);
  Store store(schema);
  for (RecordId u : {1, 2}) {
    store.insert_record(1, "Person", u,
                        {{"perID", static_cast<int>(u)}, {"name", u == 1 ? "Bob" : "Alice"}, {"Trvl", 0}, {"lstLoc", 5}});
    store.insert_record(1, "Device", u, {{"dID", static_cast<int>(u)}, {"owner", static_cast<int>(u)}, {"dLoc", 5}, {"dTm", 3}});
    store.insert_record(1, "Statistics", u, {{"perID", static_cast<int>(u)}});
  }
  const std::vector<std::pair<RecordId, RecordId>> posts{{1, 1}, {2, 1}, {3, 2}, {4, 1}};
  Timestamp t = 2;
  for (auto [p, u] : posts) {
    store.insert_record(t, "Posts", p,
                        {{"pID", static_cast<int>(p)}, {"pTm", static_cast<int>(t)}, {"pLoc", static_cast<int>(p) + 1},
                         {"pLikes", static_cast<int>(10 * p)}});
    store.insert_record(t, "PostedBy", p, {{"pst", static_cast<int>(p)}, {"usr", static_cast<int>(u)}});
    ++t;
  }
  for (RecordId u : {1, 2})
    for (const char* d : {"totLikes", "freqLoc", "activity"}) store.recompute_derived({"Statistics", u, d}, t);
  return {schema, std::move(rules), std::move(store)};
}

StateView after(const StateView& state, const DeletionSet& set) {
  std::vector<std::pair<CellRef, Value>> nulls;
  for (const auto& c : set.cells) nulls.emplace_back(c, Value::null());
  return state.with_values(nulls);
}

bool erased_ok(const StateView& state, const std::vector<RDR>& rules, const Store& store, const CellRef& target,
               const DeletionSet& set) {
  const CellState* cs = state.cell(target);
  if (!cs || cs->value.is_null()) return false;
  return p2e2_holds(target, cs->value, store.state_at(cs->kappa), after(state, set), rules);
}

std::vector<ErasureInterval> worked_intervals(Timestamp width) {
  std::vector<ErasureInterval> out;
  int i = 1;
  for (Timestamp begin : {kOnePm + kHour / 2, kOnePm + 2 * kHour, kOnePm + 3 * kHour + kHour / 2})
    out.push_back({CellRef{"Base", i++, "v"}, begin, begin + width});
  return out;
}

}  // namespace fixtures
