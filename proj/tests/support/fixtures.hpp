#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "erasure/batch.hpp"
#include "erasure/rdr.hpp"
#include "erasure/schedule.hpp"
#include "erasure/synthetic.hpp"

namespace fixtures {

using namespace erasure;

// R(Name, City, AreaCode) with AreaCode(X) <- City(X) on Irvine records.
struct AreaCodeFixture {
  SchemaPtr schema;
  std::vector<RDR> rules;
  Store store;
  CellRef area, city;
};
AreaCodeFixture area_code(bool area_first);

// Two-branch instance: c1 <- {c5, c7}, c5 <- c2, c5 <- c8, c1 <- {c9, c10},
// c10 <- c11, c11 <- c12. Target c1.
CellRef cell(int k, const char* rel = "R");
std::vector<InstantiatedRDR> two_branch_rules();
DependenceHypergraph two_branch();

// c1 <- {c2 (1), c3 (2)}, c2 <- c4 (5): greedy 7, optimum 3.
DependenceHypergraph greedy_gap();

// Tails pairwise disjoint and fresh, heads drawn from earlier cells: a hypertree rooted
// at the target with 1..max_rules edges of arity 2..max_arity.
DependenceHypergraph random_acyclic(std::mt19937_64& rng, std::size_t max_rules = 12, std::size_t max_arity = 4,
                                    bool weighted = false);

// Random relational workload over A(k, a1, a2, a3, w) and B(k, b1, b2) with up to
// `max_rules` rules drawn from a fixed pool and a mixed insert / erase / update history.
struct RandomWorkload {
  SchemaPtr schema;
  std::vector<RDR> rules;
  Store store;
  std::vector<CellRef> targets;  // non-NULL rule member cells of the final state
};
SchemaPtr random_schema();
std::vector<RDR> rule_pool(const Schema& schema);
RandomWorkload random_workload(std::uint64_t seed, std::size_t max_cells = 500, std::size_t max_rules = 8);

// Bob and Alice over the social schema: Bob posts 1, 2, 4; Alice posts 3.
struct Social {
  SchemaPtr schema;
  std::vector<RDR> rules;
  Store store;
};
Social social_example();

// Erases the deletion set on top of the current state.
StateView after(const StateView& state, const DeletionSet& set);

// p2e2_holds on the state right after erasing `set` from `state`.
bool erased_ok(const StateView& state, const std::vector<RDR>& rules, const Store& store, const CellRef& target,
               const DeletionSet& set);

// 1pm anchor, one hour freq, 30 minute intervals starting at 1:30, 3:00 and 4:30.
constexpr Timestamp kHour = 3600;
constexpr Timestamp kOnePm = 13 * kHour;
std::vector<ErasureInterval> worked_intervals(Timestamp width = kHour / 2);

}  // namespace fixtures
