#include <doctest.h>

#include "fixtures.hpp"

using namespace erasure;
using fixtures::cell;

namespace {

std::vector<CellRef> cells(std::initializer_list<int> ks) {
  std::vector<CellRef> out;
  for (int k : ks) out.push_back(cell(k));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("two-branch optimum") {
  auto h = fixtures::two_branch();
  CHECK(h.cells.size() == 9);
  CHECK(h.edges.size() == 6);
  CHECK_FALSE(h.has_cycle());
  auto want = cells({1, 7, 9});
  CHECK(ilp(h, CostModel::Uniform).cells == want);
  CHECK(hgr(h).cells == want);
  CHECK(opt_path(break_tail_cycles(h)).cells == want);
  CHECK(exhaustive(h).cells == want);
  CHECK(exhaustive_subsets(h).cost == 3);
  CHECK(h.roots() == std::vector<int>{h.index_of(cell(1))});
}

TEST_CASE("two-branch subtree costs") {
  // Subtree optimum of a vertex is the cost of erasing it as a target.
  auto sub = [](int k) {
    auto h = hypergraph_from(fixtures::two_branch_rules(), cell(k));
    return opt_path(h).cost;
  };
  CHECK(sub(11) == 2);
  CHECK(sub(10) == 3);
  CHECK(sub(5) == 3);
  CHECK(sub(1) == 3);
}

TEST_CASE("two-branch bipartite graph and ilp size") {
  auto g = build_bipartite(fixtures::two_branch());
  CHECK(g.left.size() == 6);
  CHECK(g.right.size() == 9);
  CHECK(g.head_edges.size() == 6);
  CHECK(g.tail_edges.size() == 8);
  auto inst = encode_ilp(g);
  CHECK(inst.vars.size() == 6 + 9 + 6 + 8);
  CHECK(solve_ilp(inst).cost == 3);
}

TEST_CASE("approximation bound") {
  CHECK(approx_bound(10, 6, 3, 3) == doctest::Approx(1.7925).epsilon(1e-3));
  CHECK(approx_bound(10, 4, 2, 8) == doctest::Approx(2.0));
  CHECK_THROWS_AS(approx_bound(1, 1, 2, 1), Error);
  auto p = bound_parameters(fixtures::two_branch());
  CHECK(p.n == 9);
  CHECK(p.r == 6);
  CHECK(p.a == 3);
  CHECK(p.d == 3);
}

TEST_CASE("greedy can miss the optimum") {
  auto h = fixtures::greedy_gap();
  auto g = greedy(h);
  CHECK(g.cost == 7);
  CHECK(g.cells == cells({1, 2, 4}));
  auto o = ilp(h);
  CHECK(o.cost == 3);
  CHECK(o.cells == cells({1, 3}));
  CHECK(hgr(h).cost == 3);
}

TEST_CASE("no rules leaves only the target") {
  auto h = hypergraph_from({}, cell(1));
  for (const auto& d : {ilp(h), hgr(h), greedy(h), exhaustive(h)}) CHECK(d.cells == cells({1}));
  for (auto k : {BaselineKind::Inst, BaselineKind::OpR, BaselineKind::MinSet}) CHECK(baseline(k, h).cells == cells({1}));
}

TEST_CASE("baselines on the two-branch instance") {
  auto h = fixtures::two_branch();
  auto inst = baseline(BaselineKind::Inst, h), opr = baseline(BaselineKind::OpR, h),
       minset = baseline(BaselineKind::MinSet, h);
  CHECK(inst.cells.size() == 9);
  CHECK(opr.cells.size() <= 7);
  CHECK(inst.cost >= opr.cost);
  CHECK(opr.cost >= minset.cost);
  CHECK(minset.cost >= ilp(h).cost);
}

TEST_CASE("overlapping tails drop the larger rule") {
  InstantiatedRDR a{"a", cell(1), {cell(2), cell(3)}, {}, 0, 0};
  InstantiatedRDR b{"b", cell(4), {cell(3)}, {}, 0, 0};
  auto h = break_tail_cycles(hypergraph_from({a, b}, cell(1)));
  REQUIRE(h.edges.size() == 1);
  CHECK(h.edges[0].rule_id == "b");
  REQUIRE(h.discarded.size() == 1);
  CHECK(h.discarded[0].rfind("a:", 0) == 0);
  CHECK(h.acyclic);
}

TEST_CASE("cycles are solved exactly by the ilp and repaired by hgr") {
  InstantiatedRDR a{"a", cell(1), {cell(2)}, {}, 0, 0};
  InstantiatedRDR b{"b", cell(2), {cell(3)}, {}, 0, 0};
  InstantiatedRDR c{"c", cell(3), {cell(1)}, {}, 0, 0};
  auto h = hypergraph_from({a, b, c}, cell(1));
  CHECK(h.has_cycle());
  auto o = ilp(h);
  CHECK(o.cost == 3);
  CHECK(is_feasible(h, {0, 1, 2}));
  auto r = hgr(h);
  std::vector<int> idx;
  for (const auto& x : r.cells) idx.push_back(h.index_of(x));
  CHECK(is_feasible(h, idx));
}

TEST_CASE("exact methods agree on random acyclic instances") {
  for (std::size_t i = 0; i < 200; ++i) {
    std::mt19937_64 rng(900 + i);
    auto h = fixtures::random_acyclic(rng, 8, 4, i % 2 == 0);
    double want = exhaustive(h).cost;
    CHECK(ilp(h).cost == doctest::Approx(want));
    CHECK(hgr(h).cost == doctest::Approx(want));
    if (h.cells.size() <= 18) CHECK(exhaustive_subsets(h).cost == doctest::Approx(want));
    CHECK(greedy(h).cost >= want);
  }
}

TEST_CASE("every deletion set is feasible on workload graphs") {
  for (std::uint64_t seed = 1; seed <= 80; ++seed) {
    auto w = fixtures::random_workload(seed, 200);
    StateView now = w.store.current();
    for (const auto& t : w.targets) {
      auto h = oriented_hypergraph(dep_inst(now, w.rules, t));
      auto exact = ilp(h);
      for (const auto& d : {exact, hgr(h), greedy(h)}) {
        std::vector<int> idx;
        for (const auto& c : d.cells) idx.push_back(h.index_of(c));
        CHECK(is_feasible(h, idx));
        CHECK(d.cost >= exact.cost - 1e-9);
      }
    }
  }
}

TEST_CASE("the solver refuses past its size guard") {
  auto h = fixtures::two_branch();
  SolverOptions tiny;
  tiny.max_variables = 3;
  auto d = ilp(h, CostModel::Uniform, tiny);
  CHECK(d.stats.refused);
}

TEST_CASE("greedy with instantiation picks the same cells as greedy on the full graph") {
  auto ex = fixtures::area_code(true);
  RuleExpander expander(ex.store.current(), ex.rules);
  auto g = greedy_apx(expander, ex.area);
  CHECK(g.cells == std::vector<CellRef>{ex.area, ex.city});
  auto early = fixtures::area_code(false);
  RuleExpander e2(early.store.current(), early.rules);
  CHECK(greedy_apx(e2, early.area).cells == std::vector<CellRef>{early.area});
}
