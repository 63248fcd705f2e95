#include <doctest.h>

#include "erasure/runner.hpp"
#include "erasure/workload.hpp"
#include "fixtures.hpp"

using namespace erasure;

namespace {

std::vector<Event> with_request(const fixtures::AreaCodeFixture& ex, Timestamp t) {
  std::vector<Event> events = ex.store.log();
  Event req;
  req.time = t;
  req.kind = EventKind::EraseRequest;
  req.relation = ex.area.relation;
  req.rid = ex.area.rid;
  req.attribute = ex.area.attribute;
  events.push_back(req);
  return events;
}

}  // namespace

TEST_CASE("example workload deletes two cells or one") {
  for (bool area_first : {true, false}) {
    auto ex = fixtures::area_code(area_first);
    RunConfig cfg;
    cfg.algorithm = Algorithm::Ilp;
    cfg.verify = true;
    auto res = run_workload(ex.schema, ex.rules, with_request(ex, 10), cfg);
    REQUIRE(res.report.erasures.size() == 1);
    const auto& rec = res.report.erasures[0];
    CHECK(rec.deleted.size() == (area_first ? 2u : 1u));
    CHECK(rec.verdict == Verdict::Pass);
    CHECK(rec.t_b == (area_first ? 2 : 3));
    CHECK(res.store.current().value_of(ex.area).is_null());
    CHECK(res.store.current().value_of(ex.city).is_null() == area_first);
    CHECK(verify(res.store, ex.rules, res.report.erasures) == std::vector<Verdict>{Verdict::Pass});
  }
}

TEST_CASE("an under-deleting log fails verification") {
  auto ex = fixtures::area_code(true);
  ex.store.erase_cell(10, ex.area);
  ErasureRecord rec;
  rec.target = ex.area;
  rec.t_b = 2;
  rec.value = 949;
  rec.version = ex.store.version();
  CHECK(verify(ex.store, ex.rules, {rec}) == std::vector<Verdict>{Verdict::Fail});
}

TEST_CASE("empty workload") {
  auto ex = fixtures::area_code(true);
  auto res = run_workload(ex.schema, ex.rules, {}, RunConfig{});
  CHECK(res.report.erasures.empty());
  CHECK(res.report.reconstructions_performed() == 0);
  CHECK(res.store.version() == 0);
}

TEST_CASE("eta expiry erases like a retention request") {
  auto ex = fixtures::area_code(true);
  auto events = ex.store.log();
  Event eta;
  eta.time = 5;
  eta.kind = EventKind::SetEta;
  eta.relation = "R";
  eta.rid = 1;
  eta.attribute = "AreaCode";
  eta.eta = 8;
  events.push_back(eta);
  Event later;
  later.time = 20;
  later.kind = EventKind::InsertRecord;
  later.relation = "R";
  later.rid = 2;
  events.push_back(later);
  auto res = run_workload(ex.schema, ex.rules, events, RunConfig{});
  REQUIRE(res.report.erasures.size() == 1);
  CHECK(res.report.erasures[0].kind == "retention");
  CHECK(res.report.erasures[0].executed_at == 8);
}

TEST_CASE("reports round trip through json lines") {
  auto ex = fixtures::area_code(true);
  RunConfig cfg;
  cfg.algorithm = Algorithm::Hgr;
  auto res = run_workload(ex.schema, ex.rules, with_request(ex, 10), cfg);
  auto back = parse_report(res.report.to_jsonl());
  REQUIRE(back.size() == 1);
  CHECK(back[0].target == ex.area);
  CHECK(back[0].deleted == res.report.erasures[0].deleted);
  CHECK(back[0].version == res.report.erasures[0].version);
  CHECK(back[0].value == Value(949));
  CHECK(res.report.to_jsonl(false) == run_workload(ex.schema, ex.rules, with_request(ex, 10), cfg).report.to_jsonl(false));
}

TEST_CASE("synthetic workloads are deterministic and pass the oracle") {
  SyntheticSpec spec;
  spec.users = 6;
  spec.erasures = 8;
  auto a = gen_synthetic(spec), b = gen_synthetic(spec);
  CHECK(format_workload(a.workload) == format_workload(b.workload));
  spec.seed = 2;
  CHECK(format_workload(gen_synthetic(spec).workload) != format_workload(a.workload));

  auto schema = Schema::from_json(nlohmann::json::parse(a.schema_json));
  auto rules = parse_rules(a.rules_text, *schema);
  for (auto alg : {Algorithm::Ilp, Algorithm::Hgr, Algorithm::Apx}) {
    for (std::size_t batch : {1, 4}) {
      RunConfig cfg;
      cfg.algorithm = alg;
      cfg.batch_size = batch;
      cfg.verify = true;
      auto res = run_workload(schema, rules, a.workload, cfg);
      CHECK(res.report.count(Verdict::Fail) == 0);
      CHECK(res.report.count(Verdict::Pass) == res.report.erasures.size());
      auto post = verify(res.store, rules, res.report.erasures);
      for (auto v : post) CHECK(v == Verdict::Pass);
    }
  }
}

TEST_CASE("planned reconstructions never exceed the baseline") {
  SyntheticSpec spec;
  spec.users = 8;
  spec.erasures = 12;
  spec.mode = UpdateMode::Continuous;
  auto data = gen_synthetic(spec);
  auto schema = Schema::from_json(nlohmann::json::parse(data.schema_json));
  auto rules = parse_rules(data.rules_text, *schema);
  RunConfig cfg;
  cfg.grace = 7200;
  cfg.retention_fraction = 1.0;
  auto res = run_workload(schema, rules, data.workload, cfg);
  CHECK(res.report.reconstructions_performed() <= res.report.reconstructions_baseline());
  cfg.grace = 0;
  CHECK(run_workload(schema, rules, data.workload, cfg).report.reconstructions_saved() == 0);
}
