#include "erasure/synthetic.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include "erasure/workload.hpp"

namespace erasure {

namespace {

constexpr const char* kSchema = R"({
  "relations": [
    {"name": "Person", "attributes": ["perID", "name", "Trvl", "lstLoc"]},
    {"name": "Posts", "attributes": ["pID", "pTm", "pLoc", "pLikes"]},
    {"name": "PostedBy", "attributes": ["pst", "usr"]},
    {"name": "Device", "attributes": ["dID", "owner", "dLoc", "dTm"]},
    {"name": "Statistics", "attributes": [
      "perID",
      {"name": "totLikes", "kind": "derived", "freq": 86400,
       "definition": "SUM(P.pLikes) FROM Posts P, PostedBy B WHERE B.pst = P.pID AND B.usr = SELF.perID"},
      {"name": "freqLoc", "kind": "derived", "freq": 86400,
       "definition": "MAX(P.pLoc) FROM Posts P, PostedBy B WHERE B.pst = P.pID AND B.usr = SELF.perID"},
      {"name": "activity", "kind": "derived", "freq": 86400,
       "definition": "COUNT(*) FROM PostedBy B WHERE B.usr = SELF.perID"}
    ]}
  ]
})";

constexpr const char* kLastPost =
    "(SELECT B2.usr AS usr, MAX(P2.pTm) AS last FROM Posts P2, PostedBy B2 WHERE B2.pst = P2.pID GROUP BY B2.usr) L";

struct Template {
  const char* id;
  const char* dependence;
  std::string condition;
};

std::vector<Template> templates() {
  return {
      {"R1", "totLikes(R) <- pLikes(M)",
       "SELECT S.rid AS R, P.rid AS M FROM Statistics S, Posts P, PostedBy B\n"
       "           WHERE S.perID = B.usr AND B.pst = P.pID"},
      {"R2", "lstLoc(U) <- pLoc(M)",
       "SELECT U.rid AS U, P.rid AS M FROM Person U, Posts P, PostedBy B, Device D,\n           " +
           std::string(kLastPost) +
           "\n           WHERE B.usr = U.perID AND B.pst = P.pID AND L.usr = U.perID AND P.pTm = L.last\n"
           "           AND D.owner = U.perID AND P.pTm >= D.dTm"},
      {"R3", "lstLoc(U) <- dLoc(D)",
       "SELECT U.rid AS U, D.rid AS D FROM Person U, Device D,\n           " + std::string(kLastPost) +
           "\n           WHERE D.owner = U.perID AND L.usr = U.perID AND L.last < D.dTm"},
      {"R4", "freqLoc(R) <- pLoc(M)",
       "SELECT S.rid AS R, P.rid AS M FROM Statistics S, Posts P, PostedBy B\n"
       "           WHERE S.perID = B.usr AND B.pst = P.pID"},
      {"R5", "dLoc(D) <- pLoc(M)",
       "SELECT D.rid AS D, P.rid AS M FROM Device D, Posts P, PostedBy B\n"
       "           WHERE B.pst = P.pID AND B.usr = D.owner AND P.pTm >= D.dTm - 3600 AND P.pTm <= D.dTm + 3600"},
      {"R6", "Trvl(U) <- freqLoc(R), lstLoc(U)",
       "SELECT U.rid AS U, S.rid AS R FROM Person U, Statistics S WHERE S.perID = U.perID"},
  };
}

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  Timestamp uniform(Timestamp lo, Timestamp hi) {
    if (hi <= lo) return lo;
    return std::uniform_int_distribution<Timestamp>(lo, hi)(rng_);
  }
  int loc() { return static_cast<int>(uniform(1, 20)); }
  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

Event ev(Timestamp t, EventKind k, const std::string& rel, RecordId rid, const std::string& attr = "", Value v = {}) {
  Event e;
  e.time = t;
  e.kind = k;
  e.relation = rel;
  e.rid = rid;
  e.attribute = attr;
  e.value = std::move(v);
  return e;
}

}  // namespace

std::string social_schema_json() { return kSchema; }

SchemaPtr social_schema() { return Schema::from_json(nlohmann::json::parse(kSchema)); }

std::string social_rules_text(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& t : templates()) {
    if (!ids.empty() && std::find(ids.begin(), ids.end(), t.id) == ids.end()) continue;
    out += std::string("rule ") + t.id + "\ndependence: " + t.dependence + "\ncondition: " + t.condition + "\n\n";
  }
  return out;
}

std::vector<RDR> social_rules(const Schema& schema, const std::vector<std::string>& ids) {
  auto rules = parse_rules(social_rules_text(ids), schema);
  validate_rule_set(rules);
  return rules;
}

std::string_view to_string(UpdateMode m) {
  switch (m) {
    case UpdateMode::Bursty: return "bursty";
    case UpdateMode::Continuous: return "continuous";
    case UpdateMode::Simultaneous: return "simultaneous";
  }
  return "?";
}

std::optional<UpdateMode> parse_update_mode(std::string_view text) {
  for (auto m : {UpdateMode::Bursty, UpdateMode::Continuous, UpdateMode::Simultaneous})
    if (to_string(m) == text) return m;
  return std::nullopt;
}

SyntheticData gen_synthetic(const SyntheticSpec& spec) {
  if (spec.horizon < 100) throw Error("synthetic horizon too short");
  if (spec.erase_after >= spec.horizon) throw Error("erase_after must precede the horizon");
  Gen g(spec.seed);
  std::vector<Event> out;
  // (cell, last write) of every rule member base cell.
  std::map<CellRef, Timestamp> members;
  const Timestamp active_end = spec.horizon * 7 / 10;
  RecordId next_post = 1;
  const bool simultaneous = spec.mode == UpdateMode::Simultaneous;

  for (RecordId u = 1; u <= static_cast<RecordId>(spec.users); ++u) {
    const Timestamp t0 = simultaneous ? u : g.uniform(0, spec.horizon / 10);
    out.push_back(ev(t0, EventKind::InsertRecord, "Person", u));
    out.push_back(ev(t0, EventKind::InsertCell, "Person", u, "perID", u));
    out.push_back(ev(t0, EventKind::InsertCell, "Person", u, "name", "user" + std::to_string(u)));
    out.push_back(ev(t0, EventKind::InsertCell, "Person", u, "Trvl", 0));
    out.push_back(ev(t0, EventKind::InsertCell, "Person", u, "lstLoc", g.loc()));
    members[{"Person", u, "Trvl"}] = t0;
    members[{"Person", u, "lstLoc"}] = t0;
    out.push_back(ev(t0, EventKind::InsertRecord, "Device", u));
    out.push_back(ev(t0, EventKind::InsertCell, "Device", u, "dID", u));
    out.push_back(ev(t0, EventKind::InsertCell, "Device", u, "owner", u));
    out.push_back(ev(t0, EventKind::InsertCell, "Device", u, "dLoc", g.loc()));
    out.push_back(ev(t0, EventKind::InsertCell, "Device", u, "dTm", t0));
    members[{"Device", u, "dLoc"}] = t0;
    out.push_back(ev(t0, EventKind::InsertRecord, "Statistics", u));
    out.push_back(ev(t0, EventKind::InsertCell, "Statistics", u, "perID", u));

    std::vector<Timestamp> bursts;
    for (int b = 0; b < 2; ++b) bursts.push_back(g.uniform(t0 + 1, active_end));
    auto when = [&]() -> Timestamp {
      if (simultaneous) return t0;
      if (spec.mode == UpdateMode::Bursty) return bursts[g.uniform(0, 1)] + g.uniform(0, 600);
      return g.uniform(t0 + 1, active_end);
    };

    std::vector<std::pair<RecordId, Timestamp>> posts;
    for (std::size_t k = 0; k < spec.posts_per_user; ++k) {
      RecordId p = next_post++;
      Timestamp tp = when();
      posts.emplace_back(p, tp);
      out.push_back(ev(tp, EventKind::InsertRecord, "Posts", p));
      out.push_back(ev(tp, EventKind::InsertCell, "Posts", p, "pID", p));
      out.push_back(ev(tp, EventKind::InsertCell, "Posts", p, "pTm", tp));
      out.push_back(ev(tp, EventKind::InsertCell, "Posts", p, "pLoc", g.loc()));
      out.push_back(ev(tp, EventKind::InsertCell, "Posts", p, "pLikes", static_cast<int>(g.uniform(0, 50))));
      out.push_back(ev(tp, EventKind::InsertRecord, "PostedBy", p));
      out.push_back(ev(tp, EventKind::InsertCell, "PostedBy", p, "pst", p));
      out.push_back(ev(tp, EventKind::InsertCell, "PostedBy", p, "usr", u));
      members[{"Posts", p, "pLoc"}] = tp;
      members[{"Posts", p, "pLikes"}] = tp;
    }
    for (const char* d : {"totLikes", "freqLoc", "activity"})
      out.push_back(ev(simultaneous ? t0 : t0 + 1, EventKind::RecomputeDerived, "Statistics", u, d));

    if (!simultaneous) {
      for (std::size_t k = 0; k < spec.updates_per_user; ++k) {
        Timestamp tu = when() + 1;
        bool move = posts.empty() || g.uniform(0, 1) == 0;
        if (move) {
          out.push_back(ev(tu, EventKind::UpdateCell, "Device", u, "dLoc", g.loc()));
          out.push_back(ev(tu, EventKind::UpdateCell, "Device", u, "dTm", tu));
          auto& last = members[{"Device", u, "dLoc"}];
          last = std::max(last, tu);
        } else {
          auto [p, tp] = posts[g.uniform(0, static_cast<Timestamp>(posts.size()) - 1)];
          tu = std::max(tu, tp + 1);
          out.push_back(ev(tu, EventKind::UpdateCell, "Posts", p, "pLikes", static_cast<int>(g.uniform(0, 50))));
          auto& last = members[{"Posts", p, "pLikes"}];
          last = std::max(last, tu);
        }
      }
    }
  }

  std::vector<std::pair<CellRef, Timestamp>> cands(members.begin(), members.end());
  std::shuffle(cands.begin(), cands.end(), g.rng());
  if (spec.erasures > cands.size()) throw Error("more erasures requested than erasable cells");
  for (std::size_t i = 0; i < spec.erasures; ++i) {
    const auto& [c, last] = cands[i];
    Timestamp t = g.uniform(std::max(last + 1, spec.erase_after), spec.horizon);
    out.push_back(ev(t, EventKind::EraseRequest, c.relation, c.rid, c.attribute));
  }
  std::stable_sort(out.begin(), out.end(), [](const Event& a, const Event& b) { return a.time < b.time; });

  SyntheticData data;
  data.schema_json = social_schema_json();
  data.rules_text = social_rules_text(spec.rules);
  data.workload = std::move(out);
  return data;
}

void write_synthetic(const SyntheticData& data, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream out(dir + "/" + name);
    if (!out) throw Error("cannot write " + dir + "/" + name);
    out << text;
  };
  write("schema.json", data.schema_json);
  write("rules.txt", data.rules_text);
  save_workload(dir + "/workload.tsv", data.workload);
}

}  // namespace erasure
