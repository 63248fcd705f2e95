#include "erasure/schema.hpp"

#include <fstream>
#include <set>

#include "erasure/query.hpp"

namespace erasure {

std::optional<std::size_t> RelationDef::find_attribute(std::string_view attr) const {
  for (std::size_t i = 0; i < attributes.size(); ++i)
    if (attributes[i].name == attr) return i;
  return std::nullopt;
}

Schema::~Schema() = default;

std::shared_ptr<const Schema> Schema::define(std::vector<RelationDef> relations) {
  std::shared_ptr<Schema> s(new Schema());
  std::set<std::string> rel_names;
  for (const auto& r : relations) {
    if (r.name.empty()) throw Error("relation with empty name");
    if (!rel_names.insert(r.name).second) throw Error("duplicate relation '" + r.name + "'");
    std::set<std::string> attr_names;
    for (const auto& a : r.attributes) {
      if (a.name.empty()) throw Error("attribute with empty name in " + r.name);
      if (a.name == "rid") throw Error("'rid' is reserved (" + r.name + ")");
      if (!attr_names.insert(a.name).second) throw Error("duplicate attribute '" + r.name + "." + a.name + "'");
      if (!(a.cost > 0)) throw Error("non-positive cost for " + r.name + "." + a.name);
      if (a.kind == AttributeKind::Derived) {
        if (!a.freq || *a.freq <= 0) throw Error("derived attribute " + r.name + "." + a.name + " needs a positive freq");
        if (a.definition.empty()) throw Error("derived attribute " + r.name + "." + a.name + " has no definition");
      } else if (a.freq) {
        throw Error("base attribute " + r.name + "." + a.name + " must not have freq");
      }
    }
  }
  s->relations_ = std::move(relations);
  s->derivations_.resize(s->relations_.size());
  for (std::size_t r = 0; r < s->relations_.size(); ++r) {
    const auto& rel = s->relations_[r];
    s->derivations_[r].resize(rel.attributes.size());
    for (std::size_t a = 0; a < rel.attributes.size(); ++a) {
      const auto& attr = rel.attributes[a];
      if (attr.kind != AttributeKind::Derived) continue;
      try {
        auto parsed = query::parse_aggregation(attr.definition);
        s->derivations_[r][a] = std::make_shared<const query::CompiledAggregation>(query::compile(parsed, *s, r));
      } catch (const Error& e) {
        throw Error("definition of " + rel.name + "." + attr.name + ": " + e.what());
      }
    }
  }
  return s;
}

std::optional<std::size_t> Schema::find_relation(std::string_view name) const {
  for (std::size_t i = 0; i < relations_.size(); ++i)
    if (relations_[i].name == name) return i;
  return std::nullopt;
}

std::size_t Schema::relation_index(std::string_view rel) const {
  auto r = find_relation(rel);
  if (!r) throw Error("unknown relation '" + std::string(rel) + "'");
  return *r;
}

std::size_t Schema::attribute_index(std::size_t rel, std::string_view attr) const {
  auto a = relations_.at(rel).find_attribute(attr);
  if (!a) throw Error("unknown attribute '" + relations_.at(rel).name + "." + std::string(attr) + "'");
  return *a;
}

const query::CompiledAggregation* Schema::derivation(std::size_t rel, std::size_t attr) const {
  return derivations_.at(rel).at(attr).get();
}

std::shared_ptr<const Schema> Schema::from_json(const nlohmann::json& doc) {
  std::vector<RelationDef> rels;
  for (const auto& jr : doc.at("relations")) {
    RelationDef r;
    r.name = jr.at("name").get<std::string>();
    for (const auto& ja : jr.at("attributes")) {
      AttributeDef a;
      if (ja.is_string()) {
        a.name = ja.get<std::string>();
      } else {
        a.name = ja.at("name").get<std::string>();
        std::string kind = ja.value("kind", "base");
        if (kind == "derived") a.kind = AttributeKind::Derived;
        else if (kind != "base") throw Error("unknown attribute kind '" + kind + "'");
        a.cost = ja.value("cost", 1.0);
        if (ja.contains("freq")) a.freq = ja.at("freq").get<Timestamp>();
        a.definition = ja.value("definition", "");
      }
      r.attributes.push_back(std::move(a));
    }
    rels.push_back(std::move(r));
  }
  return define(std::move(rels));
}

std::shared_ptr<const Schema> Schema::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open schema file " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error("schema file " + path + ": " + e.what());
  }
  return from_json(doc);
}

nlohmann::json Schema::to_json() const {
  nlohmann::json rels = nlohmann::json::array();
  for (const auto& r : relations_) {
    nlohmann::json attrs = nlohmann::json::array();
    for (const auto& a : r.attributes) {
      nlohmann::json ja{{"name", a.name}};
      if (a.kind == AttributeKind::Derived) {
        ja["kind"] = "derived";
        ja["freq"] = *a.freq;
        ja["definition"] = a.definition;
      }
      if (a.cost != 1.0) ja["cost"] = a.cost;
      attrs.push_back(std::move(ja));
    }
    rels.push_back({{"name", r.name}, {"attributes", std::move(attrs)}});
  }
  return {{"relations", std::move(rels)}};
}

}  // namespace erasure
