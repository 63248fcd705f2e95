#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "erasure/value.hpp"

namespace erasure {

namespace query {
struct CompiledAggregation;
}

enum class AttributeKind { Base, Derived };

struct AttributeDef {
  std::string name;
  AttributeKind kind = AttributeKind::Base;
  double cost = 1.0;
  // Derived only: recompute at least once per freq ticks, value given by `definition`.
  std::optional<Timestamp> freq;
  std::string definition;
};

struct RelationDef {
  std::string name;
  std::vector<AttributeDef> attributes;

  std::optional<std::size_t> find_attribute(std::string_view attr) const;
};

/// Relations, attributes and compiled derived definitions. Immutable once defined.
class Schema {
 public:
  /// Validates names, costs and freq placement, then compiles every derived definition.
  /// Throws erasure::Error on any violation.
  static std::shared_ptr<const Schema> define(std::vector<RelationDef> relations);

  static std::shared_ptr<const Schema> from_json(const nlohmann::json& doc);
  static std::shared_ptr<const Schema> load(const std::string& path);
  nlohmann::json to_json() const;

  const std::vector<RelationDef>& relations() const { return relations_; }
  const RelationDef& relation(std::size_t index) const { return relations_.at(index); }
  std::optional<std::size_t> find_relation(std::string_view name) const;

  /// Index of relation `rel` or throws.
  std::size_t relation_index(std::string_view rel) const;
  /// Index of attribute `attr` in relation `rel`, or throws.
  std::size_t attribute_index(std::size_t rel, std::string_view attr) const;

  const AttributeDef& attribute(std::size_t rel, std::size_t attr) const {
    return relations_.at(rel).attributes.at(attr);
  }

  /// Compiled definition of a derived attribute; nullptr for base attributes.
  const query::CompiledAggregation* derivation(std::size_t rel, std::size_t attr) const;

  ~Schema();
  Schema(const Schema&) = delete;
  Schema& operator=(const Schema&) = delete;

 private:
  Schema() = default;

  std::vector<RelationDef> relations_;
  // [rel][attr], null for base attributes.
  std::vector<std::vector<std::shared_ptr<const query::CompiledAggregation>>> derivations_;
};

using SchemaPtr = std::shared_ptr<const Schema>;

}  // namespace erasure
