#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "erasure/rdr.hpp"

namespace erasure {

/// Person, Posts, PostedBy, Device and Statistics with derived totLikes, freqLoc and
/// activity.
std::string social_schema_json();
SchemaPtr social_schema();

/// Rules R1..R6 over the social schema; `ids` selects a subset (empty: all).
std::string social_rules_text(const std::vector<std::string>& ids = {});
std::vector<RDR> social_rules(const Schema& schema, const std::vector<std::string>& ids = {});

enum class UpdateMode { Bursty, Continuous, Simultaneous };
std::string_view to_string(UpdateMode m);
std::optional<UpdateMode> parse_update_mode(std::string_view text);

struct SyntheticSpec {
  std::uint64_t seed = 1;
  std::size_t users = 10;
  std::size_t posts_per_user = 5;
  UpdateMode mode = UpdateMode::Bursty;
  Timestamp horizon = 7 * 86400;
  std::size_t erasures = 10;         // erase requests on rule member cells
  Timestamp erase_after = 0;         // no erase request before this time
  std::size_t updates_per_user = 3;  // device moves and like updates
  std::vector<std::string> rules;    // empty: R1..R6
};

struct SyntheticData {
  std::string schema_json;
  std::string rules_text;
  std::vector<Event> workload;
};

/// Deterministic per spec. Erase requests target distinct cells after their last write.
SyntheticData gen_synthetic(const SyntheticSpec& spec);

/// Writes schema.json, rules.txt and workload.tsv into `dir`.
void write_synthetic(const SyntheticData& data, const std::string& dir);

}  // namespace erasure
