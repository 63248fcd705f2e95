#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>

namespace erasure {

/// Integer ticks. The unit is up to the caller (seconds in the synthetic workloads).
using Timestamp = std::int64_t;
using RecordId = std::int64_t;

/// NULL is the empty alternative and compares unequal to every domain value.
class Value {
 public:
  using Storage = std::variant<std::monostate, std::int64_t, double, std::string>;

  Value() = default;
  Value(std::int64_t v) : data_(v) {}
  Value(int v) : data_(static_cast<std::int64_t>(v)) {}
  Value(double v) : data_(v) {}
  Value(std::string v) : data_(std::move(v)) {}
  Value(const char* v) : data_(std::string(v)) {}

  static Value null() { return Value(); }

  bool is_null() const { return std::holds_alternative<std::monostate>(data_); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(data_); }
  bool is_double() const { return std::holds_alternative<double>(data_); }
  bool is_string() const { return std::holds_alternative<std::string>(data_); }
  bool is_numeric() const { return is_int() || is_double(); }

  std::int64_t as_int() const { return std::get<std::int64_t>(data_); }
  double as_double() const { return is_int() ? static_cast<double>(as_int()) : std::get<double>(data_); }
  const std::string& as_string() const { return std::get<std::string>(data_); }

  const Storage& storage() const { return data_; }

  /// Structural equality (NULL == NULL here); SQL-style comparison lives in compare().
  friend bool operator==(const Value& a, const Value& b) {
    if (a.is_numeric() && b.is_numeric()) {
      if (a.is_int() && b.is_int()) return a.as_int() == b.as_int();
      return a.as_double() == b.as_double();
    }
    return a.data_ == b.data_;
  }

  std::string to_string() const;

 private:
  Storage data_;
};

std::ostream& operator<<(std::ostream& os, const Value& v);

/// Three-way comparison of two non-NULL values of compatible type.
/// Returns nullopt when either side is NULL or the types are incomparable.
std::optional<std::partial_ordering> compare(const Value& a, const Value& b);

/// Hash usable for join keys; numeric values hash by their double image so 3 and 3.0 collide.
struct ValueHash {
  std::size_t operator()(const Value& v) const;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace erasure
