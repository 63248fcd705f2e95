#include "erasure/value.hpp"

#include <cmath>
#include <functional>
#include <sstream>

namespace erasure {

std::string Value::to_string() const {
  if (is_null()) return "NULL";
  if (is_int()) return std::to_string(as_int());
  if (is_double()) {
    std::ostringstream os;
    os << std::get<double>(data_);
    return os.str();
  }
  return as_string();
}

std::ostream& operator<<(std::ostream& os, const Value& v) { return os << v.to_string(); }

std::optional<std::partial_ordering> compare(const Value& a, const Value& b) {
  if (a.is_null() || b.is_null()) return std::nullopt;
  if (a.is_int() && b.is_int()) return a.as_int() <=> b.as_int();
  if (a.is_numeric() && b.is_numeric()) return a.as_double() <=> b.as_double();
  if (a.is_string() && b.is_string()) {
    int c = a.as_string().compare(b.as_string());
    return c < 0 ? std::partial_ordering::less
                 : (c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent);
  }
  return std::nullopt;
}

std::size_t ValueHash::operator()(const Value& v) const {
  if (v.is_null()) return 0x9e3779b97f4a7c15ULL;
  if (v.is_numeric()) return std::hash<double>{}(v.as_double());
  return std::hash<std::string>{}(v.as_string());
}

}  // namespace erasure
