#pragma once

// Line-oriented key = value text and round-trip float printing shared by the
// model serializer, the run configuration and every CSV writer.

#include <string>
#include <string_view>
#include <vector>

namespace pathsa {

struct KeyValue {
  std::string key;
  std::string value;
  int line;  // 1-based
};

/// Splits `key = value` lines; blank lines and `#` comments are skipped.
/// Throws ConfigError (with the line number) on a line without '=' or an empty key.
std::vector<KeyValue> parse_key_values(std::string_view text);

/// Strict parsers: the whole token must be consumed. ConfigError on failure.
double parse_real(std::string_view token, int line = 0);
long long parse_integer(std::string_view token, int line = 0);
unsigned long long parse_unsigned(std::string_view token, int line = 0);

/// 17 significant digits, "%.17g"; round-trips every finite double.
std::string format_double(double v);

}  // namespace pathsa
