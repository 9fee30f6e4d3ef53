#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace homectx::csv {

/// Splits one RFC 4180 record. Returns nullopt on an unterminated quote.
std::optional<std::vector<std::string>> split(std::string_view line);

/// Quotes a field when it contains a comma, quote or line break.
std::string field(std::string_view raw);

std::string join(const std::vector<std::string>& fields);

}  // namespace homectx::csv
