// Minimal RFC 4180 field quoting and record splitting.
#pragma once

#include <string>
#include <vector>

namespace hedp {

/// Quotes a field when it holds a comma, quote or line break.
std::string csv_field(const std::string& s);
std::string csv_row(const std::vector<std::string>& fields);

/// Splits CSV text into records. Quoted fields may contain commas, doubled
/// quotes and line breaks. Throws std::runtime_error on an unclosed quote.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace hedp
