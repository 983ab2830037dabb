#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace workbench::csv {

// RFC 4180 style: comma separated, double-quoted fields may hold commas,
// quotes ("") and newlines. A leading UTF-8 BOM and CR line endings are
// tolerated. Blank lines are skipped.
std::vector<std::vector<std::string>> parse(std::string_view text);

// Quotes the field when it contains a comma, quote or newline.
std::string field(std::string_view value);

}  // namespace workbench::csv
