#pragma once

#include <span>
#include <string>
#include <string_view>

namespace workbench::assets {

struct Asset {
  std::string_view name;    // path relative to the source root
  std::string_view text;
  std::string_view sha256;  // digest of the source file at configure time
};

std::span<const Asset> all();

// Looks up an embedded asset and checks its checksum; throws
// TemplateCorruption on mismatch and InvalidArgument for unknown names.
std::string_view verified(std::string_view name);

// Throws TemplateCorruption unless sha256(text) == expected.
void verify_checksum(std::string_view name, std::string_view text, std::string_view expected);

}  // namespace workbench::assets
