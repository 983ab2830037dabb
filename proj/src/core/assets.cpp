#include "assets.hpp"

#include <map>
#include <mutex>

#include "workbench/digest.hpp"
#include "workbench/error.hpp"

namespace workbench::assets {

void verify_checksum(std::string_view name, std::string_view text, std::string_view expected) {
  if (sha256_hex(text) != expected) {
    fail(ErrorCode::TemplateCorruption,
         "embedded asset " + std::string(name) + " does not match its recorded checksum");
  }
}

std::string_view verified(std::string_view name) {
  static std::mutex mutex;
  static std::map<std::string, bool, std::less<>> checked;
  for (const Asset& asset : all()) {
    if (asset.name != name) continue;
    std::lock_guard lock(mutex);
    auto it = checked.find(name);
    if (it == checked.end()) {
      verify_checksum(asset.name, asset.text, asset.sha256);
      checked.emplace(std::string(name), true);
    }
    return asset.text;
  }
  fail(ErrorCode::InvalidArgument, "no embedded asset named " + std::string(name));
}

}  // namespace workbench::assets
