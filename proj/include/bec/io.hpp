#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace bec::io {

std::uint64_t fnv1a64(std::string_view data);

/// 16 hex digits of the FNV-1a hash of the compact JSON dump.
std::string config_hash(const nlohmann::json& config);

/// Writes to a temporary sibling and renames over path.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace bec::io
