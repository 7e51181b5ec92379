#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ops {

/// Lowercase hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

/// 64-bit FNV-1a; used only for deriving RNG stream ids, never for content.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace ops
