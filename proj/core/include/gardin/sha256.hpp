#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace gardin {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

}  // namespace gardin
