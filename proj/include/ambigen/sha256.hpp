#pragma once

#include <cstddef>
#include <string>

namespace ambigen {

std::string sha256_hex(const void* data, size_t len);
std::string sha256_hex(const std::string& s);
// Throws Error if the file cannot be read.
std::string sha256_file(const std::string& path);

} // namespace ambigen
