#pragma once

#include <cstdint>
#include <string>

namespace macs {

// SHA-256 of a byte string, returned as lowercase hex. Used for the run
// manifest's artifact hashes.
std::string sha256_hex(const std::string& bytes);

// SHA-256 of a file's contents; throws DataError if the file cannot be read.
std::string sha256_file_hex(const std::string& path);

}  // namespace macs
