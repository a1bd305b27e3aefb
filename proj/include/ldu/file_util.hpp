#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ldu {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Writes to `<path>.tmp` and renames over `path`, so readers never see a
// partial file. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace ldu
