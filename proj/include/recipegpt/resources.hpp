#pragma once

#include <cstdlib>
#include <string>
#include <string_view>

namespace recipegpt {

/// Path of a bundled data file. RECIPEGPT_DATA overrides the build-time directory.
inline std::string data_path(std::string_view file) {
  const char* env = std::getenv("RECIPEGPT_DATA");
  std::string dir = env && *env ? env : RECIPEGPT_DATA_DIR;
  return dir + "/" + std::string(file);
}

}  // namespace recipegpt
