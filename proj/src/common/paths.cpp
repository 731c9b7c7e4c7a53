#include "guided/paths.hpp"

#include <cstdlib>

namespace guided {

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("GUIDED_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return GUIDED_DEFAULT_DATA_DIR;
}

}  // namespace guided
