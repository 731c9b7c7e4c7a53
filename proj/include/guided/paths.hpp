#pragma once

#include <filesystem>

namespace guided {

// $GUIDED_DATA_DIR if set, else the data/ directory of the source tree.
std::filesystem::path data_dir();

}  // namespace guided
