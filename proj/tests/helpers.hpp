#pragma once

#include <string>

namespace testutil {

inline std::string repo_path(const std::string& relative) {
    return std::string(RELOOPER_REPO_DIR) + "/" + relative;
}

}  // namespace testutil
