/**
 * Error type shared by every module.
 *
 * Each error carries a short machine-readable code (e.g. "cycle_detected")
 * next to the human-readable message; the CLI serializes both to JSON.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace treewind {

class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

} // namespace treewind
