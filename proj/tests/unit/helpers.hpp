#pragma once

#include <filesystem>
#include <string>

#include "promptforge/error.hpp"

namespace pftest {

inline std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(PF_FIXTURES) / rel; }
inline std::filesystem::path golden(const std::string& rel) { return std::filesystem::path(PF_GOLDEN) / rel; }

inline std::string stub(const std::string& name) { return "sh " + fixture("bin/" + name).string(); }

/// Error code thrown by `fn`; a plain runtime_error when nothing is thrown.
template <class F>
promptforge::ErrorCode code_of(F&& fn) {
  try {
    fn();
  } catch (const promptforge::Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected a promptforge::Error");
}

}  // namespace pftest
