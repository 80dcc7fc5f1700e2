#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "skyoctopus/error.hpp"
#include "skyoctopus/geo.hpp"

#ifndef SKO_TEST_DATA_DIR
#define SKO_TEST_DATA_DIR "."
#endif

namespace testing {

inline std::string data_path(const std::string& name) { return std::string(SKO_TEST_DATA_DIR) + "/" + name; }

// Runs `f` and returns the kind of the skyoct::Error it throws.
template <typename F>
std::optional<skyoct::ErrorKind> error_kind(F&& f) {
  try {
    f();
  } catch (const skyoct::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

// Point on the ground directly below an ECEF position.
inline skyoct::GroundSite below(const skyoct::EcefPosition& p, std::string id = "below") {
  const double r = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
  return {std::move(id), skyoct::rad_to_deg(std::asin(p.z / r)), skyoct::rad_to_deg(std::atan2(p.y, p.x))};
}

}  // namespace testing
