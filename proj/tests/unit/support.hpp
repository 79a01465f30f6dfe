#pragma once

#include <filesystem>
#include <string>

#include "doctest.h"
#include "dyneq/error.hpp"
#include "dyneq/model/case.hpp"

namespace test {

inline std::filesystem::path data(const std::string& name) {
  return std::filesystem::path(DYNEQ_DATA_DIR) / name;
}

inline dyneq::PowerSystemCase two_area() { return dyneq::load_case(data("two_area.json")); }
inline dyneq::PowerSystemCase smib() { return dyneq::load_case(data("smib.json")); }

template <class F>
dyneq::ErrorKind error_kind(F&& f) {
  try {
    f();
  } catch (const dyneq::Error& e) {
    return e.kind();
  }
  FAIL("expected dyneq::Error");
  return dyneq::ErrorKind::Io;
}

}  // namespace test
