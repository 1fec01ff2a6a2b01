#pragma once

#include <functional>
#include <string>

#include "doctest.h"
#include "roughhedge/error.hpp"

// Checks that fn throws roughhedge::Error of the given kind; returns the message.
inline std::string expect_error(const std::function<void()>& fn, roughhedge::ErrorKind kind) {
  try {
    fn();
  } catch (const roughhedge::Error& e) {
    CHECK_MESSAGE(e.kind() == kind, "got kind ", roughhedge::to_string(e.kind()), ": ",
                  e.what());
    return e.what();
  }
  FAIL_CHECK("no roughhedge::Error thrown");
  return {};
}
