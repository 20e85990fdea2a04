#pragma once

#include <doctest.h>

#include "sosp/properties.hpp"

// Fails with the property's detail string attached.
#define CHECK_PROPERTY(expr)                              \
  do {                                                    \
    const ::sosp::PropertyResult prop_result_ = (expr);   \
    INFO(prop_result_.name, ": ", prop_result_.detail);   \
    CHECK(prop_result_.passed);                           \
  } while (0)
