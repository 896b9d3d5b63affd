#pragma once

#include <cstdio>
#include <string>

namespace mgrao {

// Canonical number rendering for emitted files and state dumps: 9
// significant digits, shortest form ("%.9g"). Using one helper everywhere
// keeps emitted artifacts byte-stable across call sites.
inline std::string to_sig9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace mgrao
