#ifndef DTKI_TESTS_GOLDEN_UTIL_H_
#define DTKI_TESTS_GOLDEN_UTIL_H_

#include <gtest/gtest.h>

#include <fstream>
#include <iterator>
#include <string>

#include "dtki/bytes.h"

namespace dtki::testing {

// Compares `actual` with tests/golden/<name>. The files come from
// tests/oracle/golden.py, not from this library.
inline void ExpectGolden(const std::string& name, const Bytes& actual) {
  const std::string path = std::string(DTKI_GOLDEN_DIR) + "/" + name;
  std::ifstream in(path, std::ios::binary);
  ASSERT_TRUE(in) << "missing golden file " << path;
  Bytes expected((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(HexEncode(actual), HexEncode(expected)) << name;
}

}  // namespace dtki::testing

#endif  // DTKI_TESTS_GOLDEN_UTIL_H_
