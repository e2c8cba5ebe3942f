#pragma once

#include "photomesh/core.hpp"

#include <doctest.h>

#include <filesystem>
#include <string>

// Expression must throw photomesh::Error with the given code.
#define CHECK_ERROR_CODE(expr, expected)                                       \
  do {                                                                         \
    bool thrown_ = false;                                                      \
    try {                                                                      \
      (void)(expr);                                                            \
    } catch (const photomesh::Error &e_) {                                     \
      thrown_ = true;                                                          \
      CHECK_MESSAGE(e_.code() == (expected), e_.what());                       \
    }                                                                          \
    CHECK_MESSAGE(thrown_, "no photomesh::Error from " #expr);                 \
  } while (0)

// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string &name) {
  const auto dir = std::filesystem::temp_directory_path() / ("photomesh_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}
