#pragma once

#include "svgpmap/errors.hpp"

#include <bit>
#include <filesystem>
#include <fstream>

namespace svgpmap::detail {

static_assert(std::endian::native == std::endian::little, "file formats assume a little-endian host");

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::filesystem::path& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error(ErrorCode::Io, "truncated file " + path.string());
  return v;
}

}  // namespace svgpmap::detail
