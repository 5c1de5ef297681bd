#pragma once

#include <cstdint>

namespace svgpmap {

/// Independent random streams split from one master seed.
enum class Stream : std::uint64_t {
  Terrain = 1,
  SurveyNoise = 2,
  InducingInit = 3,
  MinibatchSelect = 4,
  MinibatchNoise = 5,
  ParticleInit = 6,
  ParticleMotion = 7,
  Resample = 8,
  LocalizationMission = 9,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based derivation: the same (master, stream, index) always maps to
/// the same seed, so stages can be rerun independently.
inline std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t index = 0) {
  return splitmix64(splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(stream))) + index);
}

}  // namespace svgpmap
