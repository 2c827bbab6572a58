#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace slabdens {

/// Observations X_1, ..., X_N together with the RNG coordinates that
/// produced them (seed 0/stream 0 for data loaded from disk).
struct Sample {
  std::vector<double> points;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  int n() const { return static_cast<int>(points.size()); }
};

/// Reads a sample from a text file, one decimal value per line.
Sample read_sample(const std::string& path);

/// Writes a sample as text, one value per line with 17 significant
/// digits (exact double round trip).
void write_sample(const Sample& sample, const std::string& path);

}  // namespace slabdens
