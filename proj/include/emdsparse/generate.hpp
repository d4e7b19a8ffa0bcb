#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "emdsparse/grid.hpp"

namespace emdsparse {

enum class ImageKind { clusters, uniform_noise, clusters_plus_noise };

ImageKind parse_image_kind(std::string_view name);
std::string_view image_kind_name(ImageKind kind);

struct GenOptions {
  ImageKind kind = ImageKind::clusters_plus_noise;
  int delta = 32;
  int k = 4;
  /// Standard deviation (pixels) of the per-unit offset from a cluster center.
  double spread = 1.0;
  /// Total number of unit masses.
  long total_mass = 1000;
  /// Fraction of units scattered uniformly by clusters_plus_noise.
  double noise_fraction = 0.05;
  std::uint64_t seed = 0;
};

/// Integer-valued nonnegative image, deterministic in the options. Cluster
/// units land at the center plus a rounded Gaussian offset, clamped to the grid;
/// spread 0 gives an image with at most k nonzeros.
GridImage generate(const GenOptions& options);

}  // namespace emdsparse
