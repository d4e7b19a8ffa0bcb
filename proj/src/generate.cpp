#include "emdsparse/generate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace emdsparse {

ImageKind parse_image_kind(std::string_view name) {
  if (name == "clusters") return ImageKind::clusters;
  if (name == "uniform_noise") return ImageKind::uniform_noise;
  if (name == "clusters_plus_noise") return ImageKind::clusters_plus_noise;
  throw std::invalid_argument("unknown image kind: " + std::string(name));
}

std::string_view image_kind_name(ImageKind kind) {
  switch (kind) {
    case ImageKind::clusters: return "clusters";
    case ImageKind::uniform_noise: return "uniform_noise";
    case ImageKind::clusters_plus_noise: return "clusters_plus_noise";
  }
  return "?";
}

GridImage generate(const GenOptions& o) {
  require_delta(o.delta);
  if (o.k < 1) throw std::invalid_argument("k must be at least 1");
  if (o.spread < 0.0) throw std::invalid_argument("spread must be nonnegative");
  if (o.total_mass < 0) throw std::invalid_argument("total mass must be nonnegative");
  if (o.noise_fraction < 0.0 || o.noise_fraction > 1.0) throw std::invalid_argument("noise fraction must lie in [0, 1]");

  std::mt19937_64 rng(o.seed);
  std::uniform_int_distribution<int> coord(0, o.delta - 1);
  GridImage x(o.delta);

  long cluster_units = o.total_mass;
  if (o.kind == ImageKind::uniform_noise) cluster_units = 0;
  if (o.kind == ImageKind::clusters_plus_noise)
    cluster_units = o.total_mass - std::lround(o.noise_fraction * double(o.total_mass));

  if (cluster_units > 0) {
    std::vector<std::pair<int, int>> centers;
    for (int j = 0; j < o.k; ++j) centers.push_back({coord(rng), coord(rng)});
    std::normal_distribution<double> offset(0.0, o.spread);
    for (long u = 0; u < cluster_units; ++u) {
      const auto [cr, cc] = centers[static_cast<std::size_t>(u % o.k)];
      int r = cr, c = cc;
      if (o.spread > 0.0) {
        r = std::clamp(cr + static_cast<int>(std::lround(offset(rng))), 0, o.delta - 1);
        c = std::clamp(cc + static_cast<int>(std::lround(offset(rng))), 0, o.delta - 1);
      }
      x.at(r, c) += 1.0;
    }
  }
  for (long u = cluster_units; u < o.total_mass; ++u) {
    const int r = coord(rng), c = coord(rng);
    x.at(r, c) += 1.0;
  }
  return x;
}

}  // namespace emdsparse
