#include "emdsparse/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "emdsparse/emd.hpp"
#include "emdsparse/haar.hpp"
#include "emdsparse/io.hpp"
#include "emdsparse/pyramid.hpp"
#include "emdsparse/randrec.hpp"
#include "emdsparse/tree.hpp"

namespace emdsparse {

Scheme parse_scheme(std::string_view name) {
  for (Scheme s : all_schemes())
    if (scheme_name(s) == name) return s;
  throw std::invalid_argument("unknown scheme: " + std::string(name));
}

std::string_view scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::pyramid_dense: return "pyramid_dense";
    case Scheme::pyramid_tree_cosamp: return "pyramid_tree_cosamp";
    case Scheme::pyramid_randomized: return "pyramid_randomized";
    case Scheme::haar_tree_cosamp: return "haar_tree_cosamp";
  }
  return "?";
}

std::vector<Scheme> all_schemes() {
  return {Scheme::pyramid_dense, Scheme::pyramid_tree_cosamp, Scheme::pyramid_randomized,
          Scheme::haar_tree_cosamp};
}

void validate(const SchemeConfig& c) {
  require_delta(c.delta);
  const std::size_t n = static_cast<std::size_t>(c.delta) * c.delta;
  if (c.k < 1 || static_cast<std::size_t>(c.k) > n / 2) throw std::invalid_argument("k must lie in [1, n/2]");
  if (!(c.eps > 0.0 && c.eps <= 1.0)) throw std::invalid_argument("eps must lie in (0, 1]");
  if (!(c.c_rows > 0.0) || !(c.c_dense > 0.0)) throw std::invalid_argument("row constants must be positive");
  if (!(c.c_w >= 1.0)) throw std::invalid_argument("c_w must be at least 1");
  if (!(c.bucket_factor > 0.0) || c.c_sq == 0 || c.repetitions == 0)
    throw std::invalid_argument("randomized sketch constants must be positive");
}

SchemeDims scheme_dims(const SchemeConfig& c) {
  validate(c);
  const Grid grid(c.delta);
  const double inv_eps2 = 1.0 / (c.eps * c.eps);
  SchemeDims d;
  d.coefficients = c.scheme == Scheme::haar_tree_cosamp ? grid.pixels() : grid.cells();
  const auto k = static_cast<std::size_t>(c.k);
  d.tree_budget = std::min(grid.cells(), static_cast<std::size_t>(std::ceil(
                                             double(claim_tree_size_bound(c.delta, k)) * inv_eps2 - 1e-9)));
  switch (c.scheme) {
    case Scheme::pyramid_dense: {
      d.budget = d.tree_budget;
      const double m = c.c_dense * double(d.budget) * std::log2(double(d.coefficients) / double(d.budget));
      d.rows = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(m - 1e-9)));
      break;
    }
    case Scheme::pyramid_tree_cosamp:
      d.budget = d.tree_budget;
      d.rows = static_cast<std::size_t>(std::ceil(c.c_rows * double(d.budget) - 1e-9));
      break;
    case Scheme::haar_tree_cosamp:
      // Level-0 cells carry no Haar coefficients; at most k of the tree's cells sit there.
      d.budget = std::min(grid.pixels(), 3 * (d.tree_budget - std::min(d.tree_budget, k)) + 1);
      d.rows = static_cast<std::size_t>(std::ceil(c.c_rows * double(d.budget) - 1e-9));
      break;
    case Scheme::pyramid_randomized: {
      d.width = static_cast<std::size_t>(std::ceil(c.c_w * double(c.k) * inv_eps2 - 1e-9));
      const RandomizedSketch rs(c.delta, RandomizedConfig{d.width, c.bucket_factor, c.c_sq, c.repetitions,
                                                          c.peel_rounds, c.seed});
      d.rows = rs.rows();
      d.budget = d.width;
      break;
    }
  }
  if (c.scheme != Scheme::pyramid_randomized && d.rows > d.coefficients)
    throw std::invalid_argument("configured rows exceed the coefficient count");
  return d;
}

double row_constant(const SchemeConfig& c) {
  switch (c.scheme) {
    case Scheme::pyramid_dense: return 7.0 * c.c_dense;
    case Scheme::pyramid_tree_cosamp: return 7.0 * c.c_rows;
    case Scheme::haar_tree_cosamp: return 21.0 * c.c_rows;
    case Scheme::pyramid_randomized:
      return (c.c_w + 1.0) *
             (c.bucket_factor + 1.0 + 2.0 * double(c.repetitions) * double(c.c_sq) + 8.0 / 3.0);
  }
  return 0.0;
}

double row_bound(const SchemeConfig& c) {
  validate(c);
  const double n = double(c.delta) * c.delta, k = c.k;
  const double lognk = std::log2(n / k);
  const double base = row_constant(c) * (k / (c.eps * c.eps)) * lognk;
  switch (c.scheme) {
    case Scheme::pyramid_dense: return base * std::log2(n) + 1.0;
    case Scheme::pyramid_tree_cosamp:
    case Scheme::haar_tree_cosamp: return base + 1.0;
    case Scheme::pyramid_randomized: return base;
  }
  return 0.0;
}

namespace {

RandomizedSketch randomized_sketch(const SchemeConfig& c, const SchemeDims& d) {
  return RandomizedSketch(c.delta,
                          RandomizedConfig{d.width, c.bucket_factor, c.c_sq, c.repetitions, c.peel_rounds, c.seed});
}

std::vector<double> embed(Scheme scheme, const GridImage& x) {
  if (scheme == Scheme::haar_tree_cosamp) return haar_transform(x).values;
  return pyramid_transform(x).values;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

std::vector<double> sketch(const SchemeConfig& c, const GridImage& x) {
  const SchemeDims d = scheme_dims(c);
  if (x.delta() != c.delta) throw std::invalid_argument("image delta does not match config");
  if (!x.nonnegative()) throw std::invalid_argument("sketch input must be nonnegative");
  if (c.scheme == Scheme::pyramid_randomized)
    return randomized_sketch(c, d).apply(pyramid_transform(x));
  const DenseSketch a = make_dense_sketch(d.rows, d.coefficients, c.seed);
  return to_std(a.apply(embed(c.scheme, x)));
}

Recovery recover(const SchemeConfig& c, const std::vector<double>& measurements) {
  const SchemeDims d = scheme_dims(c);
  if (measurements.size() != d.rows) throw std::invalid_argument("measurement count does not match config");
  Recovery out;
  if (c.scheme == Scheme::pyramid_randomized) {
    const RandomizedResult r = randomized_l1l1_recover(randomized_sketch(c, d), measurements);
    out.y = r.y.values;
    out.support_size = r.support.support.cells.size();
  } else {
    const DenseSketch a = make_dense_sketch(d.rows, d.coefficients, c.seed);
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(measurements.data(), Eigen::Index(measurements.size()));
    CosampResult r;
    if (c.scheme == Scheme::pyramid_dense) {
      r = model_cosamp(a, b, d.budget, top_k_projector(), c.cosamp);
    } else {
      const CoefficientTree tree = c.scheme == Scheme::haar_tree_cosamp ? CoefficientTree::haar(c.delta)
                                                                        : CoefficientTree::pyramid(c.delta);
      r = l1l1_tree_recover(a, b, tree, d.budget, c.cosamp);
    }
    out.y = std::move(r.y);
    out.support_size = r.support.size();
    out.iterations = r.iterations;
    out.regularized = r.regularized;
  }
  if (c.scheme == Scheme::haar_tree_cosamp) {
    out.x = haar_inverse(HaarCoeffs{c.delta, out.y});
  } else {
    // P x >= 0 for every x >= 0, so clamping can only move y* closer to it.
    for (double& v : out.y) v = std::max(v, 0.0);
    out.x = pyramid_invert(PyramidCoeffs{c.delta, out.y});
  }
  return out;
}

Sparsified strict_sparsify(const GridImage& x, int k, const KMedianOptions& options) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (!x.nonnegative()) throw std::invalid_argument("strict_sparsify requires a nonnegative image");
  Sparsified out;
  if (x.support().size() <= static_cast<std::size_t>(k)) {
    out.image = x;
    for (std::size_t p : x.support()) {
      out.clustering.centers.push_back(p);
      out.clustering.weights.push_back(x[p]);
    }
    out.clustering.exact = true;
    return out;
  }
  out.clustering = weighted_k_median(x, k, options);
  out.image = clustered_image(x.delta(), out.clustering);
  return out;
}

RecoveryReport run_trial(const SchemeConfig& c, const GridImage& x) {
  RecoveryReport rep;
  rep.scheme = std::string(scheme_name(c.scheme));
  rep.delta = c.delta;
  rep.k = c.k;
  rep.eps = c.eps;
  rep.seed = c.seed;

  const auto start = std::chrono::steady_clock::now();
  const std::vector<double> meas = sketch(c, x);
  const Recovery rec = recover(c, meas);
  GridImage xpos = rec.x;
  for (double& v : xpos.values()) v = std::max(v, 0.0);
  const Sparsified hat = strict_sparsify(xpos, c.k, c.median);
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  rep.rows_used = meas.size();

  const double tol = 1e-9 * std::max(1.0, x.l1_norm() * c.delta);
  const std::vector<double> bx = embed(c.scheme, x);
  const std::vector<double> bxs = embed(c.scheme, rec.x);
  rep.inner_l1 = l1_distance(rec.y, bx);
  rep.inner_l1_inverted = l1_distance(rec.y, bxs);
  rep.embed_l1 = l1_distance(bx, bxs);
  rep.emd_error_raw = emd_distance(x, rec.x);
  rep.chain_ok = rep.emd_error_raw <= rep.embed_l1 + tol &&
                 rep.embed_l1 <= rep.inner_l1 + rep.inner_l1_inverted + tol;

  rep.emd_error = emd_distance(x, hat.image);
  const KMedianResult best = weighted_k_median(x, c.k, c.median);
  const GridImage xprime = clustered_image(c.delta, best);
  rep.best_k_sparse_emd = best.cost;
  rep.exact = best.cost <= tol;
  rep.ratio = rep.exact ? 0.0 : rep.emd_error / best.cost;

  // Strict-sparsity composition, with x* the nonnegative image handed to the sparsifier.
  const double star = emd_distance(xpos, x);
  rep.c_measured = rep.exact ? 0.0 : star / best.cost;
  const double moved = emd_distance(hat.image, xpos);
  const double self_cost = xpos.support().size() <= static_cast<std::size_t>(c.k) ? 0.0 : hat.clustering.cost;
  const double denom = std::min(self_cost, emd_distance(xprime, xpos));
  if (moved <= tol)
    rep.c_prime = 0.0;
  else
    rep.c_prime = denom > 0.0 ? moved / denom : std::numeric_limits<double>::infinity();
  const double rhs = std::isfinite(rep.c_prime) ? (rep.c_prime + 1.0) * star + rep.c_prime * best.cost : rep.emd_error;
  rep.claim_ok = rep.emd_error <= rhs + tol;
  rep.success = rep.chain_ok && rep.claim_ok && std::isfinite(rep.emd_error);
  return rep;
}

void write_sketch(std::ostream& out, const SchemeConfig& c, const std::vector<double>& measurements) {
  out << "EMDSKT v1\n";
  out << "scheme " << scheme_name(c.scheme) << "\n";
  out << "delta " << c.delta << "\nk " << c.k << "\neps " << format_exact(c.eps) << "\nseed " << c.seed << "\n";
  out << "c_rows " << format_exact(c.c_rows) << "\nc_dense " << format_exact(c.c_dense) << "\nc_w "
      << format_exact(c.c_w) << "\nbucket_factor " << format_exact(c.bucket_factor) << "\nc_sq " << c.c_sq
      << "\nrepetitions " << c.repetitions << "\npeel_rounds " << c.peel_rounds << "\n";
  out << "measurements " << measurements.size() << "\n";
  for (std::size_t i = 0; i < measurements.size(); ++i)
    out << format_exact(measurements[i]) << ((i + 1) % 8 == 0 || i + 1 == measurements.size() ? "\n" : " ");
}

namespace {

double parse_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::runtime_error("bad number in sketch file: " + s);
  return v;
}

}  // namespace

std::pair<SchemeConfig, std::vector<double>> read_sketch(std::istream& in) {
  std::string magic, version;
  if (!(in >> magic >> version) || magic != "EMDSKT" || version != "v1")
    throw std::runtime_error("not an EMDSKT v1 sketch");
  SchemeConfig c;
  std::string key, value;
  while (in >> key >> value) {
    if (key == "scheme") c.scheme = parse_scheme(value);
    else if (key == "delta") c.delta = std::stoi(value);
    else if (key == "k") c.k = std::stoi(value);
    else if (key == "eps") c.eps = parse_double(value);
    else if (key == "seed") c.seed = std::stoull(value);
    else if (key == "c_rows") c.c_rows = parse_double(value);
    else if (key == "c_dense") c.c_dense = parse_double(value);
    else if (key == "c_w") c.c_w = parse_double(value);
    else if (key == "bucket_factor") c.bucket_factor = parse_double(value);
    else if (key == "c_sq") c.c_sq = std::stoull(value);
    else if (key == "repetitions") c.repetitions = std::stoull(value);
    else if (key == "peel_rounds") c.peel_rounds = std::stoi(value);
    else if (key == "measurements") break;
    else throw std::runtime_error("unknown sketch field: " + key);
  }
  if (key != "measurements") throw std::runtime_error("sketch file has no measurements");
  const std::size_t count = std::stoull(value);
  std::vector<double> meas(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::string tok;
    if (!(in >> tok)) throw std::runtime_error("sketch file truncated");
    meas[i] = parse_double(tok);
  }
  validate(c);
  return {c, meas};
}

}  // namespace emdsparse
