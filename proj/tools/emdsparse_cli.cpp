#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "emdsparse/emd.hpp"
#include "emdsparse/generate.hpp"
#include "emdsparse/haar.hpp"
#include "emdsparse/io.hpp"
#include "emdsparse/pipeline.hpp"
#include "emdsparse/pyramid.hpp"

using namespace emdsparse;

namespace {

// Exit codes besides CLI11's own parse errors.
constexpr int kRuntimeError = 1;
constexpr int kIncompleteTrials = 3;

struct SchemeFlags {
  std::string scheme = "pyramid_tree_cosamp";
  int delta = 32;
  int k = 4;
  double eps = 1.0;
  std::uint64_t seed = 0;
  SchemeConfig extra;
};

void add_scheme_flags(CLI::App* app, SchemeFlags& f, bool with_delta) {
  app->add_option("--scheme", f.scheme, "pyramid_dense | pyramid_tree_cosamp | pyramid_randomized | haar_tree_cosamp")
      ->capture_default_str();
  if (with_delta) app->add_option("--delta", f.delta, "grid side, a power of two")->capture_default_str();
  app->add_option("--k", f.k, "sparsity")->capture_default_str();
  app->add_option("--eps", f.eps, "accuracy parameter in (0, 1]")->capture_default_str();
  app->add_option("--seed", f.seed, "measurement seed")->capture_default_str();
  app->add_option("--c-rows", f.extra.c_rows, "tree schemes: rows per model coefficient")->capture_default_str();
  app->add_option("--c-dense", f.extra.c_dense, "pyramid_dense row constant")->capture_default_str();
  app->add_option("--c-w", f.extra.c_w, "randomized width constant")->capture_default_str();
  app->add_option("--bucket-factor", f.extra.bucket_factor, "randomized buckets per unit of width")
      ->capture_default_str();
}

SchemeConfig to_config(const SchemeFlags& f, Scheme scheme, int delta, std::uint64_t seed) {
  SchemeConfig c = f.extra;
  c.scheme = scheme;
  c.delta = delta;
  c.k = f.k;
  c.eps = f.eps;
  c.seed = seed;
  validate(c);
  return c;
}

// Writes to `path`, or stdout when it is empty or "-".
template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  fn(out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string g9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

constexpr const char* kCsvHeader =
    "scheme,delta,k,eps,seed,rows_used,emd_error,emd_error_raw,best_k_sparse_emd,ratio,ratio_flag,inner_l1,"
    "inner_l1_inverted,embed_l1,chain_ok,c_measured,c_prime,claim_ok,success,wall_ms,error";

struct Row {
  RecoveryReport report;
  std::string error;
};

std::string csv_row(const Row& row) {
  const RecoveryReport& r = row.report;
  std::string s = r.scheme + "," + std::to_string(r.delta) + "," + std::to_string(r.k) + "," + g9(r.eps) + "," +
                  std::to_string(r.seed) + "," + std::to_string(r.rows_used) + ",";
  if (!row.error.empty()) {
    s += ",,,,failed,,,,,,,,0,,";
    std::string msg = row.error;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    return s + msg;
  }
  s += g9(r.emd_error) + "," + g9(r.emd_error_raw) + "," + g9(r.best_k_sparse_emd) + "," + g9(r.ratio) + "," +
       (r.exact ? "exact" : "measured") + "," + g9(r.inner_l1) + "," + g9(r.inner_l1_inverted) + "," +
       g9(r.embed_l1) + "," + (r.chain_ok ? "1" : "0") + "," + g9(r.c_measured) + "," + g9(r.c_prime) + "," +
       (r.claim_ok ? "1" : "0") + "," + (r.success ? "1" : "0") + "," + g9(r.wall_ms) + ",";
  return s;
}

// Nearest-rank percentile of a sorted vector.
double percentile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return std::nan("");
  const auto rank = static_cast<std::size_t>(std::ceil(p * double(sorted.size())));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

void write_aggregate(std::ostream& out, const std::vector<Row>& rows) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const Row*>> by;
  for (const Row& r : rows) {
    if (!by.count(r.report.scheme)) order.push_back(r.report.scheme);
    by[r.report.scheme].push_back(&r);
  }
  out << "scheme,trials,exact,failed,median_ratio,p90_ratio\n";
  for (const std::string& s : order) {
    std::vector<double> ratios;
    std::size_t exact = 0, failed = 0;
    for (const Row* r : by[s]) {
      if (!r->error.empty() || !r->report.success) ++failed;
      if (!r->error.empty()) continue;
      if (r->report.exact)
        ++exact;
      else
        ratios.push_back(r->report.ratio);
    }
    std::sort(ratios.begin(), ratios.end());
    out << s << "," << by[s].size() << "," << exact << "," << failed << "," << g9(percentile(ratios, 0.5)) << ","
        << g9(percentile(ratios, 0.9)) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse recovery under the Earth Mover Distance"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI file; keys of a subcommand go under its [section]");

  GenOptions gen;
  std::string gen_kind = "clusters_plus_noise", out_path;
  auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic EMDIMG image");
  gen_cmd->add_option("--kind", gen_kind, "clusters | uniform_noise | clusters_plus_noise")->capture_default_str();
  gen_cmd->add_option("--delta", gen.delta)->capture_default_str();
  gen_cmd->add_option("--k", gen.k, "number of clusters")->capture_default_str();
  gen_cmd->add_option("--spread", gen.spread, "offset standard deviation in pixels")->capture_default_str();
  gen_cmd->add_option("--mass", gen.total_mass, "total unit masses")->capture_default_str();
  gen_cmd->add_option("--noise", gen.noise_fraction, "scattered fraction for clusters_plus_noise")
      ->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed)->capture_default_str();
  gen_cmd->add_option("--out", out_path, "output file (default stdout)");

  SchemeFlags sk;
  std::string in_path;
  auto* sketch_cmd = app.add_subcommand("sketch", "measure an EMDIMG image, write an EMDSKT sketch");
  sketch_cmd->add_option("--in", in_path, "EMDIMG image")->required();
  add_scheme_flags(sketch_cmd, sk, false);
  sketch_cmd->add_option("--out", out_path, "output file (default stdout)");

  bool sparsify = false;
  auto* recover_cmd = app.add_subcommand("recover", "recover an EMDIMG image from an EMDSKT sketch");
  recover_cmd->add_option("--in", in_path, "EMDSKT sketch")->required();
  recover_cmd->add_flag("--sparsify", sparsify, "apply strict k-sparsification");
  recover_cmd->add_option("--out", out_path, "output file (default stdout)");

  SchemeFlags run;
  GenOptions run_gen;
  std::string run_kind = "clusters_plus_noise";
  int trials = 1;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  bool aggregate = false;
  auto* run_cmd = app.add_subcommand("run", "sketch, recover, sparsify and evaluate; CSV output");
  add_scheme_flags(run_cmd, run, true);
  run_cmd->add_option("--trials", trials, "seeds seed .. seed + trials - 1")->capture_default_str();
  run_cmd->add_option("--kind", run_kind, "image kind")->capture_default_str();
  run_cmd->add_option("--spread", run_gen.spread)->capture_default_str();
  run_cmd->add_option("--mass", run_gen.total_mass)->capture_default_str();
  run_cmd->add_option("--noise", run_gen.noise_fraction)->capture_default_str();
  run_cmd->add_option("--threads", threads)->capture_default_str();
  run_cmd->add_flag("--aggregate", aggregate, "emit per-scheme median and 90th-percentile ratios instead of rows");
  run_cmd->add_option("--out", out_path, "output file (default stdout)");

  std::string a_path, b_path;
  auto* emd_cmd = app.add_subcommand("oracle-emd", "exact EMD between two EMDIMG images");
  emd_cmd->add_option("a", a_path)->required();
  emd_cmd->add_option("b", b_path)->required();

  std::string basis = "pyramid";
  auto* transform_cmd = app.add_subcommand("transform", "pyramid (EMDPYR) or Haar coefficients of an image");
  transform_cmd->add_option("--in", in_path)->required();
  transform_cmd->add_option("--basis", basis, "pyramid | haar")->capture_default_str();
  transform_cmd->add_option("--out", out_path, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) {
      gen.kind = parse_image_kind(gen_kind);
      const GridImage x = generate(gen);
      with_output(out_path, [&](std::ostream& o) { write_image(o, x); });
    } else if (*sketch_cmd) {
      const GridImage x = load_image(in_path);
      const SchemeConfig c = to_config(sk, parse_scheme(sk.scheme), x.delta(), sk.seed);
      const auto meas = sketch(c, x);
      with_output(out_path, [&](std::ostream& o) { write_sketch(o, c, meas); });
    } else if (*recover_cmd) {
      std::ifstream in(in_path);
      if (!in) throw std::runtime_error("cannot open " + in_path);
      const auto [c, meas] = read_sketch(in);
      Recovery r = recover(c, meas);
      GridImage x = r.x;
      if (sparsify) {
        for (double& v : x.values()) v = std::max(v, 0.0);
        x = strict_sparsify(x, c.k, c.median).image;
      }
      with_output(out_path, [&](std::ostream& o) { write_image(o, x); });
    } else if (*run_cmd) {
      if (trials < 1) throw std::invalid_argument("--trials must be at least 1");
      const std::vector<Scheme> schemes =
          run.scheme == "all" ? all_schemes() : std::vector<Scheme>{parse_scheme(run.scheme)};
      run_gen.kind = parse_image_kind(run_kind);
      run_gen.delta = run.delta;
      run_gen.k = run.k;
      for (Scheme s : schemes) to_config(run, s, run.delta, run.seed);

      std::vector<Row> rows(schemes.size() * std::size_t(trials));
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < rows.size();) {
          const Scheme s = schemes[i / std::size_t(trials)];
          const std::uint64_t seed = run.seed + i % std::size_t(trials);
          Row& row = rows[i];
          row.report.scheme = std::string(scheme_name(s));
          row.report.delta = run.delta;
          row.report.k = run.k;
          row.report.eps = run.eps;
          row.report.seed = seed;
          try {
            GenOptions g = run_gen;
            g.seed = seed;
            row.report = run_trial(to_config(run, s, run.delta, seed), generate(g));
          } catch (const std::exception& e) {
            row.error = e.what();
          }
        }
      };
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < std::max(1u, threads); ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();

      with_output(out_path, [&](std::ostream& o) {
        if (aggregate) {
          write_aggregate(o, rows);
          return;
        }
        o << kCsvHeader << "\n";
        for (const Row& r : rows) o << csv_row(r) << "\n";
      });
      const bool complete = std::all_of(rows.begin(), rows.end(), [](const Row& r) { return r.error.empty(); });
      return complete ? 0 : kIncompleteTrials;
    } else if (*emd_cmd) {
      std::printf("%.9g\n", emd_distance(load_image(a_path), load_image(b_path)));
    } else if (*transform_cmd) {
      const GridImage x = load_image(in_path);
      if (basis == "pyramid") {
        with_output(out_path, [&](std::ostream& o) { write_pyramid(o, pyramid_transform(x)); });
      } else if (basis == "haar") {
        const HaarCoeffs y = haar_transform(x);
        with_output(out_path, [&](std::ostream& o) {
          for (double v : y.values) o << format_exact(v) << "\n";
        });
      } else {
        throw std::invalid_argument("unknown basis: " + basis);
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeError;
  }
  return 0;
}
