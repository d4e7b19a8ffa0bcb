#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "emdsparse/emd.hpp"
#include "emdsparse/generate.hpp"
#include "emdsparse/haar.hpp"
#include "emdsparse/pipeline.hpp"
#include "emdsparse/pyramid.hpp"
#include "emdsparse/tree.hpp"

namespace py = pybind11;
using namespace emdsparse;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

GridImage to_image(const Array& a) {
  if (a.ndim() != 2 || a.shape(0) != a.shape(1)) throw std::invalid_argument("expected a square 2-D array");
  const int delta = static_cast<int>(a.shape(0));
  require_delta(delta);
  return GridImage(delta, std::vector<double>(a.data(), a.data() + a.size()));
}

Array from_image(const GridImage& x) {
  Array out({x.delta(), x.delta()});
  std::copy(x.values().begin(), x.values().end(), out.mutable_data());
  return out;
}

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw std::invalid_argument("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

Array from_vector(const std::vector<double>& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

// Grid side for a coefficient vector of length t = (4 delta^2 - 1) / 3.
int delta_for_cells(std::size_t t) {
  for (int delta = 1; delta <= (1 << 15); delta *= 2)
    if (Grid(delta).cells() == t) return delta;
  throw std::invalid_argument("length is not (4 delta^2 - 1) / 3 for a power-of-two delta");
}

int delta_for_pixels(std::size_t n) {
  for (int delta = 1; delta <= (1 << 15); delta *= 2)
    if (std::size_t(delta) * delta == n) return delta;
  throw std::invalid_argument("length is not delta^2 for a power-of-two delta");
}

py::dict report_dict(const RecoveryReport& r) {
  py::dict d;
  d["scheme"] = r.scheme;
  d["delta"] = r.delta;
  d["k"] = r.k;
  d["eps"] = r.eps;
  d["seed"] = r.seed;
  d["rows_used"] = r.rows_used;
  d["emd_error"] = r.emd_error;
  d["emd_error_raw"] = r.emd_error_raw;
  d["best_k_sparse_emd"] = r.best_k_sparse_emd;
  d["ratio"] = r.ratio;
  d["exact"] = r.exact;
  d["inner_l1"] = r.inner_l1;
  d["inner_l1_inverted"] = r.inner_l1_inverted;
  d["embed_l1"] = r.embed_l1;
  d["chain_ok"] = r.chain_ok;
  d["c_measured"] = r.c_measured;
  d["c_prime"] = r.c_prime;
  d["claim_ok"] = r.claim_ok;
  d["wall_ms"] = r.wall_ms;
  d["success"] = r.success;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sparse recovery under the Earth Mover Distance";

  m.def("emd_norm", [](const Array& w) { return emd_norm(to_image(w)); }, py::arg("w"),
        "EMD norm of a signed image; unmatched mass costs 2 delta per unit.");
  m.def("emd_distance", [](const Array& a, const Array& b) { return emd_distance(to_image(a), to_image(b)); },
        py::arg("a"), py::arg("b"));

  m.def("pyramid_transform", [](const Array& x) { return from_vector(pyramid_transform(to_image(x)).values); },
        py::arg("x"), "Coefficient of a level-i cell is 2^i times its mass; root first.");
  m.def(
      "pyramid_invert",
      [](const Array& b) {
        const auto v = to_vector(b);
        return from_image(pyramid_invert(PyramidCoeffs{delta_for_cells(v.size()), v}));
      },
      py::arg("b"), "Nonnegative image y with |Py - Px|_1 <= 8 |b - Px|_1 for every x >= 0; needs b >= 0.");
  m.def("haar_transform", [](const Array& x) { return from_vector(haar_transform(to_image(x)).values); },
        py::arg("x"));
  m.def(
      "haar_inverse",
      [](const Array& y) {
        const auto v = to_vector(y);
        return from_image(haar_inverse(HaarCoeffs{delta_for_pixels(v.size()), v}));
      },
      py::arg("y"));

  m.def(
      "tree_project",
      [](const Array& y, std::size_t budget, const std::string& basis) {
        const auto v = to_vector(y);
        if (basis != "pyramid" && basis != "haar") throw std::invalid_argument("basis must be pyramid or haar");
        const CoefficientTree tree = basis == "haar" ? CoefficientTree::haar(delta_for_pixels(v.size()))
                                                     : CoefficientTree::pyramid(delta_for_cells(v.size()));
        return from_vector(tree_project(tree, v, budget));
      },
      py::arg("y"), py::arg("budget"), py::arg("basis") = "pyramid",
      "Best rooted subtree of at most `budget` coefficients in l2.");

  m.def(
      "alignment_certificate",
      [](const Array& x, int k, double eps) {
        const AlignmentCertificate c = alignment_certificate(to_image(x), k, eps);
        py::dict d;
        d["support"] = c.support.cells;
        d["centers"] = c.median.centers;
        d["median_emd"] = c.median_emd;
        d["residual_l1"] = c.residual_l1;
        d["width"] = c.width;
        d["width_bound"] = c.width_bound;
        d["size"] = c.size;
        return d;
      },
      py::arg("x"), py::arg("k"), py::arg("eps") = 1.0);

  m.def(
      "generate",
      [](const std::string& kind, int delta, int k, double spread, long mass, double noise, std::uint64_t seed) {
        GenOptions g;
        g.kind = parse_image_kind(kind);
        g.delta = delta;
        g.k = k;
        g.spread = spread;
        g.total_mass = mass;
        g.noise_fraction = noise;
        g.seed = seed;
        return from_image(generate(g));
      },
      py::arg("kind") = "clusters_plus_noise", py::arg("delta") = 32, py::arg("k") = 4, py::arg("spread") = 1.0,
      py::arg("mass") = 1000, py::arg("noise") = 0.05, py::arg("seed") = 0);

  py::class_<SchemeConfig>(m, "SchemeConfig")
      .def(py::init([](const std::string& scheme, int delta, int k, double eps, std::uint64_t seed) {
             SchemeConfig c;
             c.scheme = parse_scheme(scheme);
             c.delta = delta;
             c.k = k;
             c.eps = eps;
             c.seed = seed;
             validate(c);
             return c;
           }),
           py::arg("scheme") = "pyramid_tree_cosamp", py::arg("delta") = 32, py::arg("k") = 4, py::arg("eps") = 1.0,
           py::arg("seed") = 0)
      .def_property(
          "scheme", [](const SchemeConfig& c) { return std::string(scheme_name(c.scheme)); },
          [](SchemeConfig& c, const std::string& s) { c.scheme = parse_scheme(s); })
      .def_readwrite("delta", &SchemeConfig::delta)
      .def_readwrite("k", &SchemeConfig::k)
      .def_readwrite("eps", &SchemeConfig::eps)
      .def_readwrite("seed", &SchemeConfig::seed)
      .def_readwrite("c_rows", &SchemeConfig::c_rows)
      .def_readwrite("c_dense", &SchemeConfig::c_dense)
      .def_readwrite("c_w", &SchemeConfig::c_w)
      .def_readwrite("bucket_factor", &SchemeConfig::bucket_factor)
      .def_property_readonly("rows", [](const SchemeConfig& c) { return scheme_dims(c).rows; })
      .def_property_readonly("row_bound", [](const SchemeConfig& c) { return row_bound(c); })
      .def("__repr__", [](const SchemeConfig& c) {
        return "SchemeConfig(scheme='" + std::string(scheme_name(c.scheme)) + "', delta=" + std::to_string(c.delta) +
               ", k=" + std::to_string(c.k) + ", eps=" + std::to_string(c.eps) + ", seed=" + std::to_string(c.seed) +
               ")";
      });

  m.def("schemes", [] {
    std::vector<std::string> out;
    for (Scheme s : all_schemes()) out.emplace_back(scheme_name(s));
    return out;
  });

  m.def("sketch", [](const SchemeConfig& c, const Array& x) { return from_vector(sketch(c, to_image(x))); },
        py::arg("config"), py::arg("x"));
  m.def(
      "recover",
      [](const SchemeConfig& c, const Array& measurements) {
        const std::vector<double> meas = to_vector(measurements);
        Recovery r;
        {
          py::gil_scoped_release release;
          r = recover(c, meas);
        }
        return py::make_tuple(from_image(r.x), from_vector(r.y));
      },
      py::arg("config"), py::arg("measurements"), "Returns (x_star, y_star).");
  m.def("strict_sparsify", [](const Array& x, int k) { return from_image(strict_sparsify(to_image(x), k).image); },
        py::arg("x"), py::arg("k"));
  m.def(
      "run_trial",
      [](const SchemeConfig& c, const Array& x) {
        const GridImage img = to_image(x);
        RecoveryReport r;
        {
          py::gil_scoped_release release;
          r = run_trial(c, img);
        }
        return report_dict(r);
      },
      py::arg("config"), py::arg("x"));
}
