#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <optional>

#include "alignrecon/io.hpp"
#include "alignrecon/metrics.hpp"
#include "alignrecon/pipeline.hpp"
#include "alignrecon/prox.hpp"
#include "alignrecon/sampling.hpp"
#include "alignrecon/similarity.hpp"
#include "alignrecon/simulate.hpp"
#include "alignrecon/solver.hpp"
#include "alignrecon/transform.hpp"
#include "alignrecon/warp.hpp"

namespace py = pybind11;
using namespace alignrecon;

namespace {

using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;
using RArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using BArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

Shape shape_2d(const py::buffer_info& info, const char* what) {
  if (info.ndim != 2) throw DimensionError(std::string(what) + " must be a 2D array");
  return {static_cast<std::size_t>(info.shape[0]), static_cast<std::size_t>(info.shape[1])};
}

template <typename G>
G to_complex_grid(const CArray& a, const char* what) {
  const auto info = a.request();
  G g(shape_2d(info, what));
  std::copy_n(static_cast<const cplx*>(info.ptr), g.size(), g.data().begin());
  return g;
}

ComplexImage to_image(const CArray& a) { return to_complex_grid<ComplexImage>(a, "image"); }
KSpace to_kspace(const CArray& a) { return to_complex_grid<KSpace>(a, "k-space"); }

RealImage to_real(const RArray& a, const char* what = "image") {
  const auto info = a.request();
  RealImage g(shape_2d(info, what));
  std::copy_n(static_cast<const double*>(info.ptr), g.size(), g.data().begin());
  return g;
}

template <typename T>
py::array_t<T> to_array(const Grid<T>& g) {
  py::array_t<T> out({g.height(), g.width()});
  std::copy(g.data().begin(), g.data().end(), out.mutable_data());
  return out;
}

// Fields and edge fields travel as (2, H, W): plane 0 along columns, plane 1 along rows.
RArray stack(const RealGrid& a, const RealGrid& b) {
  RArray out({std::size_t{2}, a.height(), a.width()});
  double* p = out.mutable_data();
  p = std::copy(a.data().begin(), a.data().end(), p);
  std::copy(b.data().begin(), b.data().end(), p);
  return out;
}

std::pair<RealGrid, RealGrid> unstack(const RArray& a, const char* what) {
  const auto info = a.request();
  if (info.ndim != 3 || info.shape[0] != 2) throw DimensionError(std::string(what) + " must have shape (2, H, W)");
  const Shape s{static_cast<std::size_t>(info.shape[1]), static_cast<std::size_t>(info.shape[2])};
  RealGrid x(s), y(s);
  const double* p = static_cast<const double*>(info.ptr);
  std::copy_n(p, s.size(), x.data().begin());
  std::copy_n(p + s.size(), s.size(), y.data().begin());
  return {std::move(x), std::move(y)};
}

DisplacementField to_field(const RArray& a) {
  auto [x, y] = unstack(a, "field");
  DisplacementField f;
  f.dx = std::move(x);
  f.dy = std::move(y);
  return f;
}

RArray from_field(const DisplacementField& f) { return stack(f.dx, f.dy); }

EdgeField to_edges(const RArray& a) {
  auto [x, y] = unstack(a, "edge field");
  EdgeField e(x.shape());
  e.xi_x = std::move(x);
  e.xi_y = std::move(y);
  return e;
}

// Masks cross as a 1D array of column flags; the height comes from the data.
SamplingMask to_mask(const BArray& cols, std::size_t height) {
  const auto info = cols.request();
  if (info.ndim != 1) throw DimensionError("mask must be a 1D array of column flags");
  const auto* p = static_cast<const std::uint8_t*>(info.ptr);
  return SamplingMask(height, std::vector<std::uint8_t>(p, p + info.shape[0]));
}

BArray from_mask(const SamplingMask& m) {
  BArray out(static_cast<py::ssize_t>(m.width()));
  std::copy(m.columns().begin(), m.columns().end(), out.mutable_data());
  return out;
}

py::dict report_dict(const MetricReport& r) {
  py::dict d;
  d["psnr"] = r.psnr;
  d["ssim"] = r.ssim;
  d["mae"] = r.mae;
  return d;
}

py::dict recon_dict(const Reconstruction& r) {
  py::list stages;
  for (const StageRecord& s : r.trace.stages) {
    py::dict d;
    d["stage"] = s.stage;
    d["data_fidelity"] = s.data_fidelity;
    d["psi"] = s.psi;
    d["tv"] = s.tv;
    d["psnr"] = s.psnr ? py::object(py::float_(*s.psnr)) : py::object(py::none());
    d["alpha_used"] = s.alpha_used;
    d["align_objective"] = s.align_objective;
    stages.append(d);
  }
  py::dict out;
  out["x"] = to_array<cplx>(r.x);
  out["phi"] = from_field(r.phi);
  out["stages"] = stages;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Joint alignment and reconstruction for multi-modal undersampled MRI";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<InvalidParameter>(m, "InvalidParameter", base.ptr());
  py::register_exception<InvalidSpec>(m, "InvalidSpec", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());

  m.def("fft2c", [](const CArray& x) { return to_array<cplx>(fft2c(to_image(x))); }, py::arg("image"));
  m.def("ifft2c", [](const CArray& k) { return to_array<cplx>(ifft2c(to_kspace(k))); }, py::arg("kspace"));
  m.def(
      "forward_masked",
      [](const CArray& x, const BArray& mask) {
        const ComplexImage img = to_image(x);
        return to_array<cplx>(forward_masked(img, to_mask(mask, img.height())));
      },
      py::arg("image"), py::arg("mask"));
  m.def(
      "adjoint_masked",
      [](const CArray& k, const BArray& mask) {
        const KSpace ks = to_kspace(k);
        return to_array<cplx>(adjoint_masked(ks, to_mask(mask, ks.height())));
      },
      py::arg("kspace"), py::arg("mask"));

  m.def(
      "make_mask",
      [](std::size_t width, double accel, const std::string& pattern, double center_alloc, std::uint64_t seed) {
        return from_mask(make_mask(parse_mask_pattern(pattern), {width, accel, center_alloc, seed}, 1));
      },
      py::arg("width"), py::arg("accel") = 4.0, py::arg("pattern") = "equispaced", py::arg("center_alloc") = 0.32,
      py::arg("seed") = 0);

  m.def(
      "warp", [](const CArray& x, const RArray& field) { return to_array<cplx>(warp(to_image(x), to_field(field))); },
      py::arg("image"), py::arg("field"));
  m.def(
      "inverse_field", [](const RArray& field, int iterations) { return from_field(inverse_field(to_field(field), iterations)); },
      py::arg("field"), py::arg("iterations") = 30);
  m.def(
      "mean_endpoint_error",
      [](const RArray& a, const RArray& b) { return mean_endpoint_error(to_field(a), to_field(b)); }, py::arg("a"),
      py::arg("b"));

  m.def(
      "edge_field",
      [](const RArray& ref_mag, double eps) {
        const EdgeField e = edge_field(to_real(ref_mag, "reference magnitude"), eps);
        return stack(e.xi_x, e.xi_y);
      },
      py::arg("ref_mag"), py::arg("eps"));
  m.def(
      "dtv", [](const CArray& x, const RArray& xi) { return dtv_value(to_image(x), to_edges(xi)); }, py::arg("image"),
      py::arg("xi"));
  m.def("tv", [](const CArray& x) { return tv_value(to_image(x)); }, py::arg("image"));
  m.def(
      "prox_tv",
      [](const CArray& v, double weight, int iters) {
        return to_array<cplx>(prox_tv(to_image(v), {weight, iters, 1.0 / 8.0}));
      },
      py::arg("v"), py::arg("weight"), py::arg("iters") = ProxConfig{}.inner_iters);
  m.def(
      "prox_dtv",
      [](const CArray& v, const RArray& xi, double weight, int iters) {
        return to_array<cplx>(prox_dtv(to_image(v), to_edges(xi), {weight, iters, 1.0 / 8.0}));
      },
      py::arg("v"), py::arg("xi"), py::arg("weight"), py::arg("iters") = ProxConfig{}.inner_iters);

  m.def(
      "zero_filled",
      [](const CArray& k, const BArray& mask) {
        const KSpace ks = to_kspace(k);
        return to_array<cplx>(zero_filled(ks, to_mask(mask, ks.height())));
      },
      py::arg("kspace"), py::arg("mask"));
  m.def(
      "data_consistency",
      [](const CArray& z, const CArray& s, const CArray& k, const BArray& mask, double beta1, double beta2) {
        const KSpace ks = to_kspace(k);
        return to_array<cplx>(
            data_consistency(to_image(z), to_image(s), ks, to_mask(mask, ks.height()), beta1, beta2));
      },
      py::arg("z"), py::arg("s"), py::arg("kspace"), py::arg("mask"), py::arg("beta1"), py::arg("beta2"));

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("stages", &SolverConfig::stages)
      .def_readwrite("alpha", &SolverConfig::alpha)
      .def_readwrite("lambda_", &SolverConfig::lambda)
      .def_readwrite("eta", &SolverConfig::eta)
      .def_readwrite("beta1", &SolverConfig::beta1)
      .def_readwrite("beta2", &SolverConfig::beta2)
      .def_readwrite("prox_inner", &SolverConfig::prox_inner)
      .def_readwrite("align_substeps", &SolverConfig::align_substeps)
      .def_readwrite("smooth_sigma", &SolverConfig::smooth_sigma)
      .def_readwrite("align_start", &SolverConfig::align_start)
      .def_readwrite("align_search", &SolverConfig::align_search)
      .def_readwrite("align_search_local", &SolverConfig::align_search_local)
      .def_readwrite("align_tol", &SolverConfig::align_tol)
      .def_readwrite("eps", &SolverConfig::eps)
      .def_readwrite("delta", &SolverConfig::delta)
      .def_readwrite("align_eps", &SolverConfig::align_eps)
      .def("validate", &SolverConfig::validate);

  m.def(
      "reconstruct",
      [](const CArray& k, const BArray& mask, std::optional<CArray> ref, const SolverConfig& cfg,
         std::optional<CArray> truth) {
        const KSpace ks = to_kspace(k);
        const SamplingMask sm = to_mask(mask, ks.height());
        std::optional<ComplexImage> t;
        if (truth) t = to_image(*truth);
        Reconstruction r;
        {
          py::gil_scoped_release release;
          r = ref ? reconstruct(ks, sm, to_image(*ref), cfg, t) : reconstruct_single_modal(ks, sm, cfg, t);
        }
        return recon_dict(r);
      },
      py::arg("kspace"), py::arg("mask"), py::arg("reference") = py::none(), py::arg("config") = SolverConfig{},
      py::arg("truth") = py::none());

  m.def(
      "phantom_pair",
      [](std::size_t size, std::uint64_t seed) {
        const PhantomPair p = phantom_pair(size, seed);
        return py::make_tuple(to_array<cplx>(p.target), to_array<cplx>(p.reference));
      },
      py::arg("size"), py::arg("seed") = 0);
  m.def(
      "misalign",
      [](const CArray& ref, double sigma, std::uint64_t seed) {
        const Misaligned mis = misalign(to_image(ref), {sigma, seed});
        return py::make_tuple(to_array<cplx>(mis.image), from_field(mis.field));
      },
      py::arg("reference"), py::arg("sigma"), py::arg("seed") = 0);
  m.def(
      "acquire",
      [](const CArray& x, const BArray& mask, double noise_sigma, std::uint64_t seed) {
        const ComplexImage img = to_image(x);
        return to_array<cplx>(acquire(img, to_mask(mask, img.height()), noise_sigma, seed));
      },
      py::arg("image"), py::arg("mask"), py::arg("noise_sigma"), py::arg("seed") = 0);

  m.def(
      "evaluate", [](const CArray& x, const CArray& truth) { return report_dict(evaluate(to_image(x), to_image(truth))); },
      py::arg("image"), py::arg("truth"));

  m.def(
      "write_grid",
      [](const std::filesystem::path& path, const py::array& a) {
        if (py::isinstance<py::array_t<cplx>>(a))
          write_grid(path, to_image(a.cast<CArray>()));
        else if (a.ndim() == 3)
          write_grid(path, to_field(a.cast<RArray>()));
        else
          write_grid(path, to_real(a.cast<RArray>()));
      },
      py::arg("path"), py::arg("array"));
  m.def(
      "read_grid",
      [](const std::filesystem::path& path) -> py::object {
        const GridFile g = read_grid(path);
        const std::size_t h = g.height, w = g.width, p = g.planes;
        switch (g.dtype) {
          case GridDtype::Complex: {
            py::array_t<cplx> out({p, h, w});
            std::copy(g.complex.begin(), g.complex.end(), out.mutable_data());
            return p == 1 ? out.attr("reshape")(h, w) : py::object(out);
          }
          case GridDtype::Real: {
            py::array_t<double> out({p, h, w});
            std::copy(g.real.begin(), g.real.end(), out.mutable_data());
            return p == 1 ? out.attr("reshape")(h, w) : py::object(out);
          }
          case GridDtype::Byte: {
            py::array_t<std::uint8_t> out({p, h, w});
            std::copy(g.bytes.begin(), g.bytes.end(), out.mutable_data());
            return p == 1 ? out.attr("reshape")(h, w) : py::object(out);
          }
        }
        throw FormatError("unknown dtype", 8);
      },
      py::arg("path"));
}
