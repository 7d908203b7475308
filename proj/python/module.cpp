// Python bindings for the main operations: samplers, singular-value engine,
// graph censuses, spectral measures, and the revelation walk.

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spectra/anticonc.hpp"
#include "spectra/errors.hpp"
#include "spectra/graph.hpp"
#include "spectra/model.hpp"
#include "spectra/spectral.hpp"
#include "spectra/sv.hpp"
#include "spectra/version.hpp"
#include "spectra/walk.hpp"

namespace py = pybind11;
using namespace spectra;

namespace {

ModelParams make_params(Index n, double d, int delta, std::uint64_t seed) {
  return ModelParams{n, d, delta, seed};
}

py::array_t<std::int32_t> entries_array(const BinaryMatrix& m) {
  py::array_t<std::int32_t> out({static_cast<py::ssize_t>(m.nnz()), py::ssize_t(2)});
  auto view = out.mutable_unchecked<2>();
  py::ssize_t k = 0;
  for (auto [i, j] : m.entries()) {
    view(k, 0) = i;
    view(k, 1) = j;
    ++k;
  }
  return out;
}

BinaryMatrix matrix_from(py::array_t<std::int32_t> entries, Index rows, Index cols) {
  auto view = entries.unchecked<2>();
  std::vector<Entry> e;
  e.reserve(view.shape(0));
  for (py::ssize_t k = 0; k < view.shape(0); ++k)
    e.emplace_back(view(k, 0), view(k, 1));
  return BinaryMatrix(rows, cols, std::move(e));
}

MatrixXcd complex_matrix_from(const py::array_t<std::complex<double>>& arr) {
  auto view = arr.unchecked<2>();
  MatrixXcd m(view.shape(0), view.shape(1));
  for (py::ssize_t i = 0; i < view.shape(0); ++i)
    for (py::ssize_t j = 0; j < view.shape(1); ++j) m(i, j) = view(i, j);
  return m;
}

VectorXcd complex_vector_from(const py::array_t<std::complex<double>>& arr) {
  auto view = arr.unchecked<1>();
  VectorXcd v(view.shape(0));
  for (py::ssize_t i = 0; i < view.shape(0); ++i) v[i] = view(i);
  return v;
}

py::array_t<double> to_numpy(const VectorXd& v) {
  py::array_t<double> out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(v.size())});
  auto view = out.mutable_unchecked<1>();
  for (py::ssize_t i = 0; i < v.size(); ++i) view(i) = v[i];
  return out;
}

}  // namespace

PYBIND11_MODULE(_sparse_spectra, m) {
  m.doc() = "sparse iid spectral-law laboratory (C++ core)";
  m.attr("__version__") = kVersion;

  py::register_exception<invalid_parameter>(m, "InvalidParameter");
  py::register_exception<tolerance_not_met>(m, "ToleranceNotMet");
  py::register_exception<resource_limit>(m, "ResourceLimit");

  m.def(
      "sample_iid",
      [](Index n, double d, std::uint64_t seed) {
        BinaryMatrix a = sample_iid(make_params(n, d, 8, seed));
        return py::make_tuple(entries_array(a), a.rows(), a.cols());
      },
      py::arg("n"), py::arg("d"), py::arg("seed") = 0,
      "entries (k x 2 int array), rows, cols of an iid Ber(d/n) matrix");

  m.def(
      "sample_modified",
      [](Index n, double d, int delta, std::uint64_t seed) {
        BinaryMatrix b = sample_modified(make_params(n, d, delta, seed));
        return py::make_tuple(entries_array(b), b.rows(), b.cols());
      },
      py::arg("n"), py::arg("d"), py::arg("delta") = 8, py::arg("seed") = 0);

  m.def("poisson_tail_eps", &poisson_tail_eps, py::arg("d"), py::arg("delta"));
  m.def("theta_root", &theta_root, py::arg("eps"),
        "nonzero root of 1 - x - exp(-(1+eps) x)");

  m.def(
      "shifted_singular_values",
      [](py::array_t<std::int32_t> entries, Index rows, Index cols, Complex z) {
        BinaryMatrix b = matrix_from(entries, rows, cols);
        auto spec = singular_spectrum(ShiftedMatrix(b, z), false);
        return to_numpy(spec.values);
      },
      py::arg("entries"), py::arg("rows"), py::arg("cols"), py::arg("z"),
      "non-increasing singular values of M - zI");

  m.def(
      "secular_append_row",
      [](const py::array_t<std::complex<double>>& mat,
         const py::array_t<std::complex<double>>& row) {
        MatrixXcd m0 = complex_matrix_from(mat);
        auto spec = singular_spectrum(m0, true);
        auto updated = secular_append_row(spec, complex_vector_from(row));
        return to_numpy(updated.values);
      },
      py::arg("matrix"), py::arg("row"),
      "singular values of [matrix; row] via the secular update");

  m.def(
      "eigenvalues",
      [](py::array_t<std::int32_t> entries, Index n) {
        BinaryMatrix b = matrix_from(entries, n, n);
        auto eigs = eigen_spectrum(b);
        py::array_t<std::complex<double>> out(
            std::vector<py::ssize_t>{static_cast<py::ssize_t>(eigs.points.size())});
        auto view = out.mutable_unchecked<1>();
        for (py::ssize_t i = 0; i < static_cast<py::ssize_t>(eigs.points.size()); ++i)
          view(i) = eigs.points[i];
        return out;
      },
      py::arg("entries"), py::arg("n"));

  m.def(
      "log_potential",
      [](py::array_t<std::int32_t> entries, Index n, Complex z) {
        BinaryMatrix b = matrix_from(entries, n, n);
        auto lp = log_potential(b, z);
        return py::make_tuple(lp.value, lp.det_form, lp.singular);
      },
      py::arg("entries"), py::arg("n"), py::arg("z"));

  m.def(
      "trace_moment",
      [](py::array_t<std::int32_t> entries, Index n, const std::vector<int>& signs) {
        return trace_moment(matrix_from(entries, n, n), signs);
      },
      py::arg("entries"), py::arg("n"), py::arg("signs"));

  m.def(
      "unique_neighbors",
      [](py::array_t<std::int32_t> entries, Index rows, Index cols,
         const std::vector<Index>& s) {
        return unique_neighbors(matrix_from(entries, rows, cols), s);
      },
      py::arg("entries"), py::arg("rows"), py::arg("cols"), py::arg("s"));

  m.def(
      "scc_summary",
      [](py::array_t<std::int32_t> entries, Index n) {
        auto sum = scc_structure(Digraph(matrix_from(entries, n, n)));
        py::dict out;
        out["component_count"] = sum.sizes.size();
        out["giant_size"] = sum.giant_size;
        out["singletons"] = sum.singleton_count;
        out["cycles"] = sum.cycle_count;
        out["longest_cycle"] = sum.longest_cycle;
        out["other"] = sum.other_count;
        return out;
      },
      py::arg("entries"), py::arg("n"));

  m.def(
      "trivial_image_count",
      [](py::array_t<std::int32_t> entries, Index n) {
        return trivial_image_census(Digraph(matrix_from(entries, n, n))).count;
      },
      py::arg("entries"), py::arg("n"));

  m.def(
      "epsilon_r",
      [](Index n, Index r, double k_const) {
        auto e = epsilon_r(n, r, k_const);
        return py::make_tuple(e.value, e.log_value, e.clamped);
      },
      py::arg("n"), py::arg("r"), py::arg("k_const") = 0.01);

  m.def(
      "run_walk",
      [](Index n, double d, int delta, Complex z, std::uint64_t seed, int stride,
         double tau_z) {
        WalkParams wp;
        wp.model = make_params(n, d, delta, seed);
        wp.z = z;
        wp.stride = stride;
        wp.tau_z = tau_z;
        BinaryMatrix b = sample_modified(wp.model);
        WalkTrace tr = run_walk(b, wp, seed);
        auto fc = final_window_check(tr);
        py::dict out;
        out["x_start"] = tr.x_start;
        out["x_final"] = tr.x_final;
        out["delta_m"] = tr.delta_m;
        out["tau_z"] = tr.tau_z;
        out["steps"] = tr.steps.size();
        out["all_products_ok"] = tr.all_products_ok;
        out["final_window_log"] = tr.final_window_log;
        out["sigma_n"] = tr.sigma_n;
        out["window_pass"] = fc.pass;
        out["sigma_pass"] = fc.sigma_pass;
        return out;
      },
      py::arg("n"), py::arg("d"), py::arg("delta"), py::arg("z"),
      py::arg("seed") = 0, py::arg("stride") = 1, py::arg("tau_z") = 0.0);

  m.def(
      "walk_tail_mc",
      [](double p, int k, int t, std::int64_t trials, std::uint64_t seed) {
        auto res = walk_tail_mc(p, k, t, trials, seed);
        return py::make_tuple(res.frequency, res.bound, res.pass);
      },
      py::arg("p"), py::arg("k"), py::arg("t"), py::arg("trials"),
      py::arg("seed") = 0);

  m.def(
      "levy_estimate",
      [](const py::array_t<std::complex<double>>& samples, double t) {
        std::vector<Complex> xs;
        auto view = samples.unchecked<1>();
        xs.reserve(view.shape(0));
        for (py::ssize_t i = 0; i < view.shape(0); ++i) xs.push_back(view(i));
        auto est = levy_of_samples(xs, t);
        return py::make_tuple(est.l_value, est.l_value_2t, est.half_width);
      },
      py::arg("samples"), py::arg("t"),
      "Levy concentration over a given sample: (L_t, L_2t, wilson half width)");
}
