#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kernelrep/datasets.hpp"
#include "kernelrep/diagnostics.hpp"
#include "kernelrep/downstream.hpp"
#include "kernelrep/error.hpp"
#include "kernelrep/harness.hpp"
#include "kernelrep/kernel_ae.hpp"
#include "kernelrep/kernels.hpp"
#include "kernelrep/kpca.hpp"
#include "kernelrep/serialize.hpp"
#include "kernelrep/simple_contrastive.hpp"
#include "kernelrep/spectral_contrastive.hpp"

namespace py = pybind11;
using namespace kernelrep;

namespace {

OptimOptions make_opt(double step, int max_iters, double tol, bool backtracking) {
  OptimOptions o;
  o.step = step;
  o.max_iters = max_iters;
  o.tol = tol;
  o.backtracking = backtracking;
  return o;
}

template <class Model>
std::string to_text(const Model& m) {
  std::ostringstream out;
  save_model(out, m);
  return out.str();
}

template <class Model, Model (*Load)(std::istream&)>
Model from_text(const std::string& text) {
  std::istringstream in(text);
  return Load(in);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Kernel contrastive and autoencoder representations. Matrices hold one sample per column.";

  // Base first: translators run in reverse registration order.
  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<NotPsdError>(m, "NotPsdError", base.ptr());
  py::register_exception<SingularError>(m, "SingularError", base.ptr());
  py::register_exception<RankError>(m, "RankError", base.ptr());
  py::register_exception<OptimizationError>(m, "OptimizationError", base.ptr());
  py::register_exception<LoadError>(m, "LoadError", base.ptr());
  py::register_exception<SplitError>(m, "SplitError", base.ptr());
  py::register_exception<StateError>(m, "StateError", base.ptr());
  py::register_exception<UnsupportedError>(m, "UnsupportedError", base.ptr());
  py::register_exception<SelectionError>(m, "SelectionError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  py::class_<KernelSpec>(m, "KernelSpec")
      .def_static("gaussian", &KernelSpec::gaussian, py::arg("gamma"))
      .def_static("laplacian", &KernelSpec::laplacian, py::arg("gamma"))
      .def_static("linear", &KernelSpec::linear)
      .def_static("relu_ntk", &KernelSpec::relu_ntk, py::arg("depth"))
      .def_property_readonly("family", [](const KernelSpec& s) { return std::string(to_string(s.family)); })
      .def_readonly("gamma", &KernelSpec::gamma)
      .def_readonly("depth", &KernelSpec::depth)
      .def("label", &KernelSpec::label)
      .def("__eq__", [](const KernelSpec& a, const KernelSpec& b) { return a == b; })
      .def("__repr__", [](const KernelSpec& s) { return "KernelSpec(" + s.label() + ")"; });

  m.def("eval_kernel", [](const KernelSpec& s, const VectorXd& x, const VectorXd& y) { return eval_kernel(s, x, y); },
        py::arg("spec"), py::arg("x"), py::arg("y"));
  m.def("gram", [](const KernelSpec& s, const MatrixXd& X, std::optional<MatrixXd> Y) {
        return Y ? gram(s, X, *Y) : gram(s, X);
      }, py::arg("spec"), py::arg("X"), py::arg("Y") = py::none());

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("X", &Dataset::X)
      .def_readonly("y", &Dataset::y)
      .def_readonly("name", &Dataset::name);
  m.def("make_circles", &make_circles, py::arg("n"), py::arg("factor") = 0.6, py::arg("noise_sd") = 0.05,
        py::arg("seed") = 0);
  m.def("make_moons", &make_moons, py::arg("n"), py::arg("noise_sd") = 0.1, py::arg("seed") = 0);
  m.def("make_named", &make_named, py::arg("name"), py::arg("n"), py::arg("seed") = 0);
  m.def("corrupt", &corrupt, py::arg("X"), py::arg("noise_sd"), py::arg("seed"));
  m.def("derive_seed", &derive_seed, py::arg("base"), py::arg("stream"));

  py::class_<TripletSet>(m, "TripletSet")
      .def_readonly("anchors", &TripletSet::anchors)
      .def_readonly("positives", &TripletSet::positives)
      .def_readonly("negatives", &TripletSet::negatives);
  m.def("make_triplets", &make_triplets, py::arg("X"), py::arg("aug_sd"), py::arg("seed"));

  py::class_<SimpleContrastiveModel>(m, "SimpleContrastiveModel")
      .def_readonly("A", &SimpleContrastiveModel::A)
      .def_readonly("h", &SimpleContrastiveModel::h)
      .def_readonly("objective", &SimpleContrastiveModel::objective)
      .def_readonly("top_eigenvalues", &SimpleContrastiveModel::top_eigenvalues)
      .def_readonly("eigen_warning", &SimpleContrastiveModel::eigen_warning)
      .def("embed", &SimpleContrastiveModel::embed_batch, py::arg("X"))
      .def("norm_sq", [](const SimpleContrastiveModel& s) { return model_norm(s); })
      .def("save", &to_text<SimpleContrastiveModel>)
      .def_static("load", &from_text<SimpleContrastiveModel, &load_simple_model>);
  m.def("fit_simple", &fit_simple, py::arg("triplets"), py::arg("spec"), py::arg("h"),
        py::arg("jitter") = kDefaultJitter);

  py::class_<SpectralModel>(m, "SpectralModel")
      .def_readonly("Z", &SpectralModel::Z)
      .def_property_readonly("losses", [](const SpectralModel& s) { return s.trace.losses; })
      .def("embed", &SpectralModel::embed_batch, py::arg("X"))
      .def("norm_sq", &SpectralModel::norm_sq)
      .def("save", &to_text<SpectralModel>)
      .def_static("load", &from_text<SpectralModel, &load_spectral_model>);
  m.def("fit_spectral",
        [](const TripletSet& t, const KernelSpec& s, int h, double lambda, double step, int max_iters, double tol,
           bool backtracking, std::uint64_t seed, double jitter) {
          return fit_spectral(t, s, h, lambda, make_opt(step, max_iters, tol, backtracking), seed, jitter);
        },
        py::arg("triplets"), py::arg("spec"), py::arg("h"), py::arg("lam") = 1.0, py::arg("step") = 1e-2,
        py::arg("max_iters") = 2000, py::arg("tol") = 1e-6, py::arg("backtracking") = true, py::arg("seed") = 0,
        py::arg("jitter") = kDefaultJitter);

  py::class_<KernelAEModel>(m, "KernelAEModel")
      .def_readonly("Z", &KernelAEModel::Z)
      .def_readonly("random_init", &KernelAEModel::random_init)
      .def_property_readonly("losses", [](const KernelAEModel& a) { return a.trace.losses; })
      .def("embed", &KernelAEModel::embed_batch, py::arg("X"))
      .def("reconstruct", &KernelAEModel::reconstruct_batch, py::arg("X"))
      .def("reconstruction", &KernelAEModel::reconstruction)
      .def("save", &to_text<KernelAEModel>)
      .def_static("load", &from_text<KernelAEModel, &load_ae_model>);
  m.def("fit_ae",
        [](const MatrixXd& X, const KernelSpec& enc, const KernelSpec& dec, int h, double lambda, double step,
           int max_iters, double tol, std::uint64_t seed, bool denoising, double noise_sd, double jitter) {
          AeFitOptions fo;
          fo.denoising = denoising;
          fo.noise_sd = noise_sd;
          fo.jitter_scale = jitter;
          return fit_ae(X, enc, dec, h, lambda, make_opt(step, max_iters, tol, true), seed, fo);
        },
        py::arg("X"), py::arg("spec_enc"), py::arg("spec_dec"), py::arg("h"), py::arg("lam") = 0.1,
        py::arg("step") = 1e-2, py::arg("max_iters") = 1000, py::arg("tol") = 1e-6, py::arg("seed") = 0,
        py::arg("denoising") = false, py::arg("noise_sd") = 0.1, py::arg("jitter") = kDefaultJitter);
  m.def("ae_reconstruction", &ae_reconstruction, py::arg("Z"), py::arg("X"), py::arg("spec_dec"), py::arg("lam"));

  py::class_<KPCAModel>(m, "KPCAModel")
      .def_readonly("alphas", &KPCAModel::alphas)
      .def_readonly("eigenvalues", &KPCAModel::eigenvalues)
      .def_readonly("train_embedding", &KPCAModel::train_embedding)
      .def("embed", &KPCAModel::embed_batch, py::arg("X"))
      .def("save", &to_text<KPCAModel>)
      .def_static("load", &from_text<KPCAModel, &load_kpca_model>);
  m.def("fit_kpca", &fit_kpca, py::arg("X"), py::arg("spec"), py::arg("h"));

  m.def("knn_predict",
        [](const MatrixXd& points, const std::vector<int>& labels, const MatrixXd& queries, int k) {
          return KnnClassifier(points, labels, k).predict_batch(queries);
        },
        py::arg("points"), py::arg("labels"), py::arg("queries"), py::arg("k") = 3);
  m.def("accuracy", py::overload_cast<const std::vector<int>&, const std::vector<int>&>(&accuracy),
        py::arg("predicted"), py::arg("truth"));
  m.def("loo_accuracy", &loo_accuracy, py::arg("points"), py::arg("labels"), py::arg("k") = 3);
  m.def("log_grid", &log_grid, py::arg("lo"), py::arg("hi"), py::arg("count"));

  m.def("complexity_terms",
        [](const TripletSet& t, const KernelSpec& s, int h) {
          const ComplexityTerms c = complexity_terms(t, s, h);
          return py::dict(py::arg("alpha") = c.alpha, py::arg("kappa") = c.kappa);
        },
        py::arg("triplets"), py::arg("spec"), py::arg("h"));

  m.def("run_experiment",
        [](const std::string& config_json) {
          const ExperimentConfig c = parse_config(config_json);
          ExperimentResult r;
          {
            py::gil_scoped_release release;
            r = run_experiment(c, {true, nullptr});
          }
          return py::make_tuple(format_results_csv(r.records), format_aggregate_csv(r.aggregates));
        },
        py::arg("config_json"), "Runs the harness; returns (results_csv, aggregate_csv) text.");
}
