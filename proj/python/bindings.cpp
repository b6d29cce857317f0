#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "blockent/entropy.hpp"
#include "blockent/error.hpp"
#include "blockent/harness.hpp"
#include "blockent/io.hpp"
#include "blockent/measures.hpp"
#include "blockent/simulate.hpp"
#include "blockent/thermo.hpp"

namespace py = pybind11;
using namespace blockent;

namespace {

SamplePath path_from(int alphabet_size, const std::vector<int>& symbols) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(symbols.size());
  for (int s : symbols) {
    if (s < 0 || s > 255) throw Error(ErrorCode::kInvalidConfig, "symbol index outside the alphabet");
    bytes.push_back(static_cast<std::uint8_t>(s));
  }
  return SamplePath(alphabet_size, std::move(bytes));
}

py::dict spectral_dict(const SpectralData& sd) {
  py::dict d;
  d["beta"] = sd.beta;
  d["pressure"] = sd.pressure;
  d["entropy"] = sd.entropy;
  d["mean_phi"] = sd.mean_phi;
  d["left_eigvec"] = sd.left_eigvec;
  d["right_eigvec"] = sd.right_eigvec;
  d["equilibrium"] = std::vector<double>(sd.equilibrium.weights().begin(), sd.equilibrium.weights().end());
  return d;
}

py::dict record_dict(const EntropyRecord& r) {
  py::dict d;
  d["n"] = r.n;
  d["k"] = r.k;
  d["H_k"] = r.H_k;
  d["h_k"] = r.h_k;
  d["D_k"] = r.D_k ? py::cast(*r.D_k) : py::none();
  d["Delta_k"] = r.Delta_k ? py::cast(*r.Delta_k) : py::none();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Block entropy estimators, pressure and large deviations of cylindrical potentials";

  static py::exception<Error> error(m, "BlockentError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<MarkovPotential>(m, "MarkovPotential")
      .def(py::init<int, int, std::vector<double>>(), py::arg("alphabet_size"), py::arg("k"), py::arg("values"))
      .def_property_readonly("alphabet_size", &MarkovPotential::alphabet_size)
      .def_property_readonly("k", &MarkovPotential::k)
      .def_property_readonly("values",
                             [](const MarkovPotential& phi) {
                               return std::vector<double>(phi.values().begin(), phi.values().end());
                             })
      .def("normalized", &MarkovPotential::normalized)
      .def("normalization_defect", &MarkovPotential::normalization_defect)
      .def("__repr__", [](const MarkovPotential& phi) {
        return "MarkovPotential(alphabet_size=" + std::to_string(phi.alphabet_size()) +
               ", k=" + std::to_string(phi.k()) + ")";
      });

  m.def("bernoulli_potential", &bernoulli_potential, py::arg("probabilities"));
  m.def("markov_chain_potential", &markov_chain_potential, py::arg("transition"));
  m.def(
      "normalize_potential",
      [](const MarkovPotential& phi) {
        auto np = normalize_potential(phi);
        return py::make_tuple(np.potential, np.pressure);
      },
      py::arg("phi"), "Normalized cohomologous potential and the pressure that was removed.");
  m.def(
      "pressure", [](const MarkovPotential& phi, double beta) { return spectral_dict(pressure(phi, beta)); },
      py::arg("phi"), py::arg("beta") = 1.0);

  m.def("scgf_R", &scgf_R, py::arg("phi"), py::arg("t"));
  m.def("scgf_Phi", &scgf_Phi, py::arg("phi"), py::arg("t"));
  m.def("scgf_PDelta", &scgf_PDelta, py::arg("phi"), py::arg("t"));
  m.def("renyi_scgf", &renyi_scgf, py::arg("phi"), py::arg("t"));
  m.def("rate_I", &rate_I, py::arg("phi"), py::arg("u"));
  m.def("rate_J", &rate_J, py::arg("phi"), py::arg("u"));
  m.def("asymptotic_variance", &asymptotic_variance, py::arg("phi"));
  m.def(
      "max_mean_cycle",
      [](const MarkovPotential& phi) {
        auto c = max_mean_cycle(phi);
        return py::make_tuple(c.mean, c.arcs);
      },
      py::arg("phi"));
  m.def(
      "min_mean_cycle",
      [](const MarkovPotential& phi) {
        auto c = min_mean_cycle(phi);
        return py::make_tuple(c.mean, c.arcs);
      },
      py::arg("phi"));

  m.def("block_schedule", &block_schedule, py::arg("n"), py::arg("alphabet_size"), py::arg("epsilon"));
  m.def(
      "plug_in_estimates",
      [](const std::vector<int>& symbols, int alphabet_size, int k) {
        return record_dict(plug_in_estimates(path_from(alphabet_size, symbols), k));
      },
      py::arg("symbols"), py::arg("alphabet_size"), py::arg("k"));
  m.def(
      "sample_path",
      [](const MarkovPotential& phi, std::int64_t n, std::uint64_t seed, double beta) {
        const SamplePath x = sample_path(make_sampler(phi, n, seed, beta));
        return std::vector<int>(x.symbols().begin(), x.symbols().end());
      },
      py::arg("phi"), py::arg("n"), py::arg("seed"), py::arg("beta") = 1.0);
  m.def(
      "exact_finite_scgf",
      [](const MarkovPotential& phi, int n, int k, double t) {
        return exact_finite_scgf(phi, n, k, t, Functional::kh);
      },
      py::arg("phi"), py::arg("n"), py::arg("k"), py::arg("t"));
  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        const auto config = experiment_from_json(parse_json(config_json));
        return report_summary(run_experiment(config)).dump(2);
      },
      py::arg("config_json"), "Run an experiment from its JSON config; returns the report summary as JSON text.");
}
