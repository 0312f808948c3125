#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ltomo/errors.hpp"
#include "ltomo/estimator.hpp"
#include "ltomo/protocol.hpp"
#include "ltomo/qmat.hpp"
#include "ltomo/tracker.hpp"
#include "ltomo/verify.hpp"
#include "ltomo/version.hpp"

namespace py = pybind11;
using namespace ltomo;

PYBIND11_MODULE(_ltomo, m) {
  m.doc() = "Precision qudit tomography with Lorentz-transformed measurement protocols";
  m.attr("__version__") = kVersion;

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidArgs& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const Error& e) {
      PyErr_SetString(PyExc_RuntimeError, e.what());
    }
  });

  py::class_<InstrumentalMatrix>(m, "InstrumentalMatrix",
                                 "Measurement protocol: unit bra rows with exposure weights")
      .def(py::init<>())
      .def_readwrite("dim", &InstrumentalMatrix::dim)
      .def_readwrite("rows", &InstrumentalMatrix::rows)
      .def_readwrite("weights", &InstrumentalMatrix::weights)
      .def("row_count", &InstrumentalMatrix::row_count)
      .def("ket", &InstrumentalMatrix::ket, py::arg("j"))
      .def("basis_block", &InstrumentalMatrix::basis_block, py::arg("b"));

  py::class_<CountRecord>(m, "CountRecord", "Observed events per protocol row")
      .def(py::init<>())
      .def_readwrite("counts", &CountRecord::counts)
      .def_readwrite("protocol", &CountRecord::protocol)
      .def_readwrite("sample_size_target", &CountRecord::sample_size_target);

  py::class_<MleOptions>(m, "MleOptions")
      .def(py::init<>())
      .def_readwrite("rank", &MleOptions::rank)
      .def_readwrite("max_iter", &MleOptions::max_iter)
      .def_readwrite("damping", &MleOptions::damping)
      .def_readwrite("state_tol", &MleOptions::state_tol)
      .def_readwrite("residual_tol", &MleOptions::residual_tol)
      .def_readwrite("warm_start", &MleOptions::warm_start)
      .def_readwrite("init_seed", &MleOptions::init_seed)
      .def_readwrite("compute_condition", &MleOptions::compute_condition);

  py::class_<MleResult>(m, "MleResult")
      .def_readonly("rho", &MleResult::rho)
      .def_readonly("psi", &MleResult::psi)
      .def_readonly("intensity", &MleResult::intensity)
      .def_readonly("iterations", &MleResult::iterations)
      .def_readonly("converged", &MleResult::converged)
      .def_readonly("residual", &MleResult::residual)
      .def_readonly("loglik", &MleResult::loglik)
      .def_readonly("condition", &MleResult::condition);

  py::class_<EvolutionConfig>(m, "EvolutionConfig")
      .def(py::init<>())
      .def_readwrite("dim", &EvolutionConfig::dim)
      .def_readwrite("eps", &EvolutionConfig::eps)
      .def_readwrite("g", &EvolutionConfig::g)
      .def_readwrite("period", &EvolutionConfig::period)
      .def_readwrite("total_steps", &EvolutionConfig::total_steps)
      .def_readwrite("sample_size", &EvolutionConfig::sample_size)
      .def_readwrite("target_weight", &EvolutionConfig::target_weight)
      .def_readwrite("initial_weight", &EvolutionConfig::initial_weight)
      .def_readwrite("hamiltonian_scale", &EvolutionConfig::hamiltonian_scale)
      .def_readwrite("hamiltonian_seed", &EvolutionConfig::hamiltonian_seed)
      .def_readwrite("state_seed", &EvolutionConfig::state_seed)
      .def_readwrite("noise_seed", &EvolutionConfig::noise_seed)
      .def_readwrite("bootstrap_estimate", &EvolutionConfig::bootstrap_estimate)
      .def_readwrite("setup_sample_size", &EvolutionConfig::setup_sample_size);

  py::class_<TrackingRecord>(m, "TrackingRecord")
      .def_readonly("step", &TrackingRecord::step)
      .def_readonly("recon_fidelity", &TrackingRecord::recon_fidelity)
      .def_readonly("loss", &TrackingRecord::loss)
      .def_readonly("efficiency", &TrackingRecord::efficiency)
      .def_readonly("detection_fractions", &TrackingRecord::detection_fractions)
      .def_readonly("backaction_fidelity", &TrackingRecord::backaction_fidelity);

  py::class_<CheckResult>(m, "CheckResult")
      .def_readonly("name", &CheckResult::name)
      .def_readonly("pass_", &CheckResult::pass)
      .def_readonly("detail", &CheckResult::detail);

  m.def("fidelity", &fidelity, py::arg("rho"), py::arg("rho0"),
        "Uhlmann fidelity of two unit-trace states");
  m.def("sqrtm_psd", &sqrtm_psd, py::arg("rho"), "Principal PSD matrix square root");
  m.def("purify", &purify, py::arg("rho"), py::arg("rank"),
        "dim x rank factor Psi with rho = Psi Psi^+");
  m.def("density_of", &density_of, py::arg("psi"));
  m.def(
      "random_mixed_state",
      [](int dim, int rank, double dominant_weight, std::uint64_t seed) {
        return random_mixed_state({dim, rank, dominant_weight, seed});
      },
      py::arg("dim"), py::arg("rank"), py::arg("dominant_weight"), py::arg("seed") = 0,
      "Unit-trace state with spectrum (w, (1-w)/(rank-1), ...) and Haar eigenvectors");
  m.def("regularize_spectrum", &regularize_spectrum, py::arg("rho"), py::arg("lambda0"));

  m.def("mub_protocol", &mub_protocol, py::arg("dim"),
        "Complete set of dim+1 mutually unbiased bases as an instrumental matrix");
  m.def("povm_defect", &povm_defect, py::arg("x"));
  m.def("lorentz_of_state", &lorentz_of_state, py::arg("psi"),
        "det-1 transform sending the state with square purification psi to a "
        "multiple of the identity");
  m.def("apply_lorentz", &apply_lorentz, py::arg("x"), py::arg("l"));
  m.def("normalize_exposure", &normalize_exposure, py::arg("x"), py::arg("rho_ref"),
        py::arg("total"));
  m.def("rates", &rates, py::arg("x"), py::arg("rho"));
  m.def("adapt_protocol", &adapt_protocol, py::arg("rho_est"), py::arg("base"),
        py::arg("target_weight"), py::arg("total"),
        "Lorentz-transformed protocol tuned to an estimate, exposure-normalized");

  m.def("sample_counts", &sample_counts, py::arg("x"), py::arg("rho"), py::arg("seed"),
        "Poisson event counts for every protocol row");
  m.def("mle_reconstruct", &mle_reconstruct, py::arg("record"),
        py::arg("options") = MleOptions{},
        "Maximum-likelihood state reconstruction over fixed-rank purifications");
  m.def("poisson_loglik", &poisson_loglik, py::arg("record"), py::arg("psi"));
  m.def("loglik_gradient", &loglik_gradient, py::arg("record"), py::arg("psi"));
  m.def("dof", &dof, py::arg("dim"), py::arg("rank"));
  m.def("min_loss", &min_loss, py::arg("dim"), py::arg("rank"), py::arg("n"),
        "Accuracy-loss floor for POVM protocols");
  m.def("efficiency", &efficiency, py::arg("loss"), py::arg("dim"), py::arg("rank"),
        py::arg("n"));

  m.def("hamiltonian_at", &hamiltonian_at, py::arg("h0"), py::arg("g"), py::arg("period"),
        py::arg("j"));
  m.def("evolve", &evolve, py::arg("rho"), py::arg("h"), py::arg("eps"));
  m.def("detection_fractions",
        py::overload_cast<const InstrumentalMatrix&, const CVec&>(&detection_fractions),
        py::arg("x"), py::arg("psi"));
  m.def(
      "run_tracking",
      [](const EvolutionConfig& cfg) { return run_tracking(cfg); },
      py::arg("config"), "Closed-loop adaptive tracking; one record per step");

  m.def("run_verification", &run_verification, py::arg("corrupt_mub") = false,
        "Named invariant checks; every result carries pass/fail and a detail line");
}
