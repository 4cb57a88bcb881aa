#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "diva/advantage.hpp"
#include "diva/config_io.hpp"
#include "diva/difficulty.hpp"
#include "diva/error.hpp"
#include "diva/reward.hpp"
#include "diva/simulator.hpp"
#include "diva/theory.hpp"
#include "diva/variants.hpp"

namespace py = pybind11;
using namespace diva;

namespace {

// Configs arrive either as run-config JSON text or as a dict of the same shape.
sim::SimConfig to_config(const py::object& config) {
  if (config.is_none()) return io::parse_run_config("{}");
  if (py::isinstance<py::str>(config)) return io::parse_run_config(config.cast<std::string>());
  const auto text = py::module_::import("json").attr("dumps")(config).cast<std::string>();
  return io::parse_run_config(text);
}

DifficultyConfig difficulty_config(double d_min, double d_max, double eta) {
  DifficultyConfig c;
  c.d_min = d_min;
  c.d_max = d_max;
  c.eta = eta;
  c.initial = c.midpoint();
  c.validate();
  return c;
}

std::vector<VariantGroupRewards> to_batch(const py::list& groups, const DifficultyConfig& dc) {
  std::vector<VariantGroupRewards> batch;
  for (const auto& item : groups) {
    const auto g = item.cast<py::dict>();
    VariantGroupRewards out{g["problem_id"].cast<std::string>(), {}};
    int n = 0;
    for (const auto& m_item : g["members"].cast<py::list>()) {
      const auto m = m_item.cast<py::dict>();
      const int level = m.contains("level") ? m["level"].cast<int>() : kOriginalLevel;
      const double d = m.contains("difficulty") ? m["difficulty"].cast<double>() : variant_difficulty(level, dc);
      out.members.push_back(
          {level, d, RolloutGroup(out.problem_id + "#" + std::to_string(n++), m["rewards"].cast<std::vector<double>>())});
    }
    batch.push_back(std::move(out));
  }
  return batch;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Difficulty-adaptive variant advantages (C++ core)";
  py::register_exception<Error>(m, "DivaError", PyExc_ValueError);

  m.def("zscore_advantages", [](const std::vector<double>& r, double eps, bool bessel) {
        return zscore_advantages(r, eps, bessel);
      },
      py::arg("rewards"), py::arg("eps") = kDefaultEps, py::arg("bessel") = true);

  m.def("group_stats", [](const std::vector<double>& v, bool bessel) {
        const auto s = group_stats(v, bessel);
        return py::make_tuple(s.mean, s.std);
      },
      py::arg("values"), py::arg("bessel") = true);

  m.def("updated_score", [](double score, double alpha, double d_min, double d_max, double eta) {
        return updated_score(score, alpha, difficulty_config(d_min, d_max, eta));
      },
      py::arg("score"), py::arg("alpha"), py::arg("d_min") = 1.0, py::arg("d_max") = 9.0, py::arg("eta") = 4.0);

  m.def("variant_difficulty", [](int level, double d_min, double d_max) {
        return variant_difficulty(level, difficulty_config(d_min, d_max, 0.5 * (d_max - d_min)));
      },
      py::arg("level"), py::arg("d_min") = 1.0, py::arg("d_max") = 9.0);

  m.def("binary_advantages", [](double mu) {
        const auto a = theory::binary_advantages(mu);
        return py::make_tuple(a.a_plus, a.a_minus);
      },
      py::arg("mu"));
  m.def("projected_signal", &theory::projected_signal, py::arg("mu"), py::arg("s_plus"), py::arg("s_minus"));
  m.def("optimal_mu", &theory::optimal_mu, py::arg("s_plus"), py::arg("s_minus"), py::arg("grid_step") = 0.001);

  m.def("default_config", [] { return io::dump_run_config(sim::SimConfig{}); });

  m.def("run_pipeline", [](const py::list& groups, const py::object& config) {
        const auto cfg = to_config(config);
        const auto batch = to_batch(groups, cfg.difficulty);
        const auto out = run_pipeline(batch, cfg.pipeline);
        py::list rows;
        for (const auto& g : out.groups) {
          for (const auto& r : g.rollouts) {
            py::dict d;
            d["problem_id"] = g.problem_id;
            d["member"] = r.member;
            d["rollout"] = r.rollout;
            d["level"] = r.level;
            d["difficulty"] = r.difficulty;
            d["reward"] = r.reward;
            d["local"] = r.local_raw;
            d["global"] = r.global_raw;
            d["local_norm"] = r.local_norm;
            d["global_norm"] = r.global_norm;
            d["combined"] = r.combined;
            d["weighted"] = r.weighted;
            d["final"] = r.final;
            rows.append(d);
          }
        }
        return rows;
      },
      py::arg("groups"), py::arg("config") = py::none());

  m.def("run_training", [](const py::object& config) {
        const auto cfg = to_config(config);
        std::vector<sim::SimEpochMetrics> trace;
        {
          py::gil_scoped_release release;
          trace = sim::run_training(cfg);
        }
        py::list rows;
        for (const auto& e : trace) {
          py::dict d;
          d["epoch"] = e.epoch;
          d["mean_accuracy"] = e.mean_accuracy;
          d["original_accuracy"] = e.original_accuracy;
          d["nonzero_advantage_fraction"] = e.nonzero_advantage_fraction;
          d["skill"] = e.skill;
          d["difficulty_histogram"] = e.difficulty_histogram;
          rows.append(d);
        }
        return rows;
      },
      py::arg("config") = py::none());
}
