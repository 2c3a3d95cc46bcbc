#pragma once

#include <string>

#include "tecd/linearized.hpp"
#include "tecd/solver.hpp"

namespace tecd {

// Fully resolved run description. Parsed from JSON with strict unknown-key
// rejection: a silent typo in a physics parameter is the costliest failure
// mode this tool has.
struct RunConfig {
  int dim = 2;
  std::uint64_t seed = 0;
  double gamma = 1.4;

  double f11p = 1.0, f11m = 0.5, f22 = 1.0, f33 = 1.0, S_plus = 0.0;
  PerturbationSpec perturbation{};

  int n1 = 128, ntan = 32;
  double x1max = 8.0;

  double T = 1.0, cfl = 0.4;
  int record_every = 10;
  int norm_order = 1;

  BumpSource source{};
  bool snapshots = false;
  std::string out_dir = "out";

  static RunConfig from_json_text(const std::string& text);
  static RunConfig from_file(const std::string& path);
  std::string to_json_text() const;

  MaterialParams material() const { return MaterialParams::make(dim, gamma); }
  BackgroundState background() const {
    Eigen::VectorXd stretch(dim);
    stretch(0) = f11p;
    stretch(1) = f22;
    if (dim == 3) stretch(2) = f33;
    return build_background(stretch, f11m, S_plus, material());
  }
  Grid grid() const { return Grid::make(dim, n1, ntan, x1max); }
  SolverOptions solver_options() const {
    SolverOptions o;
    o.T = T;
    o.cfl = cfl;
    o.record_every = record_every;
    o.norm_order = norm_order;
    return o;
  }
  BasicState basic_state() const {
    return perturbation.trivial()
               ? BasicState::background(grid(), background())
               : BasicState::perturbed(grid(), background(), perturbation);
  }

  bool operator==(const RunConfig&) const = default;
};

}  // namespace tecd
