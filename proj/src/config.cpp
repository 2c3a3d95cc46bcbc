#include "tecd/config.hpp"

#include <fstream>
#include <json.hpp>
#include <set>

namespace tecd {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }

  require_keys(j, "config",
               {"dim", "seed", "eos", "background", "perturbation", "grid", "time",
                "source", "norm_order", "output"});
  RunConfig c;
  maybe(j, "dim", c.dim);
  maybe(j, "seed", c.seed);
  maybe(j, "norm_order", c.norm_order);
  if (j.contains("eos")) {
    require_keys(j["eos"], "eos", {"gamma"});
    maybe(j["eos"], "gamma", c.gamma);
  }
  if (j.contains("background")) {
    require_keys(j["background"], "background", {"f11p", "f11m", "f22", "f33", "S_plus"});
    maybe(j["background"], "f11p", c.f11p);
    maybe(j["background"], "f11m", c.f11m);
    maybe(j["background"], "f22", c.f22);
    maybe(j["background"], "f33", c.f33);
    maybe(j["background"], "S_plus", c.S_plus);
  }
  if (j.contains("perturbation")) {
    require_keys(j["perturbation"], "perturbation",
                 {"amp_f11", "amp_tan", "amp_offdiag", "amp_v", "amp_S", "amp_phi"});
    maybe(j["perturbation"], "amp_f11", c.perturbation.amp_f11);
    maybe(j["perturbation"], "amp_tan", c.perturbation.amp_tan);
    maybe(j["perturbation"], "amp_offdiag", c.perturbation.amp_offdiag);
    maybe(j["perturbation"], "amp_v", c.perturbation.amp_v);
    maybe(j["perturbation"], "amp_S", c.perturbation.amp_S);
    maybe(j["perturbation"], "amp_phi", c.perturbation.amp_phi);
  }
  if (j.contains("grid")) {
    require_keys(j["grid"], "grid", {"n1", "ntan", "x1max"});
    maybe(j["grid"], "n1", c.n1);
    maybe(j["grid"], "ntan", c.ntan);
    maybe(j["grid"], "x1max", c.x1max);
  }
  if (j.contains("time")) {
    require_keys(j["time"], "time", {"T", "cfl", "record_every"});
    maybe(j["time"], "T", c.T);
    maybe(j["time"], "cfl", c.cfl);
    maybe(j["time"], "record_every", c.record_every);
  }
  if (j.contains("source")) {
    require_keys(j["source"], "source",
                 {"amplitude", "x1_center", "x1_width", "t_scale", "mode", "components"});
    maybe(j["source"], "amplitude", c.source.amplitude);
    maybe(j["source"], "x1_center", c.source.x1_center);
    maybe(j["source"], "x1_width", c.source.x1_width);
    maybe(j["source"], "t_scale", c.source.t_scale);
    maybe(j["source"], "mode", c.source.mode);
    maybe(j["source"], "components", c.source.components);
  }
  if (j.contains("output")) {
    require_keys(j["output"], "output", {"dir", "snapshots"});
    maybe(j["output"], "dir", c.out_dir);
    maybe(j["output"], "snapshots", c.snapshots);
  }

  if (!valid_dim(c.dim)) throw ConfigError("dim must be 2 or 3");
  if (!(c.gamma > 1.0)) throw ConfigError("gamma must exceed 1");
  if (!(c.f11p > c.f11m) || !(c.f11m > 0.0))
    throw ConfigError("background requires f11p > f11m > 0");
  if (!(c.f22 > 0.0) || (c.dim == 3 && !(c.f33 > 0.0)))
    throw ConfigError("tangential stretches must be positive");
  if (!(c.T > 0.0) || !(c.cfl > 0.0) || c.cfl > 1.0)
    throw ConfigError("need T > 0 and 0 < cfl <= 1");
  if (c.record_every < 1) throw ConfigError("record_every must be >= 1");
  if (c.norm_order < 0 || c.norm_order > 3)
    throw ConfigError("norm_order must be in [0, 3]");
  Grid::make(c.dim, c.n1, c.ntan, c.x1max);  // validates
  for (int comp : c.source.components)
    if (comp < 0 || comp >= Layout(c.dim).n())
      throw ConfigError("source component out of range");
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json_text(text);
}

std::string RunConfig::to_json_text() const {
  json j;
  j["dim"] = dim;
  j["seed"] = seed;
  j["norm_order"] = norm_order;
  j["eos"] = {{"gamma", gamma}};
  j["background"] = {{"f11p", f11p}, {"f11m", f11m}, {"f22", f22}, {"f33", f33},
                     {"S_plus", S_plus}};
  j["perturbation"] = {{"amp_f11", perturbation.amp_f11},
                       {"amp_tan", perturbation.amp_tan},
                       {"amp_offdiag", perturbation.amp_offdiag},
                       {"amp_v", perturbation.amp_v},
                       {"amp_S", perturbation.amp_S},
                       {"amp_phi", perturbation.amp_phi}};
  j["grid"] = {{"n1", n1}, {"ntan", ntan}, {"x1max", x1max}};
  j["time"] = {{"T", T}, {"cfl", cfl}, {"record_every", record_every}};
  j["source"] = {{"amplitude", source.amplitude},
                 {"x1_center", source.x1_center},
                 {"x1_width", source.x1_width},
                 {"t_scale", source.t_scale},
                 {"mode", source.mode},
                 {"components", source.components}};
  j["output"] = {{"dir", out_dir}, {"snapshots", snapshots}};
  return j.dump(2);
}

}  // namespace tecd
