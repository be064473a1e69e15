#include "ratchet/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ratchet/errors.hpp"

namespace ratchet {

using nlohmann::json;

namespace {

/// One JSON object being read, with the keys consumed so far.
class Section {
 public:
  Section(const json* node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_->is_object()) throw ConfigError(path_, "must be an object");
  }

  bool has(const char* key) const { return node_ && node_->contains(key); }

  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  Section child(const char* key) {
    seen_.insert(key);
    return Section(has(key) ? &node_->at(key) : nullptr, field(key));
  }

  void number(const char* key, double& out, bool required = false) {
    const json* v = take(key, required);
    if (!v) return;
    if (!v->is_number()) throw ConfigError(field(key), "must be a number");
    out = v->get<double>();
  }

  void integer(const char* key, int& out) {
    const json* v = take(key, false);
    if (!v) return;
    if (!v->is_number_integer()) throw ConfigError(field(key), "must be an integer");
    out = v->get<int>();
  }

  void unsigned_integer(const char* key, std::uint64_t& out) {
    const json* v = take(key, false);
    if (!v) return;
    if (!v->is_number_unsigned()) throw ConfigError(field(key), "must be a nonnegative integer");
    out = v->get<std::uint64_t>();
  }

  void boolean(const char* key, bool& out) {
    const json* v = take(key, false);
    if (!v) return;
    if (!v->is_boolean()) throw ConfigError(field(key), "must be true or false");
    out = v->get<bool>();
  }

  void string(const char* key, std::string& out, bool required = false) {
    const json* v = take(key, required);
    if (!v) return;
    if (!v->is_string()) throw ConfigError(field(key), "must be a string");
    out = v->get<std::string>();
  }

  void numbers(const char* key, std::vector<double>& out) {
    const json* v = take(key, false);
    if (!v) return;
    if (!v->is_array()) throw ConfigError(field(key), "must be an array of numbers");
    out.clear();
    for (const json& e : *v) {
      if (!e.is_number()) throw ConfigError(field(key), "must be an array of numbers");
      out.push_back(e.get<double>());
    }
  }

  /// Rejects keys that were never read.
  void finish() const {
    if (!node_) return;
    for (auto it = node_->begin(); it != node_->end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(field(it.key().c_str()), "unknown key");
  }

 private:
  const json* take(const char* key, bool required) {
    seen_.insert(key);
    if (!has(key)) {
      if (required) throw ConfigError(field(key), "required field is missing");
      return nullptr;
    }
    return &node_->at(key);
  }

  const json* node_;
  std::string path_;
  std::set<std::string> seen_;
};

Utility parse_utility(Section sec, Utility fallback) {
  if (!sec.has("kind")) {
    sec.finish();
    return fallback;
  }
  std::string kind;
  sec.string("kind", kind);
  Utility u;
  if (kind == "crra") {
    double gamma = 0.5;
    sec.number("gamma", gamma, true);
    if (!(gamma > 0.0) || gamma == 1.0) throw ConfigError(sec.field("gamma"), "must be positive and not 1 (use kind \"log\")");
    u = Utility(Crra{gamma});
  } else if (kind == "log") {
    u = Utility(LogUtility{});
  } else if (kind == "cara") {
    double alpha = 1.0;
    sec.number("alpha", alpha, true);
    if (!(alpha > 0.0)) throw ConfigError(sec.field("alpha"), "must be positive");
    u = Utility(Cara{alpha});
  } else if (kind == "zero") {
    u = Utility(ZeroUtility{});
  } else if (kind == "table") {
    std::vector<double> c, marginal;
    double value0 = 0.0;
    sec.numbers("c", c);
    sec.numbers("marginal", marginal);
    sec.number("value0", value0);
    u = Utility(make_table_utility(std::move(c), std::move(marginal), value0));
  } else {
    throw ConfigError(sec.field("kind"), "must be one of crra, log, cara, zero, table");
  }
  sec.finish();
  return u;
}

json utility_json(const Utility& u) {
  json j;
  j["kind"] = u.kind();
  std::visit(
      [&](const auto& rep) {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, Crra>) j["gamma"] = rep.gamma;
        if constexpr (std::is_same_v<T, Cara>) j["alpha"] = rep.alpha;
        if constexpr (std::is_same_v<T, TableUtility>) {
          j["c"] = rep.c;
          j["marginal"] = rep.marginal;
          j["value0"] = rep.value0;
        }
      },
      u.rep());
  return j;
}

}  // namespace

Grid1D RunConfig::make_grid() const {
  return Grid1D::make(grid.z_min, grid.z_max, grid.nz, grid.n_tau, market.T, grid.margin, grid.collar);
}

std::vector<double> RunConfig::habit_grid() const {
  std::vector<double> h = make_habit_grid(habit.min, habit.max, habit.count, habit.spacing);
  if (h_bar() > habit.max) {
    // Extend up to the cap with the ratio of the top cell.
    double ratio = h[h.size() - 1] / h[h.size() - 2];
    int intervals = std::max(1, static_cast<int>(std::ceil(std::log(h_bar() / habit.max) / std::log(ratio) - 1e-9)));
    std::vector<double> ext = make_habit_grid(habit.max, h_bar(), intervals + 1, HabitSpacing::geometric);
    h.insert(h.end(), ext.begin() + 1, ext.end());
  }
  return h;
}

void apply_override(json& tree, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must read key.path=value");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &tree;
  std::size_t start = 0;
  while (true) {
    std::size_t dot = key.find('.', start);
    std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError(key, "override key has an empty component");
    if (!node->is_object()) throw ConfigError(key, "override descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

RunConfig parse_config(const json& tree) {
  Section root(&tree, "");
  RunConfig c;

  Section m = root.child("market");
  if (!root.has("market")) throw ConfigError("market", "required section is missing");
  double r = 0, mu = 0, sigma = 0, rho = 0, b = 0, T = 0;
  m.number("r", r, true);
  m.number("mu", mu, true);
  m.number("sigma", sigma, true);
  m.number("rho", rho, true);
  m.number("b", b, true);
  m.number("T", T, true);
  m.finish();
  c.market = MarketParams::make(r, mu, sigma, rho, b, T);

  Section u = root.child("utility");
  Utility U = parse_utility(u.child("U"), Utility(Crra{0.5}));
  Utility U_T = parse_utility(u.child("U_T"), Utility(Crra{0.5}));
  GrowthConstants growth;
  Section gr = u.child("growth");
  gr.number("gamma", growth.gamma);
  gr.number("theta", growth.theta);
  gr.number("K", growth.K);
  gr.finish();
  u.finish();
  c.kernel = make_kernel(std::move(U), std::move(U_T), growth, c.market.b);

  Section g = root.child("grid");
  g.number("z_min", c.grid.z_min);
  g.number("z_max", c.grid.z_max);
  g.integer("nz", c.grid.nz);
  g.integer("n_tau", c.grid.n_tau);
  g.number("margin", c.grid.margin);
  g.number("collar", c.grid.collar);
  Section hs = g.child("habit");
  hs.number("min", c.habit.min);
  hs.number("max", c.habit.max);
  hs.integer("count", c.habit.count);
  std::string spacing = to_string(c.habit.spacing);
  hs.string("spacing", spacing);
  c.habit.spacing = parse_habit_spacing(spacing);
  hs.number("cap_multiplier", c.habit.cap_multiplier);
  hs.finish();
  g.finish();
  c.make_grid();
  c.habit_grid();
  if (!(c.habit.cap_multiplier >= 1.0)) throw ConfigError("grid.habit.cap_multiplier", "must be at least 1");

  std::string scheme = to_string(c.scheme);
  root.string("scheme", scheme);
  if (scheme == "penalty") c.scheme = Scheme::penalty;
  else if (scheme == "complementarity") c.scheme = Scheme::complementarity;
  else throw ConfigError("scheme", "must be \"penalty\" or \"complementarity\"");

  Section pen = root.child("penalty");
  pen.number("epsilon", c.penalty.epsilon);
  pen.number("newton_tol", c.penalty.newton_tol);
  pen.integer("newton_max_iter", c.penalty.newton_max_iter);
  pen.finish();
  if (!(c.penalty.epsilon > 0.0)) throw ConfigError("penalty.epsilon", "must be positive");
  if (!(c.penalty.newton_tol > 0.0)) throw ConfigError("penalty.newton_tol", "must be positive");
  if (c.penalty.newton_max_iter < 1) throw ConfigError("penalty.newton_max_iter", "must be at least 1");

  Section cp = root.child("complementarity");
  cp.number("tol", c.complementarity.tol);
  cp.integer("max_iter", c.complementarity.max_iter);
  cp.number("omega", c.complementarity.omega);
  cp.finish();
  if (!(c.complementarity.tol > 0.0)) throw ConfigError("complementarity.tol", "must be positive");
  if (c.complementarity.max_iter < 1) throw ConfigError("complementarity.max_iter", "must be at least 1");
  if (c.complementarity.omega != 0.0 && !(c.complementarity.omega > 0.0 && c.complementarity.omega < 2.0))
    throw ConfigError("complementarity.omega", "must be 0 (automatic) or lie in (0, 2)");

  Section d = root.child("dual");
  std::string rule = c.quadrature == HabitQuadrature::corrected ? "corrected" : "trapezoid";
  d.string("quadrature", rule);
  if (rule == "corrected") c.quadrature = HabitQuadrature::corrected;
  else if (rule == "trapezoid") c.quadrature = HabitQuadrature::trapezoid;
  else throw ConfigError("dual.quadrature", "must be \"corrected\" or \"trapezoid\"");
  d.number("continuation_level", c.continuation_level);
  d.finish();
  if (!(c.continuation_level >= 0.0)) throw ConfigError("dual.continuation_level", "must be nonnegative");

  Section s = root.child("sim");
  s.boolean("enabled", c.sim.enabled);
  s.boolean("compare", c.sim.compare);
  s.integer("n_paths", c.sim.run.n_paths);
  s.integer("n_steps", c.sim.run.n_steps);
  s.unsigned_integer("seed", c.sim.run.seed);
  s.number("x0", c.sim.run.x0);
  s.number("h0", c.sim.run.h0);
  s.number("t0", c.sim.run.t0);
  s.boolean("antithetic", c.sim.run.antithetic);
  s.integer("trace_paths", c.sim.run.trace_paths);
  s.finish();
  c.sim.run.validate(c.market);
  if (c.sim.run.h0 < c.habit.min || c.sim.run.h0 > c.habit.max)
    throw ConfigError("sim.h0", "must lie in the habit grid range");

  Section o = root.child("outputs");
  o.string("directory", c.outputs.directory);
  o.integer("tau_stride", c.outputs.tau_stride);
  o.integer("z_stride", c.outputs.z_stride);
  o.numbers("probe_x", c.outputs.probe_x);
  o.numbers("probe_t", c.outputs.probe_t);
  o.numbers("probe_h", c.outputs.probe_h);
  o.finish();
  if (c.outputs.directory.empty()) throw ConfigError("outputs.directory", "must not be empty");
  if (c.outputs.tau_stride < 1) throw ConfigError("outputs.tau_stride", "must be at least 1");
  if (c.outputs.z_stride < 1) throw ConfigError("outputs.z_stride", "must be at least 1");
  for (double t : c.outputs.probe_t)
    if (!(t >= 0.0 && t < c.market.T)) throw ConfigError("outputs.probe_t", "times must lie in [0, T)");
  for (double h : c.outputs.probe_h)
    if (!(h >= c.habit.min && h <= c.habit.max)) throw ConfigError("outputs.probe_h", "habits must lie in the grid range");
  for (double x : c.outputs.probe_x)
    if (!(x > 0.0)) throw ConfigError("outputs.probe_x", "wealths must be positive");

  root.finish();
  return c;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read " + path);
  json tree = json::parse(in, nullptr, false);
  if (tree.is_discarded()) throw ConfigError("config", path + " is not valid JSON");
  for (const std::string& o : overrides) apply_override(tree, o);
  return parse_config(tree);
}

json to_json(const RunConfig& c) {
  json j;
  j["market"] = {{"r", c.market.r}, {"mu", c.market.mu}, {"sigma", c.market.sigma},
                 {"rho", c.market.rho}, {"b", c.market.b}, {"T", c.market.T}};
  j["utility"] = {{"U", utility_json(c.kernel.U)},
                  {"U_T", utility_json(c.kernel.U_T)},
                  {"growth", {{"gamma", c.kernel.growth.gamma}, {"theta", c.kernel.growth.theta}, {"K", c.kernel.growth.K}}}};
  j["grid"] = {{"z_min", c.grid.z_min}, {"z_max", c.grid.z_max}, {"nz", c.grid.nz}, {"n_tau", c.grid.n_tau},
               {"margin", c.grid.margin}, {"collar", c.grid.collar},
               {"habit", {{"min", c.habit.min}, {"max", c.habit.max}, {"count", c.habit.count},
                          {"spacing", to_string(c.habit.spacing)}, {"cap_multiplier", c.habit.cap_multiplier}}}};
  j["scheme"] = to_string(c.scheme);
  j["penalty"] = {{"epsilon", c.penalty.epsilon}, {"newton_tol", c.penalty.newton_tol},
                  {"newton_max_iter", c.penalty.newton_max_iter}};
  j["complementarity"] = {{"tol", c.complementarity.tol}, {"max_iter", c.complementarity.max_iter},
                          {"omega", c.complementarity.omega}};
  j["dual"] = {{"quadrature", c.quadrature == HabitQuadrature::corrected ? "corrected" : "trapezoid"},
               {"continuation_level", c.continuation_level}};
  const SimConfig& r = c.sim.run;
  j["sim"] = {{"enabled", c.sim.enabled}, {"compare", c.sim.compare}, {"n_paths", r.n_paths},
              {"n_steps", r.n_steps}, {"seed", r.seed}, {"x0", r.x0}, {"h0", r.h0}, {"t0", r.t0},
              {"antithetic", r.antithetic}, {"trace_paths", r.trace_paths}};
  j["outputs"] = {{"directory", c.outputs.directory}, {"tau_stride", c.outputs.tau_stride},
                  {"z_stride", c.outputs.z_stride}, {"probe_x", c.outputs.probe_x},
                  {"probe_t", c.outputs.probe_t}, {"probe_h", c.outputs.probe_h}};
  return j;
}

}  // namespace ratchet
