#include "ratchet/audit.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <sstream>

#include "ratchet/artifacts.hpp"
#include "ratchet/config.hpp"
#include "ratchet/errors.hpp"
#include "ratchet/obstacle.hpp"
#include "ratchet/pipeline.hpp"
#include "ratchet/primal.hpp"

namespace ratchet {

using nlohmann::json;
namespace fs = std::filesystem;

bool AuditReport::passed() const {
  return std::all_of(lines.begin(), lines.end(), [](const AuditLine& l) { return l.pass || !l.hard; });
}

std::string AuditReport::text() const {
  std::ostringstream os;
  for (const AuditLine& l : lines) {
    const char* status = !l.hard ? "INFO" : l.pass ? "PASS" : "FAIL";
    os << status << ' ' << l.name << " max_violation=" << format_double(l.violation)
       << " tolerance=" << format_double(l.tolerance) << '\n';
  }
  return os.str();
}

json AuditReport::to_json() const {
  json out = json::array();
  for (const AuditLine& l : lines)
    out.push_back({{"name", l.name}, {"max_violation", l.violation}, {"tolerance", l.tolerance},
                   {"hard", l.hard}, {"pass", l.pass}});
  return {{"schema_version", report_schema_version}, {"passed", passed()}, {"invariants", out}};
}

namespace {

constexpr double ninf = -std::numeric_limits<double>::infinity();

/// Running maximum of one invariant's violation.
struct Tally {
  double worst = ninf;
  void add(double v) {
    // NaN counts as an infinite violation.
    worst = std::isnan(v) ? std::numeric_limits<double>::infinity() : std::max(worst, v);
  }
};

class Auditor {
 public:
  explicit Auditor(AuditReport& rep) : rep_(rep) {}

  void hard(const std::string& name, const Tally& t, double tol) { add(name, t.worst, tol, true); }
  void info(const std::string& name, double v, double tol) { add(name, v, tol, false); }

 private:
  void add(const std::string& name, double v, double tol, bool is_hard) {
    // An invariant with no samples has nothing violated.
    if (v == ninf) v = 0.0;
    rep_.lines.push_back({name, v, tol, is_hard, v <= tol});
  }
  AuditReport& rep_;
};

std::string require(const fs::path& dir, const char* name) {
  fs::path f = dir / name;
  if (!fs::exists(f)) throw DataError(std::string("missing artifact ") + name);
  return read_file(f);
}

/// Sorted distinct values of one column, mapped to their rank.
std::map<double, int> ranks(const CsvData& d, int col) {
  std::map<double, int> m;
  for (const auto& r : d.rows) m.emplace(r[col], 0);
  int i = 0;
  for (auto& [v, idx] : m) idx = i++;
  return m;
}

void audit_manifest(const fs::path& dir, const json& manifest, const json& config, Auditor& a) {
  Tally integrity, listed;
  for (const json& f : manifest.at("files")) {
    std::string name = f.at("name").get<std::string>();
    std::string body = require(dir, name.c_str());
    integrity.add(sha256_hex(body) == f.at("sha256").get<std::string>() ? 0.0 : 1.0);
  }
  a.hard("manifest.hashes", integrity, 0.0);
  Tally hash;
  hash.add(config_hash(config) == manifest.at("config_hash").get<std::string>() ? 0.0 : 1.0);
  a.hard("manifest.config_hash", hash, 0.0);
}

void audit_w_surface(const CsvData& d, const RunConfig& cfg, const AuditTolerances& tol, Auditor& a) {
  const int cz = d.column("z"), ct = d.column("tau"), ch = d.column("h"), cw = d.column("w");
  auto zr = ranks(d, cz), tr = ranks(d, ct), hr = ranks(d, ch);
  const int nz = static_cast<int>(zr.size()), nt = static_cast<int>(tr.size()), nh = static_cast<int>(hr.size());
  std::vector<double> z(nz), tau(nt), h(nh);
  for (auto [v, i] : zr) z[i] = v;
  for (auto [v, i] : tr) tau[i] = v;
  for (auto [v, i] : hr) h[i] = v;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> w(static_cast<std::size_t>(nz) * nt * nh, nan);
  auto at = [&](int k, int n, int j) -> double& { return w[(static_cast<std::size_t>(k) * nt + n) * nz + j]; };
  for (const auto& r : d.rows) at(hr[r[ch]], tr[r[ct]], zr[r[cz]]) = r[cw];

  const double r = cfg.market.r;
  Tally neg, growth, dz, dtau, mono, slope, missing;
  for (int k = 0; k < nh; ++k)
    for (int n = 0; n < nt; ++n)
      for (int j = 0; j < nz; ++j) {
        double v = at(k, n, j);
        if (std::isnan(v)) {
          missing.add(1.0);
          continue;
        }
        neg.add(-v);
        growth.add(v - std::exp(z[j]) / r);
        if (j + 1 < nz) dz.add(v - at(k, n, j + 1));
        if (n + 1 < nt) dtau.add(v - at(k, n + 1, j));
        if (k + 1 < nh) {
          double up = at(k + 1, n, j);
          mono.add(v - up);
          slope.add((up - v) / (h[k + 1] - h[k]) - habit_slope_bound(cfg.market, cfg.kernel, h[k], h[k + 1]));
        }
      }
  a.hard("w.complete_grid", missing, 0.0);
  a.hard("w.nonnegative", neg, tol.obstacle);
  a.hard("w.growth_bound", growth, tol.obstacle);
  a.hard("w.nondecreasing_in_z", dz, tol.obstacle);
  a.hard("w.nondecreasing_in_tau", dtau, tol.obstacle);
  a.hard("w.nondecreasing_in_h", mono, tol.habit);
  a.hard("w.habit_slope_bound", slope, tol.habit);
}

void audit_boundary(const CsvData& d, const RunConfig& cfg, Auditor& a) {
  const Grid1D g = cfg.make_grid();
  const int ct = d.column("tau"), ch = d.column("h"), cz = d.column("z_star");
  // Curves keyed by h, each ordered by tau. Sentinel values mark nodes without an interior boundary.
  std::map<double, std::map<double, double>> curves;
  for (const auto& r : d.rows) curves[r[ch]][r[ct]] = r[cz];
  auto interior = [&](double z) { return z > g.z_min && z < g.z_max; };

  Tally limit, dtau, dh;
  double first_gap = 0.0;
  const std::map<double, double>* prev = nullptr;
  for (const auto& [h, curve] : curves) {
    const double lim = std::log(cfg.kernel.U.marginal(h));
    double last = std::numeric_limits<double>::quiet_NaN();
    bool first = true;
    for (const auto& [tau, zs] : curve) {
      if (tau <= 0.0 || !interior(zs)) continue;
      limit.add(zs - lim);
      if (first) first_gap = std::max(first_gap, std::abs(zs - lim));
      first = false;
      if (!std::isnan(last)) dtau.add(zs - last);
      last = zs;
      if (prev) {
        auto it = prev->find(tau);
        if (it != prev->end() && interior(it->second)) dh.add(zs - it->second);
      }
    }
    prev = &curve;
  }
  a.hard("boundary.below_terminal_limit", limit, 1e-12);
  a.hard("boundary.nonincreasing_in_tau", dtau, g.dz);
  a.hard("boundary.nonincreasing_in_h", dh, g.dz);
  // Reported against two cells; the time-step part of the bound is fitted by the refinement study.
  a.info("boundary.first_step_gap", first_gap, 2.0 * g.dz);
}

void audit_thresholds(const CsvData& d, const RunConfig& cfg, const AuditTolerances& tol, Auditor& a) {
  const int ct = d.column("t"), ch = d.column("h"), cl = d.column("x_L"), chi = d.column("x_H"),
            cs = d.column("x_star");
  Tally order_lh, order_hs, floor;
  for (const auto& r : d.rows) {
    order_lh.add(r[cl] - r[chi]);
    order_hs.add(r[chi] - r[cs]);
    floor.add((cfg.market.wealth_floor(r[ch], cfg.market.T - r[ct]) - r[cl]) / (1.0 + r[cl]));
  }
  // x_L < x_H is strict; the tolerance only absorbs the sign of an exact tie.
  a.hard("thresholds.x_L_below_x_H", order_lh, 0.0);
  a.hard("thresholds.x_H_below_x_star", order_hs, 0.0);
  a.hard("thresholds.above_floor", floor, tol.policy);
}

void audit_dual(const CsvData& d, const AuditTolerances& tol, Auditor& a) {
  const int cz = d.column("z"), cy = d.column("v_y"), cyy = d.column("v_yy");
  Tally conv, slope;
  for (const auto& r : d.rows) {
    conv.add(-std::exp(2.0 * r[cz]) * r[cyy]);
    slope.add(r[cy]);
  }
  a.hard("dual.convexity", conv, tol.convexity);
  a.hard("dual.negative_slope", slope, 0.0);
}

void audit_policy(const std::string& text, const RunConfig& cfg, const AuditTolerances& tol, Auditor& a) {
  // The region column is text, so this table is read row by row.
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (line != "x,t,h,V,pi,c,region") throw DataError("policy table has an unexpected header");
  Tally band, cap, stock, bounds, labels;
  const double b = cfg.market.b;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream cells(line);
    std::string cell;
    std::vector<double> v;
    for (int i = 0; i < 6 && std::getline(cells, cell, ','); ++i) v.push_back(std::strtod(cell.c_str(), nullptr));
    std::string region;
    std::getline(cells, region);
    const double x = v[0], t = v[1], h = v[2], V = v[3], pi = v[4], c = v[5];
    if (region == "below_floor" || region == "outside_box") continue;
    if (region != "LC" && region != "MC" && region != "HC" && region != "S") {
      labels.add(1.0);
      continue;
    }
    band.add((b * h - c) / (1.0 + c));
    if (region != "S") cap.add((c - h) / (1.0 + h));
    stock.add(-pi / (1.0 + std::abs(pi)));
    ValueBounds vb = value_bounds(cfg.market, cfg.kernel, x, t, h);
    bounds.add(std::max(vb.lower - V, V - vb.upper) / (1.0 + std::abs(V)));
  }
  a.hard("policy.region_labels", labels, 0.0);
  a.hard("policy.consumption_above_floor", band, tol.policy);
  a.hard("policy.consumption_below_habit", cap, tol.policy);
  a.hard("policy.stock_nonnegative", stock, tol.policy);
  a.hard("policy.value_bounds", bounds, tol.policy);
}

void audit_simulation(const json& s, const AuditTolerances& tol, Auditor& a) {
  const json& o = s.at("optimal");
  const json& c = s.at("config");
  auto tally = [](double v) {
    Tally t;
    t.add(v);
    return t;
  };
  const double margin = o.at("min_consumption_margin").is_null() ? 0.0 : o.at("min_consumption_margin").get<double>();
  a.hard("sim.drawdown_constraint", tally(-margin), 0.0);
  a.hard("sim.habit_nondecreasing", tally(o.at("max_habit_drop").get<double>()), 0.0);
  const double n = c.at("n_paths").get<double>();
  a.hard("sim.excluded_fraction", tally(o.at("excluded").get<double>() / n), tol.probability);
  const double est = o.at("value_estimate").get<double>();
  const json& br = s.at("bracket");
  a.hard("sim.below_value_function", tally(est - br.at("upper").get<double>()), 0.0);
  a.hard("sim.above_value_function", tally(br.at("lower").get<double>() - est), 0.0);
  const json& cmp = s.at("comparison");
  if (cmp.contains("gap")) {
    // The comparison policy must lose by more than two combined standard errors.
    double need = 2.0 * cmp.at("combined_std_error").get<double>();
    a.hard("sim.beats_comparison", tally(need - cmp.at("gap").get<double>()), 0.0);
  }
}

}  // namespace

AuditReport audit_artifacts(const std::string& dir_name, const AuditTolerances& tol) {
  const fs::path dir(dir_name);
  if (!fs::is_directory(dir)) throw DataError("artifact directory " + dir_name + " does not exist");
  AuditReport rep;
  Auditor a(rep);

  json config = json::parse(require(dir, artifact::config), nullptr, false);
  json manifest = json::parse(require(dir, artifact::manifest), nullptr, false);
  if (config.is_discarded() || manifest.is_discarded()) throw DataError("config or manifest is not valid JSON");
  const RunConfig cfg = parse_config(config);
  audit_manifest(dir, manifest, config, a);

  audit_w_surface(parse_csv(require(dir, artifact::w_surface)), cfg, tol, a);
  audit_boundary(parse_csv(require(dir, artifact::boundary)), cfg, a);
  audit_thresholds(parse_csv(require(dir, artifact::thresholds)), cfg, tol, a);
  audit_dual(parse_csv(require(dir, artifact::dual_samples)), tol, a);
  audit_policy(require(dir, artifact::policy), cfg, tol, a);
  if (cfg.sim.enabled) {
    json sim = json::parse(require(dir, artifact::simulation), nullptr, false);
    if (sim.is_discarded()) throw DataError("simulation report is not valid JSON");
    audit_simulation(sim, tol, a);
  }
  return rep;
}

}  // namespace ratchet
