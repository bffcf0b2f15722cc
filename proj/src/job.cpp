#include "cmv/job.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>

#include "cmv/error.hpp"
#include "cmv/oracle.hpp"
#include "cmv/parallel.hpp"

namespace cmv {

using nlohmann::json;

std::string library_version() { return CMV_VERSION; }

const char* to_string(JobKind k) noexcept {
  switch (k) {
    case JobKind::Density: return "density";
    case JobKind::ScatteringSweep: return "scattering-sweep";
    case JobKind::ReflectionlessReport: return "reflectionless-report";
    case JobKind::DynamicsProbe: return "dynamics-probe";
    case JobKind::OracleCheck: return "oracle-check";
  }
  return "unknown";
}

JobKind job_from_string(const std::string& s) {
  for (JobKind k : {JobKind::Density, JobKind::ScatteringSweep, JobKind::ReflectionlessReport, JobKind::DynamicsProbe,
                    JobKind::OracleCheck}) {
    if (s == to_string(k)) return k;
  }
  fail(ErrorKind::ConfigSchema, "unknown job '" + s + "'");
}

namespace {

/// Reads an object field by field and rejects keys nobody asked for.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) fail(ErrorKind::ConfigSchema, where() + " must be an object");
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& require(const std::string& key) {
    const json* v = find(key);
    if (!v) fail(ErrorKind::ConfigSchema, "missing required key " + at(key));
    return *v;
  }

  double number(const std::string& key, double fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number()) fail(ErrorKind::ConfigSchema, at(key) + " must be a number");
    return v->get<double>();
  }

  long long integer(const std::string& key, long long fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) fail(ErrorKind::ConfigSchema, at(key) + " must be an integer");
    return v->get<long long>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(ErrorKind::ConfigSchema, at(key) + " must be a boolean");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) fail(ErrorKind::ConfigSchema, at(key) + " must be a string");
    return v->get<std::string>();
  }

  cplx complex(const std::string& key, cplx fallback) {
    const json* v = find(key);
    return v ? parse_complex(*v, at(key)) : fallback;
  }

  /// Call after every field has been read.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(ErrorKind::ConfigSchema, "unknown key " + at(it.key()));
    }
  }

  std::string at(const std::string& key) const { return path_.empty() ? "'" + key + "'" : "'" + path_ + "." + key + "'"; }

  static cplx parse_complex(const json& v, const std::string& where) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
      return {v[0].get<double>(), v[1].get<double>()};
    }
    fail(ErrorKind::ConfigSchema, where + " must be a number or a [re, im] pair");
  }

 private:
  std::string where() const { return path_.empty() ? "config" : "'" + path_ + "'"; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json complex_json(cplx v) { return json::array({v.real(), v.imag()}); }

CoefficientSequence parse_coefficients(const json& j, json& resolved) {
  Fields f(j, "coefficients");
  const std::string kind = f.string("kind", "");
  if (kind.empty()) fail(ErrorKind::ConfigSchema, "missing required key 'coefficients.kind'");
  resolved = json{{"kind", kind}};
  std::optional<CoefficientSequence> seq;
  if (kind == "free") {
    seq = CoefficientSequence::free();
  } else if (kind == "constant") {
    const cplx v = Fields::parse_complex(f.require("value"), f.at("value"));
    resolved["value"] = complex_json(v);
    seq = CoefficientSequence::constant(v);
  } else if (kind == "single_barrier") {
    const Site site = f.integer("site", 0);
    const cplx v = Fields::parse_complex(f.require("value"), f.at("value"));
    resolved["site"] = site;
    resolved["value"] = complex_json(v);
    seq = CoefficientSequence::single_barrier(site, v);
  } else if (kind == "random_decay") {
    const long long seed = f.integer("seed", 1);
    if (seed < 0) fail(ErrorKind::ConfigSchema, f.at("seed") + " must be non-negative");
    RandomDecayParams p{static_cast<std::uint64_t>(seed), f.number("rate", 0.5), f.number("amplitude", 0.5)};
    resolved["seed"] = seed;
    resolved["rate"] = p.rate;
    resolved["amplitude"] = p.amplitude;
    seq = CoefficientSequence(p);
  } else if (kind == "periodic") {
    const json& list = f.require("period");
    if (!list.is_array()) fail(ErrorKind::ConfigSchema, f.at("period") + " must be an array");
    std::vector<cplx> period;
    resolved["period"] = json::array();
    for (std::size_t i = 0; i < list.size(); ++i) {
      period.push_back(Fields::parse_complex(list[i], f.at("period") + "[" + std::to_string(i) + "]"));
      resolved["period"].push_back(complex_json(period.back()));
    }
    seq = CoefficientSequence::periodic(std::move(period));
  } else if (kind == "explicit") {
    const json& values = f.require("values");
    if (!values.is_object()) fail(ErrorKind::ConfigSchema, f.at("values") + " must map site indices to values");
    std::map<Site, cplx> map;
    for (auto it = values.begin(); it != values.end(); ++it) {
      std::size_t used = 0;
      long long k = 0;
      try {
        k = std::stoll(it.key(), &used);
      } catch (...) {
        used = 0;
      }
      if (used != it.key().size()) fail(ErrorKind::ConfigSchema, "explicit key '" + it.key() + "' is not an integer");
      map[k] = Fields::parse_complex(it.value(), f.at("values") + "[" + it.key() + "]");
    }
    const cplx tail = f.complex("tail", {});
    resolved["values"] = json::object();
    for (const auto& [k, v] : map) resolved["values"][std::to_string(k)] = complex_json(v);
    resolved["tail"] = complex_json(tail);
    seq = CoefficientSequence::explicit_list(std::move(map), tail);
  } else {
    fail(ErrorKind::ConfigSchema, "unknown coefficient kind '" + kind + "'");
  }
  f.finish();
  return *seq;
}

}  // namespace

JobConfig parse_config(const json& j) {
  JobConfig c;
  Fields root(j, "");
  try {
    c.coefficients = parse_coefficients(root.require("coefficients"), c.coefficients_json);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ConfigSchema) fail(ErrorKind::ConfigSchema, e.detail());
    throw;
  }
  c.job = job_from_string(root.string("job", ""));
  c.decoupling_n = root.integer("decoupling_n", 0);

  Site a = -2048, b = 2048;
  if (const json* w = root.find("window")) {
    Fields f(*w, "window");
    a = f.integer("a", a);
    b = f.integer("b", b);
    f.finish();
  }
  if (b - a < Window::kMinSpan) fail(ErrorKind::ConfigSchema, "window must span at least 8 sites");
  c.window = Window(a, b);
  if (!c.window.contains(c.decoupling_n)) fail(ErrorKind::ConfigSchema, "decoupling_n must lie inside the window");

  if (const json* g = root.find("theta_grid")) {
    Fields f(*g, "theta_grid");
    const long long count = f.integer("count", 64);
    if (count < 1) fail(ErrorKind::ConfigSchema, "'theta_grid.count' must be positive");
    c.theta_count = static_cast<std::size_t>(count);
    c.theta_offset = f.number("offset", 0.5);
    f.finish();
  }

  if (const json* r = root.find("radial")) {
    Fields f(*r, "radial");
    c.radial.eps0 = f.number("eps0", c.radial.eps0);
    c.radial.levels = static_cast<int>(f.integer("levels", c.radial.levels));
    c.radial.contraction = f.number("contraction", c.radial.contraction);
    const std::string ex = f.string("extrapolation", "richardson");
    if (ex == "richardson") {
      c.radial.extrapolation = Extrapolation::Richardson;
    } else if (ex == "none") {
      c.radial.extrapolation = Extrapolation::None;
    } else {
      fail(ErrorKind::ConfigSchema, "'radial.extrapolation' must be 'none' or 'richardson'");
    }
    c.radial.tol = f.number("tol", c.radial.tol);
    c.radial.inside = f.boolean("inside", c.radial.inside);
    f.finish();
  }
  try {
    c.radial.validate();
  } catch (const Error& e) {
    fail(ErrorKind::ConfigSchema, e.detail());
  }

  if (const json* t = root.find("tolerances")) {
    Fields f(*t, "tolerances");
    c.tolerances.unitarity = f.number("unitarity", c.tolerances.unitarity);
    c.tolerances.offdiag = f.number("offdiag", c.tolerances.offdiag);
    c.tolerances.window_doubling = f.number("window_doubling", c.tolerances.window_doubling);
    f.finish();
  }
  c.support_threshold = root.number("support_threshold", c.support_threshold);

  if (const json* o = root.find("output")) {
    Fields f(*o, "output");
    c.output_path = f.string("path", "");
    const std::string fmt = f.string("format", "csv");
    if (fmt == "csv") {
      c.format = OutputFormat::Csv;
    } else if (fmt == "json") {
      c.format = OutputFormat::Json;
    } else {
      fail(ErrorKind::ConfigSchema, "'output.format' must be 'csv' or 'json'");
    }
    f.finish();
  }

  if (const json* p = root.find("probe")) {
    Fields f(*p, "probe");
    c.probe.packet.center = f.integer("center", c.probe.packet.center);
    c.probe.packet.width = f.number("width", c.probe.packet.width);
    c.probe.packet.theta0 = f.number("theta0", c.probe.packet.theta0);
    c.probe.horizon = f.integer("horizon", c.probe.horizon);
    c.probe.stride = f.integer("stride", c.probe.stride);
    if (c.probe.stride < 1 || c.probe.horizon < 0) {
      fail(ErrorKind::ConfigSchema, "'probe.stride' must be positive and 'probe.horizon' non-negative");
    }
    f.finish();
  }

  if (const json* o = root.find("oracle")) {
    Fields f(*o, "oracle");
    c.oracle_z = f.complex("z", c.oracle_z);
    f.finish();
  }
  root.finish();
  return c;
}

JobConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ConfigSchema, "cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::ConfigSchema, std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

json JobConfig::resolved() const {
  return json{
      {"coefficients", coefficients_json},
      {"decoupling_n", decoupling_n},
      {"window", {{"a", window.a()}, {"b", window.b()}}},
      {"theta_grid", {{"count", theta_count}, {"offset", theta_offset}}},
      {"radial",
       {{"eps0", radial.eps0},
        {"levels", radial.levels},
        {"contraction", radial.contraction},
        {"extrapolation", radial.extrapolation == Extrapolation::Richardson ? "richardson" : "none"},
        {"tol", radial.tol},
        {"inside", radial.inside}}},
      {"tolerances",
       {{"unitarity", tolerances.unitarity},
        {"offdiag", tolerances.offdiag},
        {"window_doubling", tolerances.window_doubling}}},
      {"support_threshold", support_threshold},
      {"job", to_string(job)},
      {"output", {{"path", output_path}, {"format", format == OutputFormat::Csv ? "csv" : "json"}}},
      {"probe",
       {{"center", probe.packet.center},
        {"width", probe.packet.width},
        {"theta0", probe.packet.theta0},
        {"horizon", probe.horizon},
        {"stride", probe.stride}}},
      {"oracle", {{"z", complex_json(oracle_z)}}},
  };
}

ScatteringOptions JobConfig::scattering_options() const {
  ScatteringOptions o;
  o.schedule = radial;
  o.solver.window_tol = tolerances.window_doubling;
  o.solver.min_half_width = std::max(decoupling_n - window.a(), window.b() - decoupling_n);
  o.support_threshold = support_threshold;
  return o;
}

json report_schema() {
  const auto col = [](const char* name, const char* doc) { return json{{"name", name}, {"description", doc}}; };
  json s;
  s["density"] = json::array({
      col("theta", "angle of the boundary point e^{i theta}"),
      col("n", "decoupling site"),
      col("re_m_l", "Re of the boundary value of m^{(l)}_{n-1}"),
      col("im_m_l", "Im of the boundary value of m^{(l)}_{n-1}"),
      col("re_m_r", "Re of the boundary value of m^{(r)}_n"),
      col("im_m_r", "Im of the boundary value of m^{(r)}_n"),
      col("density_l", "-Re m^{(l)}_{n-1}, a.c. density of the left half-line at n-1"),
      col("density_r", "Re m^{(r)}_n, a.c. density of the right half-line at n"),
      col("err_l", "error estimate of m^{(l)}_{n-1}"),
      col("err_r", "error estimate of m^{(r)}_n"),
      col("converged_l", "1 if err_l <= radial.tol"),
      col("converged_r", "1 if err_r <= radial.tol"),
  });
  s["scattering-sweep"] = json::array({
      col("theta", "angle of the boundary point e^{i theta}"),
      col("n", "decoupling site"),
      col("re_sll", "Re s_ll"),
      col("im_sll", "Im s_ll"),
      col("re_slr", "Re s_lr"),
      col("im_slr", "Im s_lr"),
      col("re_srl", "Re s_rl"),
      col("im_srl", "Im s_rl"),
      col("re_srr", "Re s_rr"),
      col("im_srr", "Im s_rr"),
      col("density_l", "a.c. density of the left half-line at n-1"),
      col("density_r", "a.c. density of the right half-line at n"),
      col("unitarity_defect", "max |s^* s - I| over the active channels"),
      col("refl_residual", "|M^{(l)}_n + conj M^{(r)}_n|"),
      col("converged_l", "1 if the left m boundary value converged"),
      col("converged_r", "1 if the right m boundary value converged"),
      col("converged", "1 if every boundary value of the sample converged"),
  });
  s["reflectionless-report"] = json::array({
      col("theta", "angle of the boundary point e^{i theta}"),
      col("n", "decoupling site"),
      col("abs_sll", "|s_ll|"),
      col("abs_srr", "|s_rr|"),
      col("err_sll", "propagated error of s_ll"),
      col("err_srr", "propagated error of s_rr"),
      col("refl_residual", "|M^{(l)}_n + conj M^{(r)}_n|"),
      col("refl_err", "propagated error of refl_residual"),
      col("support_l", "1 if density_l > support_threshold"),
      col("support_r", "1 if density_r > support_threshold"),
      col("by_matrix", "off-diagonal | diagonal | ambiguous | not-converged | excluded"),
      col("by_residual", "same classification from refl_residual <= tolerances.offdiag"),
  });
  s["dynamics-probe"] = json::array({
      col("step", "number of applications of the truncated operator"),
      col("left_mass", "mass on sites < n outside the edge zone"),
      col("right_mass", "mass on sites >= n outside the edge zone"),
      col("escaped", "mass in the three-site edge zones"),
  });
  s["oracle-check"] = json::array({
      col("name", "comparison"),
      col("value", "observed discrepancy"),
      col("tolerance", "documented tolerance"),
      col("passed", "1 if value <= tolerance"),
  });
  return s;
}

std::vector<std::string> report_columns(JobKind job) {
  std::vector<std::string> out;
  const json schema = report_schema();
  for (const auto& c : schema.at(to_string(job))) out.push_back(c["name"].get<std::string>());
  return out;
}

namespace {

json sample_error(double theta, const Error& e) {
  return json{{"theta", theta}, {"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
}

json null_or(double v, bool ok) { return ok ? json(v) : json(nullptr); }

Report run_density(const JobConfig& c, unsigned workers) {
  Report r;
  const ScatteringEngine engine(c.coefficients, c.decoupling_n, c.scattering_options());
  const auto grid = theta_grid(c.theta_count, c.theta_offset);
  struct Out {
    std::optional<BoundaryData> data;
    json error;
  };
  const auto results = parallel_map(grid.size(), workers, [&](std::size_t i) {
    Out o;
    try {
      o.data = engine.boundary(grid[i]);
    } catch (const Error& e) {
      o.error = sample_error(grid[i], e);
    }
    return o;
  });
  std::size_t converged = 0;
  double tol = c.radial.tol;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& o = results[i];
    if (!o.data) {
      r.sample_errors.push_back(o.error);
      r.rows.push_back({grid[i], c.decoupling_n, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr,
                        false, false});
      continue;
    }
    const BoundaryData& d = *o.data;
    const double dl = -d.m_left.value.real();
    const double dr = d.m_right.value.real();
    for (const auto& [side, val] : {std::pair{"left", dl}, std::pair{"right", dr}}) {
      if (val < -tol) {
        r.sample_errors.push_back(json{{"theta", grid[i]},
                                       {"kind", std::string(to_string(ErrorKind::NegativeDensity))},
                                       {"message", std::string(side) + " density " + std::to_string(val)}});
      }
    }
    r.rows.push_back({grid[i], c.decoupling_n, d.m_left.value.real(), d.m_left.value.imag(), d.m_right.value.real(),
                      d.m_right.value.imag(), null_or(std::max(dl, 0.0), dl >= -tol),
                      null_or(std::max(dr, 0.0), dr >= -tol), d.m_left.err_est, d.m_right.err_est,
                      d.m_left.converged, d.m_right.converged});
    converged += d.m_left.converged && d.m_right.converged;
  }
  r.summary = {{"samples", grid.size()}, {"converged", converged}, {"errors", r.sample_errors.size()}};
  return r;
}

Report run_scattering(const JobConfig& c, unsigned workers) {
  Report r;
  const ScatteringEngine engine(c.coefficients, c.decoupling_n, c.scattering_options());
  const auto grid = theta_grid(c.theta_count, c.theta_offset);
  const auto samples = parallel_map(grid.size(), workers, [&](std::size_t i) { return engine.sample(grid[i]); });
  std::size_t converged = 0, two_channel = 0, unitary = 0;
  double max_defect = 0.0, max_diag = 0.0, max_refl = 0.0;
  for (const auto& s : samples) {
    if (s.error) {
      r.sample_errors.push_back(json{{"theta", s.theta}, {"kind", std::string(to_string(*s.error))}, {"message", s.message}});
      std::vector<json> row(17, nullptr);
      row[0] = s.theta;
      row[1] = s.n;
      row[14] = row[15] = row[16] = false;
      r.rows.push_back(std::move(row));
      continue;
    }
    r.rows.push_back({s.theta, s.n, s.s(0, 0).real(), s.s(0, 0).imag(), s.s(0, 1).real(), s.s(0, 1).imag(),
                      s.s(1, 0).real(), s.s(1, 0).imag(), s.s(1, 1).real(), s.s(1, 1).imag(), s.density_l,
                      s.density_r, s.unitarity_defect, s.refl_residual, s.converged_l, s.converged_r, s.converged});
    if (!s.converged) continue;
    ++converged;
    max_refl = std::max(max_refl, s.refl_residual);
    if (s.support_l) max_diag = std::max(max_diag, std::abs(s.s(0, 0)));
    if (s.support_r) max_diag = std::max(max_diag, std::abs(s.s(1, 1)));
    if (s.two_channel()) {
      ++two_channel;
      max_defect = std::max(max_defect, s.unitarity_defect);
      unitary += s.unitarity_defect <= c.tolerances.unitarity;
    }
  }
  r.summary = {{"samples", grid.size()},
               {"converged", converged},
               {"two_channel", two_channel},
               {"unitary_within_tolerance", unitary},
               {"max_unitarity_defect", max_defect},
               {"max_abs_diagonal", max_diag},
               {"max_refl_residual", max_refl},
               {"errors", r.sample_errors.size()}};
  return r;
}

Report run_reflectionless(const JobConfig& c, unsigned workers) {
  Report r;
  const auto grid = theta_grid(c.theta_count, c.theta_offset);
  const OffDiagonalityReport rep = off_diagonality_report(c.coefficients, c.decoupling_n, grid, c.tolerances.offdiag,
                                                          c.scattering_options(), workers);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& s = rep.samples[i];
    const auto& v = rep.verdicts[i];
    if (s.error) {
      r.sample_errors.push_back(json{{"theta", s.theta}, {"kind", std::string(to_string(*s.error))}, {"message", s.message}});
      r.rows.push_back({s.theta, s.n, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, false, false,
                        to_string(v.by_matrix), to_string(v.by_residual)});
      continue;
    }
    r.rows.push_back({s.theta, s.n, std::abs(s.s(0, 0)), std::abs(s.s(1, 1)), s.s_err(0, 0), s.s_err(1, 1),
                      s.refl_residual, s.refl_err, s.support_l, s.support_r, to_string(v.by_matrix),
                      to_string(v.by_residual)});
  }
  r.summary = {{"samples", grid.size()},
               {"converged", rep.converged},
               {"off_diagonal", rep.off_diagonal},
               {"off_diagonal_fraction", rep.off_diagonal_fraction()},
               {"ambiguous", rep.ambiguous},
               {"decided", rep.decided},
               {"agree", rep.agree},
               {"agreement_fraction", rep.agreement_fraction()},
               {"errors", r.sample_errors.size()}};
  return r;
}

Report run_probe(const JobConfig& c) {
  Report r;
  const ProbeResult p = reflection_probe(c.coefficients, c.decoupling_n, c.probe.packet, c.probe.horizon, c.window,
                                         c.probe.stride);
  for (const auto& s : p.series) r.rows.push_back({s.step, s.left_mass, s.right_mass, s.escaped});
  r.summary = {{"left_mass", p.left_mass},
               {"right_mass", p.right_mass},
               {"escaped", p.escaped},
               {"steps", p.steps},
               {"edge_contact", p.edge_contact}};
  return r;
}

Report run_oracle(const JobConfig& c) {
  Report r;
  std::size_t passed = 0;
  const auto suite = oracle_suite(c.coefficients, c.decoupling_n, c.oracle_z);
  for (const auto& cmp : suite) {
    r.rows.push_back({cmp.name, cmp.value, cmp.tolerance, cmp.passed});
    passed += cmp.passed;
  }
  r.ok = passed == suite.size();
  r.summary = {{"comparisons", suite.size()}, {"passed", passed}};
  return r;
}

}  // namespace

Report run(const JobConfig& config, unsigned workers) {
  Report r;
  switch (config.job) {
    case JobKind::Density: r = run_density(config, workers); break;
    case JobKind::ScatteringSweep: r = run_scattering(config, workers); break;
    case JobKind::ReflectionlessReport: r = run_reflectionless(config, workers); break;
    case JobKind::DynamicsProbe: r = run_probe(config); break;
    case JobKind::OracleCheck: r = run_oracle(config); break;
  }
  r.job = config.job;
  r.columns = report_columns(config.job);
  return r;
}

namespace {

std::string cell(const json& v) {
  if (v.is_null()) return "nan";
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

void write_csv(std::ostream& os, const Report& report, const JobConfig& config) {
  os << "# cmvscat " << library_version() << "\n";
  os << "# job: " << to_string(report.job) << "\n";
  os << "# config: " << config.resolved().dump() << "\n";
  os << "# summary: " << report.summary.dump() << "\n";
  for (const auto& e : report.sample_errors) os << "# error: " << e.dump() << "\n";
  for (std::size_t i = 0; i < report.columns.size(); ++i) os << (i ? "," : "") << report.columns[i];
  os << "\n";
  for (const auto& row : report.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell(row[i]);
    os << "\n";
  }
}

void write_json(std::ostream& os, const Report& report, const JobConfig& config) {
  json rows = json::array();
  for (const auto& row : report.rows) {
    json obj = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[report.columns[i]] = row[i];
    rows.push_back(std::move(obj));
  }
  const json out{{"tool", "cmvscat"},
                 {"version", library_version()},
                 {"job", to_string(report.job)},
                 {"config", config.resolved()},
                 {"summary", report.summary},
                 {"errors", report.sample_errors},
                 {"columns", report.columns},
                 {"rows", rows}};
  os << out.dump(2) << "\n";
}

void write_truncation_csv(std::ostream& os, const BandedUnitary& u) {
  os << "i,j,re,im\n";
  char buf[96];
  for (Site i = u.window().a(); i <= u.window().b(); ++i) {
    for (Site j = i - 2; j <= i + 2; ++j) {
      if (!u.window().contains(j)) continue;
      const cplx v = u.at(i, j);
      std::snprintf(buf, sizeof buf, "%lld,%lld,%.17g,%.17g\n", static_cast<long long>(i), static_cast<long long>(j),
                    v.real(), v.imag());
      os << buf;
    }
  }
}

}  // namespace cmv
