#include <cmath>
#include <initializer_list>
#include <json.hpp>
#include <string>

#include "immsim/cli.hpp"
#include "immsim/error.hpp"

namespace immsim::cli {

namespace {

using nlohmann::json;

struct Reader {
  bool strict = true;

  void keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) const {
    if (!obj.is_object()) throw Error(Errc::parse_error, where + " must be an object");
    if (!strict) return;
    for (const auto& item : obj.items()) {
      bool known = false;
      for (const char* k : allowed) known = known || item.key() == k;
      if (!known) throw Error(Errc::unknown_key, where + "." + item.key());
    }
  }

  template <class T>
  T get(const json& obj, const char* key, const std::string& where, const T& fallback) const {
    if (!obj.contains(key)) return fallback;
    return as<T>(obj.at(key), where + "." + key);
  }

  template <class T>
  T need(const json& obj, const char* key, const std::string& where) const {
    if (!obj.contains(key)) throw Error(Errc::parse_error, "missing key " + where + "." + key);
    return as<T>(obj.at(key), where + "." + key);
  }

  template <class T>
  T as(const json& v, const std::string& where) const {
    try {
      return v.get<T>();
    } catch (const json::exception& e) {
      throw Error(Errc::parse_error, "bad value for " + where + ": " + e.what());
    }
  }
};

Point point_of(const std::vector<double>& v, const std::string& where) {
  if (v.empty() || v.size() > 2) throw Error(Errc::parse_error, where + " must hold 1 or 2 coordinates");
  return {v[0], v.size() > 1 ? v[1] : 0.0};
}

std::vector<double> coords(const Point& p, int dim) {
  return dim == 1 ? std::vector<double>{p[0]} : std::vector<double>{p[0], p[1]};
}

Potential parse_potential(const Reader& r, const json& j, const std::string& where) {
  const auto kind = r.need<std::string>(j, "kind", where);
  Potential p;
  if (kind == "zero") {
    r.keys(j, where, {"kind"});
    return Potential::zero();
  }
  if (kind == "tophat") {
    r.keys(j, where, {"kind", "amplitude", "radius", "floor"});
    p = Potential::tophat(r.need<double>(j, "amplitude", where), r.need<double>(j, "radius", where));
  } else if (kind == "gaussian" || kind == "exponential") {
    r.keys(j, where, {"kind", "amplitude", "scale", "cutoff", "floor"});
    const double a = r.need<double>(j, "amplitude", where);
    const double s = r.need<double>(j, "scale", where);
    const double c = r.need<double>(j, "cutoff", where);
    p = kind == "gaussian" ? Potential::gaussian(a, s, c) : Potential::exponential(a, s, c);
  } else if (kind == "tabulated") {
    r.keys(j, where, {"kind", "table", "cutoff", "floor"});
    p = Potential::tabulated(r.need<std::vector<double>>(j, "table", where),
                             r.need<double>(j, "cutoff", where));
  } else {
    throw Error(Errc::parse_error, "unknown potential kind '" + kind + "' at " + where);
  }
  if (j.contains("floor")) {
    const json& f = j.at("floor");
    r.keys(f, where + ".floor", {"radius", "value"});
    p = p.with_floor(r.need<double>(f, "radius", where + ".floor"), r.need<double>(f, "value", where + ".floor"));
  }
  return p;
}

json potential_json(const Potential& p) {
  json j;
  if (p.kind() == PotentialKind::tophat && p.cutoff() == 0.0) return json{{"kind", "zero"}};
  switch (p.kind()) {
    case PotentialKind::tophat:
      j = {{"kind", "tophat"}, {"amplitude", p.amplitude()}, {"radius", p.length()}};
      break;
    case PotentialKind::gaussian:
    case PotentialKind::exponential:
      j = {{"kind", p.kind() == PotentialKind::gaussian ? "gaussian" : "exponential"},
           {"amplitude", p.amplitude()},
           {"scale", p.length()},
           {"cutoff", p.cutoff()}};
      break;
    case PotentialKind::tabulated:
      j = {{"kind", "tabulated"}, {"table", p.table()}, {"cutoff", p.cutoff()}};
      break;
  }
  if (p.explicit_floor_radius()) {
    j["floor"] = {{"radius", *p.explicit_floor_radius()}, {"value", *p.explicit_floor_value()}};
  }
  return j;
}

RateField parse_rate(const Reader& r, const json& j, const std::string& where, const TorusDomain& dom) {
  const auto kind = r.need<std::string>(j, "kind", where);
  if (kind == "constant") {
    r.keys(j, where, {"kind", "value"});
    return RateField::constant(r.need<double>(j, "value", where));
  }
  if (kind == "sinusoid") {
    r.keys(j, where, {"kind", "base", "amplitude", "wavenumber", "period"});
    const auto k = r.get<std::vector<int>>(j, "wavenumber", where, {1, 0});
    if (k.empty() || k.size() > 2) throw Error(Errc::parse_error, where + ".wavenumber must hold 1 or 2 entries");
    return RateField::sinusoid(r.need<double>(j, "base", where), r.need<double>(j, "amplitude", where),
                               {k[0], k.size() > 1 ? k[1] : 0},
                               r.get<double>(j, "period", where, dom.side_length()));
  }
  if (kind == "patches") {
    r.keys(j, where, {"kind", "patches"});
    std::vector<RatePatch> list;
    const json& arr = j.at("patches");
    if (!arr.is_array()) throw Error(Errc::parse_error, where + ".patches must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string w = where + ".patches[" + std::to_string(i) + "]";
      r.keys(arr[i], w, {"lo", "hi", "value"});
      list.push_back({point_of(r.need<std::vector<double>>(arr[i], "lo", w), w + ".lo"),
                      point_of(r.need<std::vector<double>>(arr[i], "hi", w), w + ".hi"),
                      r.need<double>(arr[i], "value", w)});
    }
    return RateField::patches(std::move(list), dom.dimension());
  }
  if (kind == "attraction") {
    r.keys(j, where, {"kind", "centers", "kernel", "base", "cap"});
    std::vector<Point> centers;
    for (const auto& c : r.need<std::vector<std::vector<double>>>(j, "centers", where)) {
      centers.push_back(point_of(c, where + ".centers"));
    }
    if (!j.contains("kernel")) throw Error(Errc::parse_error, "missing key " + where + ".kernel");
    const Potential kernel = parse_potential(r, j.at("kernel"), where + ".kernel");
    return build_attraction_rate(centers, kernel, r.need<double>(j, "base", where),
                                 r.need<double>(j, "cap", where), dom);
  }
  if (kind == "tabulated") {
    r.keys(j, where, {"kind", "values"});
    auto v = r.need<std::vector<double>>(j, "values", where);
    if (v.size() != dom.cell_count()) {
      throw Error(Errc::parse_error, where + ".values must hold one value per grid cell");
    }
    return RateField::tabulated(ScalarField(dom, std::move(v)));
  }
  throw Error(Errc::parse_error, "unknown rate kind '" + kind + "' at " + where);
}

json rate_json(const RateField& rate) {
  switch (rate.kind()) {
    case RateKind::constant:
      return {{"kind", "constant"}, {"value", rate.base()}};
    case RateKind::sinusoid:
      return {{"kind", "sinusoid"},
              {"base", rate.base()},
              {"amplitude", rate.amplitude()},
              {"wavenumber", {rate.wavenumber()[0], rate.wavenumber()[1]}},
              {"period", rate.period()}};
    case RateKind::patches: {
      json arr = json::array();
      for (const auto& p : rate.patch_list()) {
        arr.push_back({{"lo", coords(p.lo, rate.dimension())},
                       {"hi", coords(p.hi, rate.dimension())},
                       {"value", p.value}});
      }
      return {{"kind", "patches"}, {"patches", arr}};
    }
    case RateKind::attraction_centers: {
      json centers = json::array();
      for (const auto& c : rate.centers()) centers.push_back(coords(c, rate.dimension()));
      return {{"kind", "attraction"},
              {"centers", centers},
              {"kernel", potential_json(rate.center_kernel())},
              {"base", rate.base()},
              {"cap", rate.cap()}};
    }
    case RateKind::tabulated:
      return {{"kind", "tabulated"}, {"values", rate.table().values}};
  }
  return {};
}

WindowSpec parse_window(const Reader& r, const json& j, const std::string& where, int dim) {
  r.keys(j, where, {"lo", "hi"});
  const Point lo = point_of(r.need<std::vector<double>>(j, "lo", where), where + ".lo");
  const Point hi = point_of(r.need<std::vector<double>>(j, "hi", where), where + ".hi");
  return WindowSpec(lo, hi, dim);
}

Subcommand parse_subcommand(const std::string& s) {
  if (s == "kinetic") return Subcommand::kinetic;
  if (s == "patches") return Subcommand::patches;
  if (s == "micro") return Subcommand::micro;
  if (s == "meso") return Subcommand::meso;
  if (s == "horizon") return Subcommand::horizon;
  throw Error(Errc::parse_error, "unknown subcommand '" + s + "'");
}

void check_ranges(const RunConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(Errc::range_error, msg); };
  const double b_bar = c.rate.upper_bound();
  if (!(c.solver.dt > 0.0)) fail("solver.dt must be positive");
  if (!(c.solver.t_end >= 0.0) || !std::isfinite(c.solver.t_end)) fail("solver.t_end must be finite and nonnegative");
  if (c.solver.dt * b_bar > kMaxStepRate * (1.0 + 1e-12)) {
    fail("solver.dt * b_bar = " + std::to_string(c.solver.dt * b_bar) + " exceeds 0.05");
  }
  if (!(c.initial_density >= 0.0)) fail("model.initial_density must be nonnegative");
  if (c.solver.segment && !(*c.solver.segment > 0.0)) fail("solver.segment must be positive");
  if (c.solver.allowance < 0.0) fail("solver.allowance must be nonnegative");
  for (double t : c.solver.snapshot_times) {
    if (!(t >= 0.0) || t > c.solver.t_end) fail("solver.snapshot_times must lie in [0, t_end]");
  }
  if (c.potential.cutoff() > 0.5 * c.domain.side_length()) fail("potential cutoff exceeds half the torus side");

  const auto& p = c.patches;
  if (!(p.params.b_A > 0.0) || !(p.params.b_B > 0.0) || !(p.params.alpha >= 0.0)) {
    fail("patches need b_A, b_B > 0 and alpha >= 0");
  }
  if (!(p.dt > 0.0) || p.dt * std::max(p.params.b_A, p.params.b_B) > kMaxStepRate * (1.0 + 1e-12)) {
    fail("patches.dt * max(b_A, b_B) must lie in (0, 0.05]");
  }
  if (!(p.t_end >= 0.0) || !(p.snapshot_every >= 0.0)) fail("patches.t_end and snapshot_every must be nonnegative");

  const auto& m = c.micro;
  if (m.replicas == 0) fail("micro.replicas must be positive");
  for (const auto& w : m.windows) {
    if (w.dimension != c.domain.dimension()) fail("window dimension differs from the domain");
    for (int a = 0; a < w.dimension; ++a) {
      if (w.lo[a] < 0.0 || w.hi[a] > c.domain.side_length()) fail("window must lie inside [0, L)");
    }
  }
  for (double t : m.sample_times) {
    if (!(t >= 0.0) || t > c.solver.t_end) fail("micro.sample_times must lie in [0, t_end]");
  }
  for (std::size_t k = 0; k < m.epsilons.size(); ++k) {
    if (!(m.epsilons[k] > 0.0 && m.epsilons[k] <= 1.0)) fail("micro.epsilons must lie in (0, 1]");
    if (k > 0 && !(m.epsilons[k] < m.epsilons[k - 1])) fail("micro.epsilons must be strictly decreasing");
  }
  if (m.horizon < 0.0) fail("micro.horizon must be nonnegative");
  if (m.samples == 0) fail("micro.samples must be positive");
  if (m.pair_bins > 0 && !(m.pair_range > 0.0 && m.pair_range <= 0.5 * c.domain.side_length())) {
    fail("micro.pair_range must lie in (0, L/2]");
  }
  if (!std::isfinite(c.horizon.theta0) || !(c.horizon.b_bar > 0.0) || !(c.horizon.mass > 0.0)) {
    fail("horizon needs finite theta0 and positive b_bar and mass");
  }
  if (c.output_dir.empty()) fail("output must not be empty");
}

}  // namespace

std::string to_string(Subcommand s) {
  switch (s) {
    case Subcommand::kinetic: return "kinetic";
    case Subcommand::patches: return "patches";
    case Subcommand::micro: return "micro";
    case Subcommand::meso: return "meso";
    case Subcommand::horizon: return "horizon";
  }
  return "unknown";
}

RunConfig parse_config(const std::string& text, bool strict) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::parse_error, e.what());
  }
  const Reader r{strict};
  r.keys(doc, "config", {"subcommand", "output", "model", "solver", "patches", "micro", "horizon"});

  RunConfig c;
  try {
    c.subcommand = parse_subcommand(r.need<std::string>(doc, "subcommand", "config"));
    c.output_dir = r.get<std::string>(doc, "output", "config", c.output_dir);

    if (doc.contains("model")) {
      const json& m = doc.at("model");
      r.keys(m, "model", {"domain", "potential", "rate", "initial_density"});
      if (m.contains("domain")) {
        const json& d = m.at("domain");
        r.keys(d, "model.domain", {"dimension", "length", "cells"});
        c.domain = TorusDomain(r.get<int>(d, "dimension", "model.domain", 1),
                               r.get<double>(d, "length", "model.domain", 10.0),
                               r.get<int>(d, "cells", "model.domain", 100));
      }
      if (m.contains("potential")) c.potential = parse_potential(r, m.at("potential"), "model.potential");
      if (m.contains("rate")) c.rate = parse_rate(r, m.at("rate"), "model.rate", c.domain);
      c.initial_density = r.get<double>(m, "initial_density", "model", 0.0);
    } else if (c.subcommand != Subcommand::patches && c.subcommand != Subcommand::horizon) {
      throw Error(Errc::parse_error, "missing section model");
    }

    if (doc.contains("solver")) {
      const json& s = doc.at("solver");
      const std::string w = "solver";
      r.keys(s, w, {"dt", "t_end", "method", "rhs_variant", "snapshot_times", "segment", "allowance"});
      auto& sv = c.solver;
      sv.dt = r.get<double>(s, "dt", w, sv.dt);
      sv.t_end = r.get<double>(s, "t_end", w, sv.t_end);
      const auto method = r.get<std::string>(s, "method", w, "rk4");
      if (method != "rk4" && method != "picard") throw Error(Errc::parse_error, "solver.method must be rk4 or picard");
      sv.method = method == "rk4" ? KineticMethod::rk4 : KineticMethod::picard;
      const auto variant = r.get<std::string>(s, "rhs_variant", w, "kinetic");
      if (variant != "kinetic" && variant != "closure") {
        throw Error(Errc::parse_error, "solver.rhs_variant must be kinetic or closure");
      }
      sv.variant = variant == "kinetic" ? RhsVariant::kinetic : RhsVariant::closure;
      sv.snapshot_times = r.get<std::vector<double>>(s, "snapshot_times", w, {});
      if (s.contains("segment")) sv.segment = r.as<double>(s.at("segment"), "solver.segment");
      sv.allowance = r.get<double>(s, "allowance", w, 0.0);
    }

    if (doc.contains("patches")) {
      const json& p = doc.at("patches");
      const std::string w = "patches";
      r.keys(p, w, {"b_A", "b_B", "alpha", "t_end", "dt", "snapshot_every"});
      auto& ps = c.patches;
      ps.params.b_A = r.get<double>(p, "b_A", w, ps.params.b_A);
      ps.params.b_B = r.get<double>(p, "b_B", w, ps.params.b_B);
      ps.params.alpha = r.get<double>(p, "alpha", w, ps.params.alpha);
      ps.t_end = r.get<double>(p, "t_end", w, ps.t_end);
      ps.dt = r.get<double>(p, "dt", w, ps.dt);
      ps.snapshot_every = r.get<double>(p, "snapshot_every", w, ps.snapshot_every);
    } else if (c.subcommand == Subcommand::patches) {
      throw Error(Errc::parse_error, "missing section patches");
    }

    if (doc.contains("micro")) {
      const json& m = doc.at("micro");
      const std::string w = "micro";
      r.keys(m, w, {"seed", "replicas", "windows", "sample_times", "epsilons", "horizon", "samples",
                    "pair_bins", "pair_range", "write_events"});
      auto& ms = c.micro;
      ms.seed = r.get<std::uint64_t>(m, "seed", w, ms.seed);
      ms.replicas = r.get<std::size_t>(m, "replicas", w, ms.replicas);
      if (m.contains("windows")) {
        const json& arr = m.at("windows");
        if (!arr.is_array()) throw Error(Errc::parse_error, "micro.windows must be an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
          ms.windows.push_back(parse_window(r, arr[i], "micro.windows[" + std::to_string(i) + "]", c.domain.dimension()));
        }
      }
      ms.sample_times = r.get<std::vector<double>>(m, "sample_times", w, {});
      ms.epsilons = r.get<std::vector<double>>(m, "epsilons", w, ms.epsilons);
      ms.horizon = r.get<double>(m, "horizon", w, ms.horizon);
      ms.samples = r.get<std::size_t>(m, "samples", w, ms.samples);
      ms.pair_bins = r.get<std::size_t>(m, "pair_bins", w, ms.pair_bins);
      ms.pair_range = r.get<double>(m, "pair_range", w, ms.pair_range);
      ms.write_events = r.get<bool>(m, "write_events", w, ms.write_events);
    }

    if (doc.contains("horizon")) {
      const json& h = doc.at("horizon");
      r.keys(h, "horizon", {"theta0", "b_bar", "mass"});
      c.horizon.theta0 = r.get<double>(h, "theta0", "horizon", c.horizon.theta0);
      c.horizon.b_bar = r.get<double>(h, "b_bar", "horizon", c.horizon.b_bar);
      c.horizon.mass = r.get<double>(h, "mass", "horizon", c.horizon.mass);
    }
  } catch (const Error& e) {
    if (e.code() == Errc::parse_error || e.code() == Errc::unknown_key) throw;
    throw Error(Errc::range_error, e.what());
  }
  check_ranges(c);
  return c;
}

std::string serialize_config(const RunConfig& c) {
  json doc;
  doc["subcommand"] = to_string(c.subcommand);
  doc["output"] = c.output_dir;
  doc["model"] = {{"domain",
                   {{"dimension", c.domain.dimension()},
                    {"length", c.domain.side_length()},
                    {"cells", c.domain.cells_per_side()}}},
                  {"potential", potential_json(c.potential)},
                  {"rate", rate_json(c.rate)},
                  {"initial_density", c.initial_density}};
  json solver = {{"dt", c.solver.dt},
                 {"t_end", c.solver.t_end},
                 {"method", c.solver.method == KineticMethod::rk4 ? "rk4" : "picard"},
                 {"rhs_variant", c.solver.variant == RhsVariant::kinetic ? "kinetic" : "closure"},
                 {"snapshot_times", c.solver.snapshot_times},
                 {"allowance", c.solver.allowance}};
  if (c.solver.segment) solver["segment"] = *c.solver.segment;
  doc["solver"] = solver;
  doc["patches"] = {{"b_A", c.patches.params.b_A},
                    {"b_B", c.patches.params.b_B},
                    {"alpha", c.patches.params.alpha},
                    {"t_end", c.patches.t_end},
                    {"dt", c.patches.dt},
                    {"snapshot_every", c.patches.snapshot_every}};
  json windows = json::array();
  for (const auto& w : c.micro.windows) {
    windows.push_back({{"lo", coords(w.lo, w.dimension)}, {"hi", coords(w.hi, w.dimension)}});
  }
  doc["micro"] = {{"seed", c.micro.seed},
                  {"replicas", c.micro.replicas},
                  {"windows", windows},
                  {"sample_times", c.micro.sample_times},
                  {"epsilons", c.micro.epsilons},
                  {"horizon", c.micro.horizon},
                  {"samples", c.micro.samples},
                  {"pair_bins", c.micro.pair_bins},
                  {"pair_range", c.micro.pair_range},
                  {"write_events", c.micro.write_events}};
  doc["horizon"] = {{"theta0", c.horizon.theta0}, {"b_bar", c.horizon.b_bar}, {"mass", c.horizon.mass}};
  return doc.dump(2) + "\n";
}

}  // namespace immsim::cli
