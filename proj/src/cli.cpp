#include "kppfront/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "kppfront/convergence.hpp"
#include "kppfront/dispersion.hpp"
#include "kppfront/eigen.hpp"
#include "kppfront/errors.hpp"
#include "kppfront/front.hpp"
#include "kppfront/svg.hpp"

namespace kpp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kExperiments{"eigencurve", "minspeed",  "dirac-check",
                                         "converge",   "front",     "front-converge"};

const std::map<std::string, std::set<std::string>> kKeys{
    {"geometry", {"L", "N", "a", "M", "dx"}},
    {"physics",
     {"flow", "amplitude", "modes", "reaction", "reaction_a", "lewis", "q", "heat_loss"}},
    {"family", {"type", "shape", "k", "q", "frozen_k"}},
    {"experiment",
     {"name", "problem", "member_k", "window", "window_points", "probes", "speeds", "c",
      "speed_offset", "kbox", "reference_n", "front_reference_n", "min_front_n",
      "nodes_per_layer", "solver"}},
    {"output",
     {"dir", "plots", "solver_tolerance", "residual_gate", "max_iterations"}},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
    return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (v.empty() || used != v.size() || !std::isfinite(out))
    throw InvalidArgument("config key '" + key + "': expected a number, got '" + raw + "'");
  return out;
}

int to_int(const std::string& key, const std::string& raw) {
  const double d = to_double(key, raw);
  if (d != std::floor(d) || std::abs(d) > 1e9)
    throw InvalidArgument("config key '" + key + "': expected an integer, got '" + raw + "'");
  return static_cast<int>(d);
}

bool to_bool(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true" || v == "1" || v == "yes" || v == "on")
    return true;
  if (v == "false" || v == "0" || v == "no" || v == "off")
    return false;
  throw InvalidArgument("config key '" + key + "': expected a boolean, got '" + raw + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& raw) {
  std::string v = trim(raw);
  if (!v.empty() && v.front() == '[' && v.back() == ']')
    v = v.substr(1, v.size() - 2);
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!trim(item).empty())
      out.push_back(to_double(key, item));
  return out;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok)
    throw InvalidArgument("config key '" + key + "' out of range: " + what);
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
std::string list(const std::vector<T>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i)
    out += (i ? "," : "") + num(static_cast<double>(v[i]));
  return out + "]";
}

} // namespace

std::string Config::canonical() const {
  std::ostringstream os;
  os << "geometry.L = " << num(length) << '\n'
     << "geometry.N = " << n << '\n'
     << "geometry.a = " << num(half_length) << '\n'
     << "geometry.M = " << axial_intervals << '\n'
     << "geometry.dx = " << num(axial_spacing) << '\n'
     << "physics.flow = " << (flow.kind == FlowSpec::Kind::Zero ? "zero" : "cosine") << '\n'
     << "physics.amplitude = " << num(flow.amplitude) << '\n'
     << "physics.modes = " << flow.modes << '\n'
     << "physics.reaction = " << (reaction.kind == ReactionSpec::Kind::Linear ? "linear" : "log_kpp")
     << '\n'
     << "physics.reaction_a = " << num(reaction.a) << '\n'
     << "physics.lewis = " << num(lewis) << '\n'
     << "physics.q = " << num(q) << '\n'
     << "physics.heat_loss = " << num(heat_loss) << '\n'
     << "family.type = "
     << (family.kind == FamilySpec::Kind::Quadratic   ? "quadratic"
         : family.kind == FamilySpec::Kind::Mollifier ? "mollifier"
                                                      : "frozen")
     << '\n'
     << "family.shape = " << family.shape << '\n'
     << "family.k = " << list(ks) << '\n'
     << "family.q = " << num(family.q) << '\n'
     << "family.frozen_k = " << family.frozen_k << '\n'
     << "experiment.name = " << experiment << '\n'
     << "experiment.problem = " << problem << '\n'
     << "experiment.member_k = " << member_k << '\n'
     << "experiment.window = [" << num(window_lo) << "," << num(window_hi) << "]\n"
     << "experiment.window_points = " << window_points << '\n'
     << "experiment.probes = " << list(probes) << '\n'
     << "experiment.speeds = " << list(speeds) << '\n'
     << "experiment.c = " << (std::isnan(speed) ? std::string("auto") : num(speed)) << '\n'
     << "experiment.speed_offset = " << num(speed_offset) << '\n'
     << "experiment.kbox = " << num(box_half_width) << '\n'
     << "experiment.reference_n = " << reference_n << '\n'
     << "experiment.front_reference_n = " << front_reference_n << '\n'
     << "experiment.min_front_n = " << min_front_n << '\n'
     << "experiment.nodes_per_layer = " << nodes_per_layer << '\n'
     << "experiment.solver = " << solver << '\n'
     << "output.solver_tolerance = " << num(solver_tolerance) << '\n'
     << "output.residual_gate = " << num(residual_gate) << '\n'
     << "output.max_iterations = " << max_iterations << '\n';
  return os.str();
}

Config parse_config(const std::string& text, const std::string& origin) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InvalidArgument(origin + ":" + std::to_string(e.line()) + ": parse error: " +
                          e.message());
  }
  for (const auto& [section, body] : tree) {
    const auto it = kKeys.find(section);
    if (it == kKeys.end()) {
      if (body.empty())
        throw InvalidArgument("config key '" + section + "' is outside any section");
      throw InvalidArgument("unknown config section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      if (!value.empty())
        throw InvalidArgument("config section [" + section + "." + key + "] is not allowed");
      if (!it->second.count(key))
        throw InvalidArgument("unknown config key '" + key + "' in section [" + section + "]");
    }
  }
  auto get = [&](const std::string& section, const std::string& key) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(section + "/" + key, '/')))
      return trim(*v);
    return std::nullopt;
  };

  Config c;
  const std::string G = "geometry", P = "physics", F = "family", E = "experiment", O = "output";
  if (auto v = get(G, "L"))
    c.length = to_double("L", *v);
  if (auto v = get(G, "N"))
    c.n = to_int("N", *v);
  if (auto v = get(G, "a"))
    c.half_length = to_double("a", *v);
  if (auto v = get(G, "M"))
    c.axial_intervals = to_int("M", *v);
  if (auto v = get(G, "dx"))
    c.axial_spacing = to_double("dx", *v);
  require(c.length > 0.0, "L", "must be positive");
  require(c.n == 0 || c.n >= CrossSectionGrid::kMinResolution, "N", "must be at least 8");
  require(c.half_length > 0.0, "a", "must be positive");
  require(c.axial_intervals == 0 || c.axial_intervals >= 8, "M", "must be at least 8");
  require(c.axial_spacing > 0.0, "dx", "must be positive");

  if (auto v = get(P, "flow")) {
    if (*v == "zero")
      c.flow.kind = FlowSpec::Kind::Zero;
    else if (*v == "cosine")
      c.flow.kind = FlowSpec::Kind::Cosine;
    else
      throw InvalidArgument("config key 'flow': expected zero or cosine, got '" + *v + "'");
  }
  if (auto v = get(P, "amplitude"))
    c.flow.amplitude = to_double("amplitude", *v);
  if (auto v = get(P, "modes"))
    c.flow.modes = to_int("modes", *v);
  require(c.flow.modes >= 1, "modes", "must be at least 1");
  if (auto v = get(P, "reaction")) {
    if (*v == "linear")
      c.reaction.kind = ReactionSpec::Kind::Linear;
    else if (*v == "log_kpp")
      c.reaction.kind = ReactionSpec::Kind::LogKpp;
    else
      throw InvalidArgument("config key 'reaction': expected linear or log_kpp, got '" + *v + "'");
  }
  if (auto v = get(P, "reaction_a"))
    c.reaction.a = to_double("reaction_a", *v);
  require(c.reaction.a > 0.0, "reaction_a", "must be positive");
  if (auto v = get(P, "lewis"))
    c.lewis = to_double("lewis", *v);
  require(c.lewis > 0.0, "lewis", "must be positive");
  if (auto v = get(P, "q"))
    c.q = to_double("q", *v);
  require(c.q >= 0.0, "q", "must be nonnegative");
  if (auto v = get(P, "heat_loss"))
    c.heat_loss = to_double("heat_loss", *v);
  require(c.heat_loss >= 0.0, "heat_loss", "must be nonnegative");

  c.family.q = c.q;
  if (auto v = get(F, "type")) {
    if (*v == "quadratic")
      c.family.kind = FamilySpec::Kind::Quadratic;
    else if (*v == "mollifier")
      c.family.kind = FamilySpec::Kind::Mollifier;
    else if (*v == "frozen")
      c.family.kind = FamilySpec::Kind::Frozen;
    else
      throw InvalidArgument("config key 'type': expected quadratic, mollifier or frozen, got '" +
                            *v + "'");
  }
  if (auto v = get(F, "shape")) {
    mollifier_shape(*v);
    c.family.shape = *v;
  }
  if (auto v = get(F, "k")) {
    c.ks.clear();
    for (double k : to_list("k", *v)) {
      require(k == std::floor(k) && k >= 1, "k", "entries must be positive integers");
      c.ks.push_back(static_cast<int>(k));
    }
    require(!c.ks.empty(), "k", "must not be empty");
    for (std::size_t i = 1; i < c.ks.size(); ++i)
      require(c.ks[i] > c.ks[i - 1], "k", "must be strictly increasing");
  }
  if (auto v = get(F, "q")) {
    c.family.q = to_double("q", *v);
    require(c.family.q >= 0.0, "q", "must be nonnegative");
    if (get(P, "q"))
      require(c.family.q == c.q, "q", "[family] q and [physics] q disagree");
    c.q = c.family.q;
  }
  if (auto v = get(F, "frozen_k"))
    c.family.frozen_k = to_int("frozen_k", *v);
  require(c.family.frozen_k >= 1, "frozen_k", "must be positive");

  if (auto v = get(E, "name"))
    c.experiment = *v;
  require(kExperiments.count(c.experiment) > 0, "name", "unknown experiment '" + c.experiment + "'");
  if (auto v = get(E, "problem"))
    c.problem = *v;
  require(c.problem == "interior" || c.problem == "robin" || c.problem == "member", "problem",
          "expected interior, robin or member");
  if (auto v = get(E, "member_k"))
    c.member_k = to_int("member_k", *v);
  require(c.member_k >= 1, "member_k", "must be positive");
  if (auto v = get(E, "window")) {
    const auto w = to_list("window", *v);
    require(w.size() == 2 && w[0] < w[1], "window", "expected [lo, hi] with lo < hi");
    c.window_lo = w[0];
    c.window_hi = w[1];
  }
  if (auto v = get(E, "window_points"))
    c.window_points = to_int("window_points", *v);
  require(c.window_points >= 3, "window_points", "must be at least 3");
  if (auto v = get(E, "probes"))
    c.probes = to_list("probes", *v);
  if (auto v = get(E, "speeds"))
    c.speeds = to_list("speeds", *v);
  if (auto v = get(E, "c")) {
    if (*v != "auto") {
      c.speed = to_double("c", *v);
      require(c.speed > 0.0, "c", "traveling fronts require c > 0");
    }
  }
  if (auto v = get(E, "speed_offset"))
    c.speed_offset = to_double("speed_offset", *v);
  require(c.speed_offset > 0.0, "speed_offset", "must be positive");
  if (auto v = get(E, "kbox"))
    c.box_half_width = to_double("kbox", *v);
  require(c.box_half_width > 0.0, "kbox", "must be positive");
  if (auto v = get(E, "reference_n"))
    c.reference_n = to_int("reference_n", *v);
  require(c.reference_n >= 64, "reference_n", "must be at least 64");
  if (auto v = get(E, "front_reference_n"))
    c.front_reference_n = to_int("front_reference_n", *v);
  require(c.front_reference_n >= 8, "front_reference_n", "must be at least 8");
  if (auto v = get(E, "min_front_n"))
    c.min_front_n = to_int("min_front_n", *v);
  require(c.min_front_n >= 8, "min_front_n", "must be at least 8");
  if (auto v = get(E, "nodes_per_layer"))
    c.nodes_per_layer = to_int("nodes_per_layer", *v);
  require(c.nodes_per_layer >= 1, "nodes_per_layer", "must be positive");
  if (auto v = get(E, "solver"))
    c.solver = *v;
  require(c.solver == "newton" || c.solver == "alternating", "solver",
          "expected newton or alternating");

  if (auto v = get(O, "dir"))
    c.out_dir = *v;
  if (auto v = get(O, "plots"))
    c.plots = to_bool("plots", *v);
  if (auto v = get(O, "solver_tolerance"))
    c.solver_tolerance = to_double("solver_tolerance", *v);
  require(c.solver_tolerance > 0.0, "solver_tolerance", "must be positive");
  if (auto v = get(O, "residual_gate"))
    c.residual_gate = to_double("residual_gate", *v);
  require(c.residual_gate > 0.0, "residual_gate", "must be positive");
  if (auto v = get(O, "max_iterations"))
    c.max_iterations = to_int("max_iterations", *v);
  require(c.max_iterations >= 1, "max_iterations", "must be positive");
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InvalidArgument("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string config_hash(const Config& config) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(config.canonical());
  return os.str();
}

// ------------------------------------------------------------------ pipelines

namespace {

struct Artifacts {
  std::string csv;
  json summary;
  json derived = json::object();
  std::vector<std::pair<std::string, std::string>> plots; // suffix, svg
};

FrontSolverOptions solver_options(const Config& c) {
  FrontSolverOptions o;
  o.method = c.solver == "alternating" ? FrontSolverOptions::Method::Alternating
                                       : FrontSolverOptions::Method::PseudoTransientNewton;
  o.tolerance = c.solver_tolerance;
  o.residual_gate = c.residual_gate;
  o.max_iterations = c.max_iterations;
  return o;
}

int eigen_mesh(const Config& c, json& derived) {
  if (c.n > 0) {
    derived["N_rule"] = "configured";
    return c.n;
  }
  if (c.problem == "member") {
    derived["N_rule"] = "max(256, 32 k L)";
    return default_mesh_rule(c.member_k, c.length);
  }
  derived["N_rule"] = "default 256";
  return 256;
}

EigenProblemSpec eigen_template(const Config& c, const CrossSectionGrid& grid) {
  const FlowProfile flow = c.flow.on(grid);
  const auto fp = c.reaction.model().fprime0_samples(grid);
  if (c.problem == "robin")
    return EigenProblemSpec::robin(flow, c.q, fp);
  std::vector<double> g(grid.size(), c.heat_loss);
  if (c.problem == "member")
    g = c.family.member(c.member_k, grid).heat_loss.coefficient();
  return EigenProblemSpec::interior_loss(flow, g, fp);
}

Artifacts run_eigencurve(const Config& c) {
  Artifacts out;
  const int n = eigen_mesh(c, out.derived);
  out.derived["N"] = n;
  const CrossSectionGrid grid(c.length, n);
  const auto lambdas = linspace(c.window_lo, c.window_hi, c.window_points);
  const EigenCurve curve = eigencurve(eigen_template(c, grid), lambdas);
  if (!curve.concave)
    throw NumericalFailure("eigencurve concavity gate failed: max second difference " +
                           num(curve.max_second_difference));
  out.csv = curve_csv(curve);
  out.summary = {{"problem", c.problem},
                 {"N", n},
                 {"lambda", curve.lambdas},
                 {"value", curve.values},
                 {"slope", curve.slopes},
                 {"concave", curve.concave},
                 {"max_second_difference", curve.max_second_difference}};
  if (c.plots)
    out.plots.emplace_back(
        "", svg::plot({"principal eigenvalue", "lambda", "mu(lambda)"},
                      {{c.problem, curve.lambdas, curve.values, false}}));
  return out;
}

Artifacts run_minspeed(const Config& c) {
  Artifacts out;
  const int n = eigen_mesh(c, out.derived);
  out.derived["N"] = n;
  const CrossSectionGrid grid(c.length, n);
  const DispersionResult disp = minimal_speed(eigen_template(c, grid));
  std::vector<double> speeds = c.speeds;
  if (speeds.empty())
    for (double d : {0.25, 0.5, 1.0, 2.0})
      speeds.push_back(disp.c_star + d);
  const auto rows = dispersion_table(disp, speeds);
  out.csv = dispersion_csv(rows);
  out.summary = json::parse(dispersion_json(disp));
  out.summary["problem"] = c.problem;
  out.summary["N"] = n;
  if (c.plots) {
    const auto ls = linspace(0.25 * disp.lambda_star, 4.0 * disp.lambda_star, 61);
    std::vector<double> s;
    for (double l : ls)
      s.push_back(disp.s(l));
    out.plots.emplace_back(
        "", svg::plot({"speed function", "lambda", "s(lambda)"},
                      {{"s", ls, s, false}, {"c*", {disp.lambda_star}, {disp.c_star}, true}}));
  }
  return out;
}

Artifacts run_dirac_check(const Config& c) {
  Artifacts out;
  std::vector<DiracFamilyMember> members;
  std::vector<int> ns;
  for (int k : c.ks) {
    const int n = c.n > 0 ? c.n : default_mesh_rule(k, c.length);
    ns.push_back(n);
    members.push_back(c.family.member(k, CrossSectionGrid(c.length, n)));
  }
  out.derived["N"] = ns;
  out.derived["N_rule"] = c.n > 0 ? "configured" : "max(256, 32 k L)";
  const FamilyReport report = check_family_hypotheses(members);
  std::ostringstream os;
  os.precision(17);
  os << "# k,n,layer_width,sup_outside_layer,scaled_sup,flux_low,flux_high,integral,gap_const,"
        "gap_linear\n";
  std::vector<double> ks, gap1, gap2;
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto& m = members[i];
    const auto& h = report.members[i];
    const auto& grid = m.heat_loss.grid();
    const std::vector<double> one(grid.size(), 1.0);
    const auto lin = grid.sample([](double y) { return std::sqrt(3.0) * y; });
    const double g1 = lemma1_gap(m, one, m.q), g2 = lemma1_gap(m, lin, m.q);
    ks.push_back(m.k);
    gap1.push_back(g1);
    gap2.push_back(g2);
    os << m.k << ',' << ns[i] << ',' << h.layer_width << ',' << h.sup_outside_layer << ','
       << h.scaled_sup << ',' << h.flux_low << ',' << h.flux_high << ',' << h.integral << ','
       << g1 << ',' << g2 << '\n';
  }
  out.csv = os.str();
  out.summary = {{"family", c.family.describe()},
                 {"support_ok", report.support_ok},
                 {"scaled_bounded", report.scaled_bounded},
                 {"flux_converges", report.flux_converges},
                 {"max_scaled_sup", report.max_scaled_sup},
                 {"final_flux_error", report.final_flux_error},
                 {"gap_const", gap1},
                 {"gap_linear", gap2}};
  if (!report.ok())
    throw HypothesisViolation("heat-loss family violates the layer hypotheses");
  if (c.plots)
    out.plots.emplace_back("", svg::plot({"boundary-layer gap", "k", "gap", true, true},
                                         {{"phi = 1", ks, gap1}, {"phi = sqrt(3) y", ks, gap2}}));
  return out;
}

Artifacts run_converge(const Config& c) {
  Artifacts out;
  SweepSetup setup;
  setup.length = c.length;
  setup.flow = c.flow;
  const double a = c.reaction.a;
  setup.fprime0 = [a](double) { return a; };
  setup.ks = c.ks;
  setup.window_lo = c.window_lo;
  setup.window_hi = c.window_hi;
  setup.window_points = c.window_points;
  setup.probes = c.probes;
  setup.reference_n = c.reference_n;
  setup.test_speed_offset = c.speed_offset;
  if (c.n > 0) {
    const int n = c.n;
    setup.mesh_rule = [n](int, double) { return n; };
  }
  ConvergenceReport report = theorem2_sweep(c.family, setup);
  std::vector<int> ns;
  for (const auto& r : report.rows)
    ns.push_back(r.n);
  out.derived["N"] = ns;
  out.derived["N_rule"] = c.n > 0 ? "configured" : "max(256, 32 k L)";
  std::string speed_note = "computed";
  try {
    attach_speeds(report, speed_convergence(c.family, setup));
  } catch (const HypothesisViolation& e) {
    speed_note = std::string("undefined: ") + e.what();
  }
  out.csv = convergence_csv(report);
  out.summary = json::parse(convergence_json(report));
  out.summary["speeds"] = speed_note;
  const auto sup = report.sup_errors();
  bool l2_ok = true;
  for (std::size_t p = 0; p < report.probes.size(); ++p)
    l2_ok = l2_ok && strictly_decreasing(report.l2_distances(p));
  const bool gates = strictly_decreasing(sup) && l2_ok && report.energy_bounded() &&
                     report.rayleigh_chain_ok();
  out.summary["gates_passed"] = gates;
  if (!gates)
    throw NumericalFailure("convergence gates failed (monotone errors, energy bound, Rayleigh chain)");
  if (c.plots) {
    std::vector<double> ks(c.ks.begin(), c.ks.end());
    std::vector<svg::Series> series{{"sup eigencurve error", ks, sup}};
    for (std::size_t p = 0; p < report.probes.size(); ++p)
      series.push_back({"L2 distance at lambda=" + num(report.probes[p]), ks, report.l2_distances(p)});
    if (report.has_speeds)
      series.push_back({"|c*_k - c*_q|", ks, report.speed_errors()});
    out.plots.emplace_back("", svg::plot({"convergence in k", "k", "error", true, true}, series));
  }
  return out;
}

Artifacts run_front(const Config& c) {
  Artifacts out;
  int n = c.n;
  if (n == 0)
    n = c.problem == "member"
            ? std::max(c.min_front_n,
                       static_cast<int>(std::ceil(c.nodes_per_layer * c.member_k * c.length - 1e-9)))
            : c.min_front_n;
  const int M = c.axial_intervals > 0
                    ? c.axial_intervals
                    : static_cast<int>(std::lround(2.0 * c.half_length / c.axial_spacing));
  const CrossSectionGrid cross(c.length, n);
  const CylinderGrid grid(c.half_length, M, cross);
  const EigenProblemSpec templ = eigen_template(c, cross);
  const DispersionResult disp = minimal_speed(templ);
  const double speed = std::isnan(c.speed) ? disp.c_star + c.speed_offset : c.speed;
  const ReactionModel reaction = c.reaction.model();
  const FrontProblem problem =
      c.problem == "robin"
          ? FrontProblem::robin_limit(speed, c.lewis, grid, c.flow, reaction, c.q)
          : FrontProblem::interior_loss(speed, c.lewis, grid, c.flow, reaction,
                                        c.problem == "member"
                                            ? c.family.member(c.member_k, cross).heat_loss.coefficient()
                                            : std::vector<double>(cross.size(), c.heat_loss),
                                        c.problem == "member" ? c.member_k : 0);
  const FrontProblem members[] = {problem};
  const SubSuperSolutions sss = build_subsupersolutions(members, problem);
  const CertificateReport cert = verify_ordered_pair(sss, 0, problem);
  out.derived = {{"N", n},      {"M", M},          {"c", speed},     {"c_star", disp.c_star},
                 {"beta", sss.beta}, {"gamma", sss.gamma}, {"eta", sss.eta}, {"delta", sss.delta},
                 {"x0", sss.x0}, {"lambda", sss.members[0].lambda}};
  if (!cert.ok())
    throw NumericalFailure("sub/super-solution certificate failed");
  const FrontProfile profile = solve_front(problem, sss, 0, solver_options(c));
  const FrontDiagnostics diag = front_diagnostics(profile, problem, sss, 0);
  out.csv = front_csv(profile);
  out.summary = json::parse(front_json(profile, diag, sss, cert));
  out.summary["problem"] = problem.label();
  if (c.plots) {
    out.plots.emplace_back("-T", svg::heatmap("temperature T", grid, profile.T));
    out.plots.emplace_back("-Y", svg::heatmap("reactant Y", grid, profile.Y));
    std::vector<double> xs, top, model;
    for (int i = 0; i <= M; ++i) {
      double t = 0.0;
      for (int j = 0; j <= n; ++j)
        t = std::max(t, profile.T_at(i, j));
      xs.push_back(grid.x(i));
      top.push_back(t);
      model.push_back(sss.K2 * std::exp(-diag.lambda * grid.x(i)));
    }
    out.plots.emplace_back("-tail", svg::plot({"right tail", "x", "max_y T", false, true},
                                              {{"front", xs, top, false},
                                               {"K2 exp(-lambda x)", xs, model, false}}));
  }
  return out;
}

Artifacts run_front_converge(const Config& c) {
  if (c.n > 0)
    throw InvalidArgument("config key 'N' is not used by front-converge (meshes follow "
                          "min_front_n and nodes_per_layer)");
  Artifacts out;
  CorollarySetup s;
  s.family = c.family;
  s.length = c.length;
  s.flow = c.flow;
  s.reaction = c.reaction.model();
  s.lewis = c.lewis;
  s.speed_offset = c.speed_offset;
  s.ks = c.ks;
  s.half_length = c.half_length;
  s.axial_spacing = c.axial_intervals > 0 ? 2.0 * c.half_length / c.axial_intervals : c.axial_spacing;
  s.reference_n = c.front_reference_n;
  s.eigen_reference_n = c.reference_n;
  s.min_front_n = c.min_front_n;
  s.nodes_per_layer = c.nodes_per_layer;
  s.box_half_width = c.box_half_width;
  s.solver = solver_options(c);
  const FrontConvergenceReport report = corollary_experiment(s);
  std::vector<int> ns;
  for (int k : c.ks)
    ns.push_back(s.front_mesh(k));
  const auto& b = report.barriers;
  out.derived = {{"N", ns},
                 {"N_rule", "max(min_front_n, nodes_per_layer k L)"},
                 {"M", static_cast<int>(std::lround(2.0 * s.half_length / s.axial_spacing))},
                 {"c", report.c},
                 {"beta", b.beta},
                 {"gamma", b.gamma},
                 {"eta", b.eta},
                 {"delta", b.delta},
                 {"x0", b.x0}};
  out.csv = corollary_csv(report);
  out.summary = json::parse(corollary_json(report));
  bool certs = report.limit_certificate_ok;
  for (const auto& r : report.rows)
    certs = certs && (r.skipped || r.certificate_ok);
  if (!certs)
    throw NumericalFailure("front certificate failed in the corollary experiment");
  if (!report.nontrivial())
    throw NumericalFailure("limit front is trivial on the box");
  if (c.plots) {
    std::vector<double> ks;
    for (const auto& r : report.rows)
      if (!r.skipped)
        ks.push_back(r.k);
    out.plots.emplace_back("", svg::plot({"front convergence on the box", "k", "L2 distance", true, true},
                                         {{"T", ks, report.T_errors()}, {"Y", ks, report.Y_errors()}}));
  }
  return out;
}

Artifacts dispatch(const Config& c) {
  if (c.experiment == "eigencurve")
    return run_eigencurve(c);
  if (c.experiment == "minspeed")
    return run_minspeed(c);
  if (c.experiment == "dirac-check")
    return run_dirac_check(c);
  if (c.experiment == "converge")
    return run_converge(c);
  if (c.experiment == "front")
    return run_front(c);
  return run_front_converge(c);
}

class OutputWriter {
public:
  explicit OutputWriter(fs::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, const std::string& content) { files_.emplace_back(name, content); }

  std::vector<std::string> commit() {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_))
      throw std::runtime_error("cannot create output directory '" + dir_.string() + "'");
    std::vector<fs::path> written;
    try {
      for (const auto& [name, content] : files_) {
        const fs::path target = dir_ / name;
        const fs::path tmp = dir_ / (name + ".partial");
        {
          std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
          if (!out)
            throw std::runtime_error("cannot write '" + tmp.string() + "'");
          written.push_back(tmp);
          out << content;
          out.flush();
          if (!out)
            throw std::runtime_error("write failed for '" + tmp.string() + "'");
        }
        fs::rename(tmp, target);
        written.back() = target;
      }
    } catch (...) {
      for (const auto& p : written)
        fs::remove(p, ec);
      throw;
    }
    std::vector<std::string> names;
    for (const auto& f : files_)
      names.push_back(f.first);
    return names;
  }

private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

json tolerances(const Config& c) {
  return {{"solver_tolerance", c.solver_tolerance},
          {"residual_gate", c.residual_gate},
          {"max_iterations", c.max_iterations},
          {"certificate_base_tolerance", CertificateReport{}.base_tolerance},
          {"dispersion_lambda_tolerance", DispersionOptions{}.tolerance},
          {"lambda_root_tolerance", 1e-10}};
}

} // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Traveling fronts with heat loss in shear flows: eigencurves, minimal speeds, "
               "boundary-layer families and front solves."};
  app.footer("Exit codes: 0 success, 1 usage/config/I-O error, 2 hypothesis violation "
             "(e.g. mu(0) >= 0), 3 numerical failure (non-convergence, failed certificate or gate).");
  std::string config_path, out_dir;
  bool plots = false, quiet = false;
  app.add_option("--config", config_path, "INI config file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (overrides [output] dir)");
  app.add_flag("--plots", plots, "also write SVG plots");
  app.add_flag("--quiet", quiet, "suppress progress messages");
  app.require_subcommand(1, 1);
  app.fallthrough();
  for (const auto& name : kExperiments)
    app.add_subcommand(name, "run the " + name + " experiment");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  const std::string experiment = app.get_subcommands().front()->get_name();

  Config config;
  try {
    config = config_path.empty() ? parse_config("", "<defaults>") : load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "kppfront: " << e.what() << '\n';
    return 1;
  }
  config.experiment = experiment;
  if (!out_dir.empty())
    config.out_dir = out_dir;
  config.plots = config.plots || plots;
  const std::string stem = experiment + "-" + config_hash(config);

  const auto start = std::chrono::steady_clock::now();
  Artifacts art;
  try {
    if (!quiet)
      std::cerr << "kppfront: running " << experiment << '\n';
    art = dispatch(config);
  } catch (const HypothesisViolation& e) {
    std::cerr << "kppfront: hypothesis violation: " << e.what() << '\n';
    return 2;
  } catch (const NumericalFailure& e) {
    std::cerr << "kppfront: numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const InvalidArgument& e) {
    std::cerr << "kppfront: invalid input: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "kppfront: numerical failure: " << e.what() << '\n';
    return 3;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json meta;
  meta["experiment"] = experiment;
  meta["config_hash"] = config_hash(config);
  json echo = json::object();
  {
    std::istringstream lines(config.canonical());
    for (std::string line; std::getline(lines, line);)
      if (const auto eq = line.find(" = "); eq != std::string::npos)
        echo[line.substr(0, eq)] = line.substr(eq + 3);
  }
  meta["config"] = echo;
  meta["tolerances"] = tolerances(config);
  meta["mesh_rules"] = {{"eigen", "max(256, 32 k L) unless N is configured"},
                        {"front", "N = max(min_front_n, nodes_per_layer k L), M = round(2a/dx)"}};
  meta["derived"] = art.derived;

  OutputWriter writer(config.out_dir);
  writer.add(stem + ".csv", art.csv);
  writer.add(stem + ".json", art.summary.dump(2) + "\n");
  writer.add(stem + ".meta.json", meta.dump(2) + "\n");
  if (config.plots)
    for (const auto& [suffix, svg] : art.plots)
      writer.add(stem + suffix + ".svg", svg);
  writer.add(stem + ".timing.json",
             json{{"experiment", experiment}, {"wall_seconds", seconds}}.dump(2) + "\n");
  try {
    const auto names = writer.commit();
    if (!quiet)
      for (const auto& n : names)
        std::cerr << "kppfront: wrote " << (fs::path(config.out_dir) / n).string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "kppfront: I/O error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

} // namespace kpp
