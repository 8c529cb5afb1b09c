#include "kppfront/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "kppfront/errors.hpp"

namespace kpp {

int default_mesh_rule(int k, double length) {
  return std::max(256, layer_resolution(k, length));
}

std::vector<double> ConvergenceReport::sup_errors() const {
  std::vector<double> out;
  for (const auto& r : rows)
    out.push_back(r.sup_error);
  return out;
}

std::vector<double> ConvergenceReport::l2_distances(std::size_t probe) const {
  std::vector<double> out;
  for (const auto& r : rows)
    out.push_back(r.l2_distance.at(probe));
  return out;
}

std::vector<double> ConvergenceReport::speed_errors() const {
  std::vector<double> out;
  for (const auto& r : rows)
    if (r.has_speed)
      out.push_back(r.speed_error);
  return out;
}

double ConvergenceReport::max_dirichlet_energy() const {
  double e = 0.0;
  for (const auto& r : rows)
    for (double d : r.dirichlet_energy)
      e = std::max(e, d);
  return e;
}

bool ConvergenceReport::energy_bounded() const {
  if (rows.empty())
    return true;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const double bound = 2.0 * rows.front().dirichlet_energy.at(p) + 1.0;
    for (const auto& r : rows)
      if (r.dirichlet_energy.at(p) > bound)
        return false;
  }
  return true;
}

bool ConvergenceReport::rayleigh_chain_ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.rayleigh_chain_ok; });
}

bool strictly_decreasing(std::span<const double> values) {
  for (std::size_t i = 1; i < values.size(); ++i)
    if (!(values[i] < values[i - 1]))
      return false;
  return true;
}

bool plateaued(std::span<const double> values, double relative) {
  if (values.empty())
    return false;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi > 0.0 && (*hi - *lo) <= relative * *hi;
}

double fitted_order(std::span<const int> ks, std::span<const double> errors) {
  if (ks.size() != errors.size() || ks.size() < 2)
    throw InvalidArgument("fitted_order: need at least two matching points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (!(errors[i] > 0.0))
      throw InvalidArgument("fitted_order: errors must be positive");
    const double x = std::log(static_cast<double>(ks[i]));
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double l2_distance(const CrossSectionGrid& ga, std::span<const double> a,
                   const CrossSectionGrid& gb, std::span<const double> b) {
  if (std::abs(ga.length() - gb.length()) > 1e-12 * ga.length())
    throw InvalidArgument("l2_distance: grids have different lengths");
  const bool a_fine = ga.intervals() >= gb.intervals();
  const CrossSectionGrid& fine = a_fine ? ga : gb;
  const CrossSectionGrid& coarse = a_fine ? gb : ga;
  std::span<const double> f = a_fine ? a : b;
  std::span<const double> c = a_fine ? b : a;
  std::vector<double> ci(fine.size());
  for (int j = 0; j < fine.size(); ++j)
    ci[j] = coarse.interpolate(c, fine.node(j));
  std::vector<double> prod(fine.size());
  for (int j = 0; j < fine.size(); ++j)
    prod[j] = f[j] * ci[j];
  const double sign = integrate(fine, prod) < 0.0 ? -1.0 : 1.0;
  std::vector<double> diff(fine.size());
  for (int j = 0; j < fine.size(); ++j)
    diff[j] = f[j] - sign * ci[j];
  return l2_norm(fine, diff);
}

double lemma1_gap(const DiracFamilyMember& member, std::span<const double> phi, double q) {
  const auto& grid = member.heat_loss.grid();
  const int needed = static_cast<int>(std::ceil(32.0 * grid.length() / member.layer_width - 1e-9));
  if (grid.intervals() < needed)
    throw ResolutionError("lemma1_gap: member k=" + std::to_string(member.k) + " needs N >= " +
                              std::to_string(needed),
                          needed);
  if (static_cast<int>(phi.size()) != grid.size())
    throw InvalidArgument("lemma1_gap: phi size does not match the member grid");
  const auto& g = member.heat_loss.coefficient();
  std::vector<double> gphi2(phi.size()), phi2(phi.size());
  for (std::size_t j = 0; j < phi.size(); ++j) {
    phi2[j] = phi[j] * phi[j];
    gphi2[j] = g[j] * phi2[j];
  }
  return std::abs(integrate(grid, gphi2) - q * boundary_sum(grid, phi2));
}

namespace {

struct MemberContext {
  CrossSectionGrid grid;
  FlowProfile flow;
  DiracFamilyMember member;
  EigenProblemSpec spec;
};

MemberContext member_context(const FamilySpec& family, const SweepSetup& setup, int k) {
  CrossSectionGrid grid(setup.length, setup.mesh_rule(k, setup.length));
  FlowProfile flow = setup.flow.on(grid);
  DiracFamilyMember member = family.member(k, grid);
  const auto fp = grid.sample(setup.fprime0);
  EigenProblemSpec spec =
      EigenProblemSpec::interior_loss(flow, member.heat_loss.coefficient(), fp);
  return {grid, flow, std::move(member), std::move(spec)};
}

EigenProblemSpec robin_reference(const FamilySpec& family, const SweepSetup& setup) {
  CrossSectionGrid grid(setup.length, setup.reference_n);
  const auto fp = grid.sample(setup.fprime0);
  return EigenProblemSpec::robin(setup.flow.on(grid), family.q, fp);
}

std::vector<double> resample(const CrossSectionGrid& from, std::span<const double> values,
                             const CrossSectionGrid& to) {
  std::vector<double> out(to.size());
  for (int j = 0; j < to.size(); ++j)
    out[j] = from.interpolate(values, to.node(j));
  return out;
}

void check_sorted(const std::vector<int>& ks) {
  if (ks.empty())
    throw InvalidArgument("sweep: empty k-list");
  for (std::size_t i = 1; i < ks.size(); ++i)
    if (ks[i] <= ks[i - 1])
      throw InvalidArgument("sweep: k-list must be strictly increasing");
}

} // namespace

ConvergenceReport theorem2_sweep(const FamilySpec& family, const SweepSetup& setup) {
  check_sorted(setup.ks);
  if (!(setup.window_hi > setup.window_lo) || setup.window_points < 2)
    throw InvalidArgument("theorem2_sweep: invalid lambda window");
  ConvergenceReport report;
  report.family = family.describe();
  report.q = family.q;
  report.reference_n = setup.reference_n;
  report.window = linspace(setup.window_lo, setup.window_hi, setup.window_points);
  report.probes = setup.probes;

  std::vector<MemberContext> contexts;
  for (int k : setup.ks)
    contexts.push_back(member_context(family, setup, k));
  std::vector<DiracFamilyMember> members;
  for (const auto& c : contexts)
    members.push_back(c.member);
  const FamilyReport hyp = check_family_hypotheses(members);
  report.family_ok = hyp.ok();
  if (setup.require_hypotheses && !report.family_ok)
    throw HypothesisViolation("theorem2_sweep: family " + family.describe() +
                              " does not satisfy the concentration hypotheses");

  const EigenProblemSpec robin = robin_reference(family, setup);
  for (double lambda : report.window)
    report.reference_curve.push_back(principal_eigenpair(robin.at(lambda)).value);
  std::vector<EigenPair> psi;
  for (double lambda : report.probes)
    psi.push_back(principal_eigenpair(robin.at(lambda)));

  for (const auto& ctx : contexts) {
    ConvergenceRow row;
    row.k = ctx.member.k;
    row.layer_width = ctx.member.layer_width;
    row.n = ctx.grid.intervals();
    for (std::size_t i = 0; i < report.window.size(); ++i) {
      const double mu = principal_eigenpair(ctx.spec.at(report.window[i])).value;
      row.sup_error = std::max(row.sup_error, std::abs(mu - report.reference_curve[i]));
    }
    for (std::size_t p = 0; p < report.probes.size(); ++p) {
      const EigenProblemSpec at = ctx.spec.at(report.probes[p]);
      const EigenPair phi = principal_eigenpair(at);
      row.l2_distance.push_back(
          l2_distance(robin.grid(), psi[p].eigenfunction, ctx.grid, phi.eigenfunction));
      row.dirichlet_energy.push_back(dirichlet_energy(ctx.grid, phi.eigenfunction));
      const auto trial = resample(robin.grid(), psi[p].eigenfunction, ctx.grid);
      const double bound = rayleigh(at, trial);
      if (phi.value > bound + 1e-10 * (1.0 + std::abs(bound)))
        row.rayleigh_chain_ok = false;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

ConvergenceReport speed_convergence(const FamilySpec& family, const SweepSetup& setup) {
  check_sorted(setup.ks);
  ConvergenceReport report;
  report.family = family.describe();
  report.q = family.q;
  report.reference_n = setup.reference_n;
  report.probes = setup.probes;
  report.has_speeds = true;

  const EigenProblemSpec robin = robin_reference(family, setup);
  report.nu0 = principal_eigenpair(robin.at(0.0)).value;
  if (!(report.nu0 < 0.0)) {
    std::ostringstream msg;
    msg.precision(10);
    msg << "speed convergence requires nu_q(0) < 0, got nu_q(0) = " << report.nu0;
    throw HypothesisViolation(msg.str());
  }
  const DispersionResult limit = minimal_speed(robin);
  report.c_star_q = limit.c_star;
  report.lambda_star_q = limit.lambda_star;
  report.c_test = limit.c_star + setup.test_speed_offset;
  report.lambda_inf = lambda_root(report.c_test, limit).lambda;

  for (int k : setup.ks) {
    const MemberContext ctx = member_context(family, setup, k);
    ConvergenceRow row;
    row.k = k;
    row.layer_width = ctx.member.layer_width;
    row.n = ctx.grid.intervals();
    row.has_speed = true;
    const DispersionResult disp = minimal_speed(ctx.spec);
    row.mu0 = disp.mu0;
    row.c_star = disp.c_star;
    row.speed_error = std::abs(disp.c_star - limit.c_star);
    if (report.c_test > disp.c_star) {
      row.has_test_root = true;
      row.lambda_test = lambda_root(report.c_test, disp).lambda;
      // lambda^2 - c lambda = mu(lambda) <= mu(0) + mu'(0) lambda by concavity.
      const double slope0 = curve_slope(principal_eigenpair(ctx.spec.at(0.0)), ctx.flow);
      const double b = report.c_test + slope0;
      const double disc = b * b + 4.0 * disp.mu0;
      row.lambda_bound = 0.5 * (b + std::sqrt(std::max(0.0, disc)));
      row.bracket_ok = row.lambda_test <= row.lambda_bound * (1.0 + 1e-9) + 1e-12;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

void attach_speeds(ConvergenceReport& report, const ConvergenceReport& speeds) {
  report.has_speeds = true;
  report.nu0 = speeds.nu0;
  report.c_star_q = speeds.c_star_q;
  report.lambda_star_q = speeds.lambda_star_q;
  report.c_test = speeds.c_test;
  report.lambda_inf = speeds.lambda_inf;
  for (auto& row : report.rows) {
    auto it = std::find_if(speeds.rows.begin(), speeds.rows.end(),
                           [&](const auto& s) { return s.k == row.k; });
    if (it == speeds.rows.end())
      continue;
    row.has_speed = it->has_speed;
    row.mu0 = it->mu0;
    row.c_star = it->c_star;
    row.speed_error = it->speed_error;
    row.has_test_root = it->has_test_root;
    row.lambda_test = it->lambda_test;
    row.lambda_bound = it->lambda_bound;
    row.bracket_ok = it->bracket_ok;
  }
}

std::string convergence_csv(const ConvergenceReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "# k,eps,n,sup_error";
  for (std::size_t p = 0; p < report.probes.size(); ++p)
    os << ",l2_distance@" << report.probes[p] << ",dirichlet_energy@" << report.probes[p];
  if (report.has_speeds)
    os << ",c_star,speed_error,lambda_test";
  os << '\n';
  for (const auto& r : report.rows) {
    os << r.k << ',' << r.layer_width << ',' << r.n << ',' << r.sup_error;
    for (std::size_t p = 0; p < r.l2_distance.size(); ++p)
      os << ',' << r.l2_distance[p] << ',' << r.dirichlet_energy[p];
    if (report.has_speeds)
      os << ',' << r.c_star << ',' << r.speed_error << ',' << r.lambda_test;
    os << '\n';
  }
  return os.str();
}

std::string convergence_json(const ConvergenceReport& report) {
  nlohmann::json j;
  j["family"] = report.family;
  j["q"] = report.q;
  j["reference_n"] = report.reference_n;
  j["family_hypotheses_ok"] = report.family_ok;
  std::vector<int> ks;
  for (const auto& r : report.rows)
    ks.push_back(r.k);
  j["k"] = ks;
  std::vector<int> ns;
  for (const auto& r : report.rows)
    ns.push_back(r.n);
  j["n"] = ns;
  if (!report.window.empty() && !report.rows.empty()) {
    const auto sup = report.sup_errors();
    j["window"] = {report.window.front(), report.window.back()};
    j["sup_error"] = sup;
    j["sup_error_decreasing"] = strictly_decreasing(sup);
    if (ks.size() >= 2 && std::all_of(sup.begin(), sup.end(), [](double e) { return e > 0; }))
      j["sup_error_order"] = fitted_order(ks, sup);
    nlohmann::json probes = nlohmann::json::array();
    for (std::size_t p = 0; p < report.probes.size(); ++p) {
      const auto d = report.l2_distances(p);
      probes.push_back({{"lambda", report.probes[p]},
                        {"l2_distance", d},
                        {"decreasing", strictly_decreasing(d)}});
    }
    j["probes"] = probes;
    j["max_dirichlet_energy"] = report.max_dirichlet_energy();
    j["dirichlet_energy_bounded"] = report.energy_bounded();
    j["rayleigh_chain_ok"] = report.rayleigh_chain_ok();
  }
  if (report.has_speeds) {
    j["nu_q0"] = report.nu0;
    j["c_star_q"] = report.c_star_q;
    j["lambda_star_q"] = report.lambda_star_q;
    j["c_test"] = report.c_test;
    j["lambda_inf"] = report.lambda_inf;
    const auto se = report.speed_errors();
    j["speed_error"] = se;
    j["speed_error_decreasing"] = strictly_decreasing(se);
    std::vector<double> lt;
    bool bracket = true;
    for (const auto& r : report.rows) {
      lt.push_back(r.lambda_test);
      bracket = bracket && r.bracket_ok;
    }
    j["lambda_test"] = lt;
    j["lambda_bracket_ok"] = bracket;
  }
  return j.dump(2);
}

} // namespace kpp
