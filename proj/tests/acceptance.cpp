// Acceptance checks. Prints one PASS/FAIL line per criterion; optional
// arguments select criteria by number.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kppfront/cli.hpp"
#include "kppfront/convergence.hpp"
#include "kppfront/dispersion.hpp"
#include "kppfront/eigen.hpp"
#include "kppfront/errors.hpp"
#include "kppfront/front.hpp"
#include "oracles.hpp"

using namespace kpp;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!ok)
      detail << " [fail: " << what << "]";
  }
  template <class T> Verdict& note(const std::string& key, const T& value) {
    detail << ' ' << key << '=' << value;
    return *this;
  }
};

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(4);
  for (std::size_t i = 0; i < v.size(); ++i)
    os << (i ? "," : "") << v[i];
  return os.str();
}

EigenProblemSpec constant_potential(double v, const FlowProfile& flow) {
  return EigenProblemSpec::general(flow, std::vector<double>(flow.grid().size(), v), BoundaryCondition::neumann());
}

double robin_speed(const FlowSpec& flow, double fprime, double q, int n) {
  const CrossSectionGrid g(1.0, n);
  return minimal_speed(EigenProblemSpec::robin(flow.on(g), q, std::vector<double>(g.size(), fprime))).c_star;
}

// ------------------------------------------------------------------ criteria

void criterion1(Verdict& v) {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int n : {16, 64, 512})
    for (double v0 : {-1.3, 0.0, 0.37, 2.5}) {
      const CrossSectionGrid g(1.0, n);
      worst = std::max(worst, std::abs(principal_eigenpair(constant_potential(v0, FlowProfile::zero(g))).value - v0));
    }
  v.require(worst <= 1e-10, "Neumann constant potential");
  const double nu = oracle::robin_root(1.0, 1.0);
  auto err = [&](int n) {
    const CrossSectionGrid g(1.0, n);
    return std::abs(principal_eigenpair(EigenProblemSpec::general(FlowProfile::zero(g), std::vector<double>(g.size(), 0.0),
                                                                  BoundaryCondition::robin(1.0)))
                        .value -
                    nu);
  };
  const double e64 = err(64), e512 = err(512);
  v.require(e64 <= 2e-3, "Robin N=64");
  v.require(e512 <= 1e-4, "Robin N=512");
  const double t = elapsed(start);
  v.require(t < 1.0, "runtime");
  v.note("neumann_err", worst).note("root", nu).note("err64", e64).note("err512", e512).note("seconds", t);
}

void criterion2(Verdict& v) {
  const CrossSectionGrid g(1.0, 256);
  const FlowProfile shear = FlowProfile::cosine(g, 1.0, 1);
  const std::vector<double> one(g.size(), 1.0);
  const auto member = make_quadratic_family(8, 1.0, g);
  const std::vector<std::pair<std::string, EigenProblemSpec>> curves{
      {"mu_h", EigenProblemSpec::interior_loss(shear, member.heat_loss.coefficient(), one)},
      {"nu_q", EigenProblemSpec::robin(shear, 1.0, one)},
      {"rho", EigenProblemSpec::plain(shear)},
      {"mu_h_flat", EigenProblemSpec::interior_loss(FlowProfile::zero(g), member.heat_loss.coefficient(), one)}};
  const auto lambdas = linspace(-1.0, 1.0, 41);
  double rayleigh_err = 0.0, slope_err = 0.0, max_t = 0.0;
  bool concave = true;
  for (const auto& [name, spec] : curves) {
    const auto start = std::chrono::steady_clock::now();
    const EigenCurve curve = eigencurve(spec, lambdas, true);
    concave = concave && curve.concave;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      const auto& pair = curve.pairs[i];
      rayleigh_err = std::max(rayleigh_err, std::abs(rayleigh(spec.at(lambdas[i]), pair.eigenfunction) - pair.value));
      const double h = 1e-4;
      const double fd = (principal_eigenpair(spec.at(lambdas[i] + h)).value -
                         principal_eigenpair(spec.at(lambdas[i] - h)).value) / (2 * h);
      slope_err = std::max(slope_err, std::abs(curve.slopes[i] - fd));
    }
    max_t = std::max(max_t, elapsed(start));
  }
  v.require(rayleigh_err <= 1e-7, "Rayleigh");
  v.require(slope_err <= 1e-5, "slope");
  v.require(concave, "concavity");
  v.require(max_t < 10.0, "runtime");
  v.note("rayleigh_err", rayleigh_err).note("slope_err", slope_err).note("concave", concave).note("max_curve_seconds",
                                                                                                   max_t);
}

void criterion3(Verdict& v) {
  const auto start = std::chrono::steady_clock::now();
  const CrossSectionGrid g(1.0, 256);
  double worst = 0.0;
  for (double r : {0.5, 0.75, 1.0})
    worst = std::max(worst, std::abs(minimal_speed(constant_potential(-r, FlowProfile::zero(g))).c_star - 2 * std::sqrt(r)));
  v.require(worst <= 1e-6, "2 sqrt(r)");
  const double shear = minimal_speed(constant_potential(-1.0, FlowProfile::cosine(g, 1.0, 1))).c_star;
  v.require(shear >= 2.0 - 1e-8, "shear c*");
  const double root = lambda_root(2.5, minimal_speed(constant_potential(-1.0, FlowProfile::zero(g)))).lambda;
  v.require(std::abs(root - 0.5) <= 1e-8, "lambda_root");
  const double t = elapsed(start);
  v.require(t < 30.0, "runtime");
  v.note("kpp_err", worst).note("shear_c_star", shear).note("root_err", std::abs(root - 0.5)).note("seconds", t);
}

void criterion4(Verdict& v) {
  const auto start = std::chrono::steady_clock::now();
  SweepSetup s;
  const auto r = theorem2_sweep(FamilySpec{}, s);
  const auto sup = r.sup_errors();
  v.require(strictly_decreasing(sup), "sup errors decreasing");
  v.require(sup.back() <= 1e-2, "sup error at k=32 <= 1e-2");
  v.require(strictly_decreasing(r.l2_distances(0)), "L2 distances decreasing");
  v.require(r.energy_bounded(), "Dirichlet energies bounded");
  std::string literal;
  try {
    speed_convergence(FamilySpec{}, s);
    literal = "defined";
  } catch (const HypothesisViolation&) {
    literal = "undefined(nu_q(0)>=0)";
  }
  SweepSetup s3 = s;
  s3.fprime0 = [](double) { return 3.0; };
  const auto sp = speed_convergence(FamilySpec{}, s3);
  const auto dc = sp.speed_errors();
  v.require(strictly_decreasing(dc), "speed errors decreasing");
  v.require(dc.back() <= 1e-2, "|c*_32 - c*_q| <= 1e-2");
  const double t = elapsed(start);
  v.require(t < 300.0, "runtime");
  v.note("sup_err", join(sup))
      .note("order", fitted_order(s.ks, sup))
      .note("l2", join(r.l2_distances(0)))
      .note("max_energy", r.max_dirichlet_energy())
      .note("speed_fprime1", literal)
      .note("speed_err_fprime3", join(dc))
      .note("seconds", t);
}

void criterion5(Verdict& v) {
  const auto start = std::chrono::steady_clock::now();
  const CrossSectionGrid g(1.0, 8192);
  const std::vector<double> one(g.size(), 1.0);
  const auto lin = g.sample([](double y) { return std::sqrt(3.0) * y; });
  const auto mid = g.sample([](double y) { return std::abs(y - 0.5) < 0.25 ? 1.0 + std::cos(4 * M_PI * y) : 0.0; });
  const std::vector<int> ks{8, 16, 32, 64};
  double gap_one = 0.0, gap_mid = 0.0;
  std::vector<double> gaps;
  for (int k : ks) {
    const auto m = make_quadratic_family(k, 1.0, g);
    gap_one = std::max(gap_one, lemma1_gap(m, one, 1.0));
    gap_mid = std::max(gap_mid, lemma1_gap(m, mid, 1.0));
    gaps.push_back(lemma1_gap(m, lin, 1.0));
  }
  const double order = fitted_order(ks, gaps);
  v.require(gap_one <= 1e-3, "gap(1)");
  v.require(strictly_decreasing(gaps) && order >= 0.8, "gap(sqrt3 y) order");
  v.require(gap_mid <= 1e-6, "disjoint support");
  const double t = elapsed(start);
  v.require(t < 30.0, "runtime");
  v.note("gap_one", gap_one).note("gap_linear", join(gaps)).note("order", order).note("gap_disjoint", gap_mid).note(
      "seconds", t);
}

void criterion6(Verdict& v) {
  const auto start = std::chrono::steady_clock::now();
  {
    const CrossSectionGrid cross(1.0, 64);
    const auto p = FrontProblem::interior_loss(2.0 * std::sqrt(0.5) + 0.5, 1.0, CylinderGrid(44.0, 440, cross), FlowSpec{},
                                               ReactionModel::linear(1.0), std::vector<double>(cross.size(), 0.5));
    const auto sss = build_subsupersolutions(std::span<const FrontProblem>(&p, 1), p);
    const auto cert = verify_ordered_pair(sss, 0, p);
    v.require(cert.ok(), "constant baseline certificate");
    v.note("baseline_cert", cert.ok());
  }
  CorollarySetup setup;
  const double c = robin_speed(setup.flow, 3.0, 1.0, setup.eigen_reference_n) + setup.speed_offset;
  const int m = static_cast<int>(std::lround(2 * setup.half_length / setup.axial_spacing));
  std::vector<FrontProblem> members;
  for (int k : {8, 16}) {
    const CrossSectionGrid cross(1.0, setup.front_mesh(k));
    members.push_back(FrontProblem::interior_loss(c, 1.0, CylinderGrid(setup.half_length, m, cross), setup.flow,
                                                  setup.reaction, setup.family.member(k, cross).heat_loss.coefficient(),
                                                  k));
  }
  const auto limit = FrontProblem::robin_limit(c, 1.0, CylinderGrid(setup.half_length, m, CrossSectionGrid(1.0, setup.reference_n)),
                                               setup.flow, setup.reaction, 1.0);
  members.push_back(limit);
  const auto sss = build_subsupersolutions(members, limit);
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto cert = verify_ordered_pair(sss, i, members[i]);
    v.require(cert.ok(), members[i].label() + " certificate");
    v.note(members[i].label(), cert.ok() ? "ok" : "failed");
  }
  const auto k = sss.sandwich();
  v.require(std::isfinite(k.C1) && k.C1 > 0 && k.C2 > 0 && k.C3 > 0 && k.Lambda2 > k.Lambda1, "sandwich constants");
  const double t = elapsed(start);
  v.require(t < 60.0, "runtime");
  v.note("C1", k.C1).note("C2", k.C2).note("C3", k.C3).note("Lambda1", k.Lambda1).note("Lambda2", k.Lambda2).note(
      "seconds", t);
}

void criterion7(Verdict& v) {
  const auto start = std::chrono::steady_clock::now();
  const FlowSpec flow;
  const auto rx = ReactionModel::linear(3.0);
  const double c = robin_speed(flow, 3.0, 1.0, 2048) + 0.5;
  auto problem = [&](int m, int n) {
    return FrontProblem::robin_limit(c, 1.0, CylinderGrid(26.0, m, CrossSectionGrid(1.0, n)), flow, rx, 1.0);
  };
  const auto p = problem(480, 64);
  const auto sss = build_subsupersolutions(std::span<const FrontProblem>(&p, 1), p);
  const auto f = solve_front(p, sss, 0);
  const auto d = front_diagnostics(f, p, sss, 0);
  v.require(f.residual_T <= 1e-6 && f.residual_Y <= 1e-6, "residual");
  v.require(d.min_T > 0.0 && d.min_Y > 0.0, "positivity");
  v.require(d.tail_rate_error <= 0.05, "tail rate");
  v.require(d.energy_defect <= 0.01, "energy identity");
  v.require(d.grad_Y_energy <= 1.05 * d.grad_Y_bound, "grad Y bound");
  const auto p2 = problem(960, 128);
  const auto sss2 = build_subsupersolutions(std::span<const FrontProblem>(&p2, 1), p2);
  const auto f2 = solve_front(p2, sss2, 0);
  const double change = profile_sup_distance(f, f2);
  v.require(change <= 1e-3, "mesh doubling");
  const double t = elapsed(start);
  v.require(t < 300.0, "runtime");
  v.note("c", c)
      .note("residual", std::max(f.residual_T, f.residual_Y))
      .note("min_T", d.min_T)
      .note("tail_rate", d.tail_rate)
      .note("lambda", d.lambda)
      .note("energy_defect", d.energy_defect)
      .note("gradY", d.grad_Y_energy)
      .note("gradY_bound", d.grad_Y_bound)
      .note("doubling_change", change)
      .note("seconds", t);
}

void criterion8(Verdict& v) {
  const auto start = std::chrono::steady_clock::now();
  CorollarySetup setup;
  const auto r = corollary_experiment(setup);
  const auto te = r.T_errors(), ye = r.Y_errors();
  bool all = te.size() == setup.ks.size();
  for (const auto& row : r.rows)
    all = all && !row.skipped;
  v.require(all, "all members solved");
  v.require(strictly_decreasing(te), "T errors decreasing");
  v.require(strictly_decreasing(ye), "Y errors decreasing");
  v.require(r.nontrivial(), "nontrivial limit");
  CorollarySetup frozen = setup;
  frozen.family.kind = FamilySpec::Kind::Frozen;
  const auto rf = corollary_experiment(frozen);
  const auto fte = rf.T_errors(), fye = rf.Y_errors();
  v.require(plateaued(fte) && plateaued(fye), "frozen plateau");
  const double t = elapsed(start);
  v.require(t < 1200.0, "runtime");
  v.note("T_err", join(te))
      .note("Y_err", join(ye))
      .note("limit_maxT", r.limit_max_T_box)
      .note("sub_max", r.limit_sub_max_box)
      .note("frozen_T_err", join(fte))
      .note("frozen_Y_err", join(fye))
      .note("seconds", t);
}

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "kppfront");
  std::vector<const char*> argv;
  for (const auto& a : args)
    argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void criterion9(Verdict& v) {
  const fs::path root = fs::temp_directory_path() / "kppfront-acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path good = root / "good.cfg", bad = root / "bad.cfg";
  std::ofstream(good) << "[physics]\nflow = cosine\namplitude = 1\nreaction_a = 3\nq = 1\n"
                         "[experiment]\nproblem = robin\n";
  std::ofstream(bad) << "[physics]\nreaction_a = 1\nq = 1\n[experiment]\nproblem = robin\n";
  int identical = 0, compared = 0;
  for (const std::string exp : {"eigencurve", "minspeed"}) {
    const fs::path a = root / (exp + "-a"), b = root / (exp + "-b");
    v.require(invoke({"--quiet", "--plots", "--config", good.string(), "--out", a.string(), exp}) == 0, exp + " run");
    v.require(invoke({"--quiet", "--plots", "--config", good.string(), "--out", b.string(), exp}) == 0, exp + " rerun");
    for (const auto& e : fs::directory_iterator(a)) {
      const auto name = e.path().filename();
      if (name.string().find(".timing.") != std::string::npos)
        continue;
      ++compared;
      identical += fs::exists(b / name) && slurp(a / name) == slurp(b / name);
    }
  }
  v.require(compared > 0 && identical == compared, "byte-identical outputs");
  int gated = 0;
  for (const std::string exp : {"minspeed", "front"}) {
    const fs::path out = root / (exp + "-bad");
    const int code = invoke({"--quiet", "--config", bad.string(), "--out", out.string(), exp});
    gated += code == 2 && !fs::exists(out);
  }
  v.require(gated == 2, "exit 2 without files");
  v.note("identical_files", std::to_string(identical) + "/" + std::to_string(compared)).note("gated", gated);
}

} // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<void(Verdict&)>> criteria{criterion1, criterion2, criterion3,
                                                            criterion4, criterion5, criterion6,
                                                            criterion7, criterion8, criterion9};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i)
    selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id))
      continue;
    Verdict v;
    try {
      criteria[i](v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " [exception: " << e.what() << "]";
    }
    failures += !v.pass;
    std::printf("criterion %d: %s%s\n", id, v.pass ? "PASS" : "FAIL", v.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
