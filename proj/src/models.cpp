#include "kppfront/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kppfront/errors.hpp"

namespace kpp {

namespace {

double max_abs_of(std::span<const double> v) {
  double m = 0.0;
  for (double x : v)
    m = std::max(m, std::abs(x));
  return m;
}

// Composite Simpson rule on [lo, hi] with an even number of panels.
template <class Fn>
double simpson(Fn&& fn, double lo, double hi, int panels = 2000) {
  const double h = (hi - lo) / panels;
  double sum = fn(lo) + fn(hi);
  for (int i = 1; i < panels; ++i)
    sum += (i % 2 ? 4.0 : 2.0) * fn(lo + i * h);
  return sum * h / 3.0;
}

} // namespace

// ---------------------------------------------------------------- flow

FlowProfile::FlowProfile(const CrossSectionGrid& grid, std::vector<double> raw, double amplitude)
    : grid_(grid), samples_(std::move(raw)), amplitude_(amplitude) {
  if (static_cast<int>(samples_.size()) != grid_.size())
    throw InvalidArgument("flow profile: sample count does not match grid");
  const double mean = integrate(grid_, samples_) / grid_.length();
  const double scale = max_abs_of(samples_);
  // Leave an already zero-average profile untouched.
  if (std::abs(mean) > 1e-15 * (1.0 + scale))
    for (double& u : samples_)
      u -= mean;
  max_abs_ = max_abs_of(samples_);
}

FlowProfile FlowProfile::zero(const CrossSectionGrid& grid) {
  return FlowProfile(grid, std::vector<double>(grid.size(), 0.0), 0.0);
}

FlowProfile FlowProfile::cosine(const CrossSectionGrid& grid, double amplitude, int modes) {
  const double w = 2.0 * std::numbers::pi * modes / grid.length();
  return FlowProfile(grid, grid.sample([&](double y) { return amplitude * std::cos(w * y); }),
                     amplitude);
}

FlowProfile FlowSpec::on(const CrossSectionGrid& grid) const {
  switch (kind) {
  case Kind::Zero:
    return FlowProfile::zero(grid);
  case Kind::Cosine:
    return FlowProfile::cosine(grid, amplitude, modes);
  }
  throw InvalidArgument("unknown flow kind");
}

std::string FlowSpec::describe() const {
  std::ostringstream os;
  if (kind == Kind::Zero)
    os << "zero";
  else
    os << "cosine(A=" << amplitude << ", modes=" << modes << ")";
  return os.str();
}

// ---------------------------------------------------------------- reaction

std::vector<double> ReactionModel::fprime0_samples(const CrossSectionGrid& grid) const {
  return grid.sample(fprime0);
}

double ReactionModel::max_fprime0(const CrossSectionGrid& grid) const {
  const auto s = fprime0_samples(grid);
  return *std::max_element(s.begin(), s.end());
}

ReactionModel ReactionModel::linear(ScalarField a, std::string label) {
  ReactionModel m;
  m.name = std::move(label);
  m.f = [a](double y, double t) { return a(y) * t; };
  m.dfdT = [a](double y, double) { return a(y); };
  m.fprime0 = a;
  m.alpha = 1.0;
  m.kpp_defect = 0.0;
  return m;
}

ReactionModel ReactionModel::linear(double a) {
  return linear([a](double) { return a; }, "linear");
}

ReactionModel ReactionModel::log_kpp(ScalarField a, double max_a, std::string label) {
  ReactionModel m;
  m.name = std::move(label);
  m.f = [a](double y, double t) { return a(y) * std::log1p(t); };
  m.dfdT = [a](double y, double t) { return a(y) / (1.0 + t); };
  m.fprime0 = a;
  m.s0 = 1.0;
  m.alpha = 1.0;
  m.kpp_defect = 0.5 * max_a; // ln(1+s) >= s - s^2/2
  return m;
}

ReactionModel ReactionModel::log_kpp(double a) {
  return log_kpp([a](double) { return a; }, a, "log_kpp");
}

ReactionModel ReactionModel::zero() {
  ReactionModel m;
  m.name = "zero";
  m.f = [](double, double) { return 0.0; };
  m.dfdT = [](double, double) { return 0.0; };
  m.fprime0 = [](double) { return 0.0; };
  return m;
}

ReactionModel ReactionSpec::model() const {
  switch (kind) {
  case Kind::Linear:
    return ReactionModel::linear(a);
  case Kind::LogKpp:
    return ReactionModel::log_kpp(a);
  }
  throw InvalidArgument("unknown reaction kind");
}

std::string ReactionSpec::describe() const {
  std::ostringstream os;
  os << (kind == Kind::Linear ? "linear" : "log_kpp") << "(a=" << a << ")";
  return os.str();
}

// ---------------------------------------------------------------- reports

bool ValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const ValidationCheck& ValidationReport::check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name)
      return c;
  throw InvalidArgument("validation report has no check named '" + name + "'");
}

namespace {
struct CheckAccumulator {
  ValidationCheck check;
  explicit CheckAccumulator(std::string name) { check.name = std::move(name); }
  void violate(double amount) {
    check.passed = false;
    check.worst_violation = std::max(check.worst_violation, amount);
  }
};
} // namespace

ValidationReport validate_reaction(const ReactionModel& model, const CrossSectionGrid& grid,
                                   std::span<const double> temperatures) {
  std::vector<double> ts(temperatures.begin(), temperatures.end());
  std::sort(ts.begin(), ts.end());
  if (ts.empty() || ts.front() <= 0.0)
    throw InvalidArgument("validate_reaction: temperature samples must be positive");

  CheckAccumulator zero("f(y,0)=0"), positive("f>0"), kpp("kpp_bound"), monotone("monotone"),
      unbounded("unbounded"), lower("lower_bound_M");

  const double s_max = std::isfinite(model.s0) ? model.s0 : ts.back();
  constexpr int kDense = 1000;

  for (double y : grid.nodes()) {
    const double fp = model.fprime0(y);
    const double f0 = model.f(y, 0.0);
    if (std::abs(f0) > 1e-14)
      zero.violate(std::abs(f0));
    double prev = f0;
    for (double t : ts) {
      const double v = model.f(y, t);
      if (!(v > 0.0))
        positive.violate(-v);
      const double excess = v - fp * t;
      if (excess > 1e-12 * (1.0 + std::abs(fp * t)))
        kpp.violate(excess);
      if (v < prev - 1e-14 * (1.0 + std::abs(prev)))
        monotone.violate(prev - v);
      prev = v;
    }
    // f(., +inf) = +inf: growth must continue over the probe decades.
    const double f1 = model.f(y, 1.0), f6 = model.f(y, 1e6), f12 = model.f(y, 1e12);
    const double shortfall = 0.5 * (f6 - f1) - (f12 - f6);
    if (!(shortfall < 0.0))
      unbounded.violate(shortfall);
    for (int i = 0; i <= kDense; ++i) {
      const double s = s_max * i / kDense;
      const double floor = fp * s - model.kpp_defect * std::pow(s, 1.0 + model.alpha);
      const double gap = floor - model.f(y, s);
      if (gap > 1e-12 * (1.0 + std::abs(floor)))
        lower.violate(gap);
    }
  }
  ValidationReport report;
  for (auto* c : {&zero, &positive, &kpp, &monotone, &unbounded, &lower})
    report.checks.push_back(c->check);
  return report;
}

// ---------------------------------------------------------------- heat loss

HeatLossModel::HeatLossModel(const CrossSectionGrid& grid, std::vector<double> coefficient)
    : grid_(grid), g_(std::move(coefficient)) {
  if (static_cast<int>(g_.size()) != grid_.size())
    throw InvalidArgument("heat loss: sample count does not match grid");
  bound_ = g_.empty() ? 0.0 : *std::max_element(g_.begin(), g_.end());
}

ValidationReport validate_heatloss(const HeatLossModel& model) {
  CheckAccumulator nonneg("g>=0"), integral("integral>0"), linear("h<=KT");
  for (double g : model.coefficient()) {
    if (g < 0.0)
      nonneg.violate(-g);
    if (g > model.bound())
      linear.violate(g - model.bound());
  }
  const double total = integrate(model.grid(), model.coefficient());
  if (!(total > 0.0))
    integral.violate(-total);
  ValidationReport report;
  report.checks = {nonneg.check, integral.check, linear.check};
  return report;
}

// ---------------------------------------------------------------- families

namespace {

void require_separated_layers(int k, const CrossSectionGrid& grid) {
  if (k < 2)
    throw InvalidArgument("family index k must be at least 2, got " + std::to_string(k));
  if (!(1.0 / k < 0.5 * grid.length()))
    throw InvalidArgument("boundary layers of width 1/" + std::to_string(k) +
                          " overlap on a cross-section of length " +
                          std::to_string(grid.length()));
}

DiracFamilyMember build_member(int k, double q, ScalarField profile, const CrossSectionGrid& grid) {
  HeatLossModel heat(grid, grid.sample(profile));
  return DiracFamilyMember{k, 1.0 / k, q, std::move(profile), std::move(heat)};
}

} // namespace

DiracFamilyMember make_quadratic_family(int k, double q, const CrossSectionGrid& grid) {
  require_separated_layers(k, grid);
  if (!(q > 0.0))
    throw InvalidArgument("Robin coefficient q must be positive");
  const double length = grid.length();
  const double kd = k;
  auto profile = [=](double y) {
    const double d = std::min(y, length - y) - 1.0 / kd;
    const double m = std::min(0.0, d);
    return q * 3.0 * kd * kd * kd * m * m;
  };
  return build_member(k, q, profile, grid);
}

DiracFamilyMember make_mollifier_family(const ScalarField& shape, int k, double q,
                                        const CrossSectionGrid& grid) {
  require_separated_layers(k, grid);
  if (!(q > 0.0))
    throw InvalidArgument("Robin coefficient q must be positive");
  constexpr int kProbe = 2000;
  for (int i = 0; i <= kProbe; ++i)
    if (shape(static_cast<double>(i) / kProbe) < -1e-14)
      throw InvalidArgument("mollifier shape takes negative values");
  const double mass = simpson(shape, 0.0, 1.0);
  if (std::abs(mass - 1.0) > 1e-6)
    throw InvalidArgument("mollifier shape must integrate to 1 on [0,1], got " +
                          std::to_string(mass));
  if (std::abs(shape(1.0)) > 1e-12)
    throw InvalidArgument("mollifier shape must vanish at s=1 (continuity at the layer edge)");
  const double eps = 1.0 / k;
  const double length = grid.length();
  auto profile = [=](double y) {
    const double d = std::min(y, length - y);
    return d <= eps ? (q / eps) * shape(d / eps) : 0.0;
  };
  return build_member(k, q, profile, grid);
}

ScalarField mollifier_shape(const std::string& name) {
  if (name == "quadratic")
    return [](double s) { return 3.0 * (1.0 - s) * (1.0 - s); };
  if (name == "hat")
    return [](double s) { return 2.0 * (1.0 - s); };
  if (name == "cubic")
    return [](double s) { return 4.0 * (1.0 - s) * (1.0 - s) * (1.0 - s); };
  throw InvalidArgument("unknown mollifier shape '" + name + "'");
}

int layer_resolution(int k, double length) {
  return static_cast<int>(std::ceil(32.0 * k * length - 1e-9));
}

FamilyReport check_family_hypotheses(std::span<const DiracFamilyMember> members) {
  FamilyReport report;
  if (members.empty())
    throw InvalidArgument("check_family_hypotheses: empty family");
  for (std::size_t i = 1; i < members.size(); ++i)
    if (members[i].k <= members[i - 1].k)
      throw InvalidArgument("family members must be sorted by increasing k");

  for (const auto& m : members) {
    const auto& grid = m.heat_loss.grid();
    const int needed =
        static_cast<int>(std::ceil(32.0 * grid.length() / m.layer_width - 1e-9));
    if (grid.intervals() < needed)
      throw ResolutionError("member k=" + std::to_string(m.k) + " needs N >= " +
                                std::to_string(needed) + " to resolve its layer, got N=" +
                                std::to_string(grid.intervals()),
                            needed);
    MemberHypotheses row;
    row.k = m.k;
    row.layer_width = m.layer_width;
    const auto& g = m.heat_loss.coefficient();
    const double gmax = m.heat_loss.bound();
    for (int j = 0; j < grid.size(); ++j)
      if (grid.distance_to_boundary(grid.node(j)) > m.layer_width * (1.0 + 1e-12))
        row.sup_outside_layer = std::max(row.sup_outside_layer, std::abs(g[j]));
    row.support_ok = row.sup_outside_layer <= 1e-12 * (1.0 + gmax);
    row.scaled_sup = m.layer_width * gmax;
    const double eps = m.layer_width, length = grid.length();
    row.flux_low = simpson([&](double s) { return eps * m.profile(eps * s); }, 0.0, 1.0);
    row.flux_high = simpson([&](double s) { return eps * m.profile(length - eps * s); }, 0.0, 1.0);
    row.integral = integrate(grid, g);
    report.members.push_back(row);
  }

  const auto& rows = report.members;
  report.support_ok = std::all_of(rows.begin(), rows.end(), [](auto& r) { return r.support_ok; });
  for (std::size_t i = 1; i < rows.size(); ++i)
    report.support_ok = report.support_ok && rows[i].layer_width < rows[i - 1].layer_width;
  for (const auto& r : rows)
    report.max_scaled_sup = std::max(report.max_scaled_sup, r.scaled_sup);
  report.scaled_bounded = std::isfinite(report.max_scaled_sup) &&
                          report.max_scaled_sup <= 2.0 * rows.front().scaled_sup + 1e-12;
  auto flux_error = [&](const MemberHypotheses& r) {
    const double q = members.front().q;
    return std::max(std::abs(r.flux_low - q), std::abs(r.flux_high - q));
  };
  report.final_flux_error = flux_error(rows.back());
  bool decreasing = rows.size() > 1;
  for (std::size_t i = 1; i < rows.size(); ++i)
    decreasing = decreasing && flux_error(rows[i]) < flux_error(rows[i - 1]);
  report.flux_converges =
      report.final_flux_error <= 1e-3 * members.front().q || decreasing;
  return report;
}

DiracFamilyMember FamilySpec::member(int k, const CrossSectionGrid& grid) const {
  switch (kind) {
  case Kind::Quadratic:
    return make_quadratic_family(k, q, grid);
  case Kind::Mollifier:
    return make_mollifier_family(mollifier_shape(shape), k, q, grid);
  case Kind::Frozen: {
    auto m = make_quadratic_family(frozen_k, q, grid);
    m.k = k;
    return m;
  }
  }
  throw InvalidArgument("unknown family kind");
}

std::string FamilySpec::describe() const {
  std::ostringstream os;
  switch (kind) {
  case Kind::Quadratic:
    os << "quadratic(q=" << q << ")";
    break;
  case Kind::Mollifier:
    os << "mollifier(" << shape << ", q=" << q << ")";
    break;
  case Kind::Frozen:
    os << "frozen(k0=" << frozen_k << ", q=" << q << ")";
    break;
  }
  return os.str();
}

} // namespace kpp
