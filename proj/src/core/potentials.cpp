#include "potentials.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "quadrature.hpp"

namespace pointdyn {

// --- DeltaConfig -----------------------------------------------------------

DeltaConfig::DeltaConfig(std::vector<DeltaCenter> centers, double tail_bound)
    : centers_(std::move(centers)), tail_bound_(tail_bound) {
  if (!(tail_bound_ >= 0.0) || !std::isfinite(tail_bound_))
    fail(ErrorCode::invalid_argument, "DeltaConfig: tail_bound must be >= 0");
  for (const auto& c : centers_) {
    if (!std::isfinite(c.alpha) || !std::isfinite(c.x))
      fail(ErrorCode::invalid_argument, "DeltaConfig: non-finite center");
    if (c.alpha == 0.0)
      fail(ErrorCode::invalid_argument,
           "DeltaConfig: coupling constants must be nonzero");
    l1_mass_ += std::abs(c.alpha);
  }
  std::vector<double> xs;
  xs.reserve(centers_.size());
  for (const auto& c : centers_) xs.push_back(c.x);
  std::sort(xs.begin(), xs.end());
  if (std::adjacent_find(xs.begin(), xs.end()) != xs.end())
    fail(ErrorCode::invalid_argument,
         "DeltaConfig: center locations must be pairwise distinct");
}

std::string DeltaConfig::serialize() const {
  std::ostringstream os;
  os.precision(17);
  os << "tail_bound " << tail_bound_ << '\n';
  for (const auto& c : centers_) os << c.alpha << ' ' << c.x << '\n';
  return os.str();
}

DeltaConfig DeltaConfig::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<DeltaCenter> centers;
  double tail = 0.0;
  bool have_header = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    auto bad = [&](const std::string& why) {
      fail(ErrorCode::invalid_config,
           "delta config line " + std::to_string(lineno) + ": " + why);
    };
    if (first == "tail_bound") {
      if (have_header) bad("duplicate tail_bound header");
      if (!centers.empty()) bad("tail_bound header must come first");
      if (!(ls >> tail)) bad("expected a number after tail_bound");
      have_header = true;
    } else {
      DeltaCenter c;
      try {
        std::size_t used = 0;
        c.alpha = std::stod(first, &used);
        if (used != first.size()) bad("malformed alpha '" + first + "'");
      } catch (const std::logic_error&) {
        bad("malformed alpha '" + first + "'");
      }
      if (!(ls >> c.x)) bad("expected 'alpha x'");
      centers.push_back(c);
    }
    std::string rest;
    if (ls >> rest) bad("trailing tokens");
  }
  if (!have_header)
    fail(ErrorCode::invalid_config, "delta config: missing tail_bound header");
  try {
    return DeltaConfig(std::move(centers), tail);
  } catch (const Error& e) {
    fail(ErrorCode::invalid_config, e.what());
  }
}

DeltaConfig DeltaConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open delta config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

bool DeltaConfig::is_parity_symmetric(double tol) const {
  for (const auto& c : centers_) {
    const bool mirrored =
        std::any_of(centers_.begin(), centers_.end(), [&](const DeltaCenter& d) {
          return std::abs(d.x + c.x) <= tol && std::abs(d.alpha - c.alpha) <= tol;
        });
    if (!mirrored) return false;
  }
  return true;
}

// --- Mollifiers ------------------------------------------------------------

namespace {
double bump_with(double a, double x) {
  const double r = 1.0 - x * x;
  return r > 0.0 ? std::exp(-a / r) : 0.0;
}
}  // namespace

MollifierProfile standard_bump() {
  return {"bump", [](double x) { return bump_with(1.0, x); }};
}

MollifierProfile profile_by_name(std::string_view name) {
  if (name == "bump") return standard_bump();
  if (name == "bump2")
    return {"bump2", [](double x) { return bump_with(2.0, x); }};
  fail(ErrorCode::invalid_argument,
       "unknown mollifier profile '" + std::string(name) + "'");
}

Mollifier::Mollifier(MollifierProfile profile, double center, double epsilon)
    : profile_(std::make_shared<const MollifierProfile>(std::move(profile))),
      center_(center),
      epsilon_(epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    fail(ErrorCode::invalid_argument, "Mollifier: epsilon must be positive");
  if (!profile_->shape)
    fail(ErrorCode::invalid_argument, "Mollifier: profile has no shape");

  // Support and sign checks on a sample lattice.
  for (int k = -400; k <= 400; ++k) {
    const double x = 2.0 * k / 400.0;
    const double v = profile_->shape(x);
    if (!(v >= 0.0) || !std::isfinite(v))
      fail(ErrorCode::invalid_argument,
           "Mollifier: profile '" + profile_->name + "' is negative or not finite");
    if (std::abs(x) > 1.0 && v != 0.0)
      fail(ErrorCode::invalid_argument,
           "Mollifier: profile '" + profile_->name + "' leaves [-1, 1]");
  }

  const QuadratureRule rule = gauss_legendre(64, -1.0, 1.0);
  nodes_ = rule.nodes;
  weighted_shape_.resize(nodes_.size());
  double mass = 0.0;
  for (std::size_t q = 0; q < nodes_.size(); ++q) {
    weighted_shape_[q] = rule.weights[q] * profile_->shape(nodes_[q]);
    mass += weighted_shape_[q];
  }
  if (!(mass > 0.0))
    fail(ErrorCode::invalid_argument, "Mollifier: profile has zero mass");
  normalisation_ = 1.0 / mass;
  for (double& v : weighted_shape_) v *= normalisation_;
}

double Mollifier::operator()(double x) const {
  return normalisation_ * profile_->shape((x - center_) / epsilon_) / epsilon_;
}

cplx Mollifier::unit_transform(double u) const {
  cplx sum = 0.0;
  for (std::size_t q = 0; q < nodes_.size(); ++q)
    sum += weighted_shape_[q] * std::polar(1.0, -u * nodes_[q]);
  return sum;
}

double Mollifier::mass() const {
  double m = 0.0;
  for (double v : weighted_shape_) m += v;
  return m;
}

// --- PotentialTransform ----------------------------------------------------

PotentialTransform::PotentialTransform(std::function<cplx(double)> evaluator,
                                       double sup_bound, std::string label)
    : evaluator_(std::move(evaluator)),
      sup_bound_(sup_bound),
      label_(std::move(label)) {
  if (!(sup_bound_ >= 0.0) || !std::isfinite(sup_bound_))
    fail(ErrorCode::invalid_argument, "PotentialTransform: bad sup bound");
}

PotentialTransform PotentialTransform::scaled(double c) const {
  if (is_zero() || c == 0.0) return zero_transform();
  auto f = evaluator_;
  return PotentialTransform([f, c](double p) { return c * f(p); },
                            std::abs(c) * sup_bound_, label_);
}

PotentialTransform operator+(const PotentialTransform& a,
                             const PotentialTransform& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  auto fa = a.evaluator_;
  auto fb = b.evaluator_;
  return PotentialTransform([fa, fb](double p) { return fa(p) + fb(p); },
                            a.sup_bound_ + b.sup_bound_,
                            a.label_ + "+" + b.label_);
}

PotentialTransform zero_transform() { return PotentialTransform(); }

PotentialTransform delta_transform(const DeltaConfig& cfg) {
  if (cfg.empty()) return zero_transform();
  std::vector<DeltaCenter> centers = cfg.centers();
  auto f = [centers](double p) {
    cplx sum = 0.0;
    for (const auto& c : centers) sum += c.alpha * std::polar(1.0, -p * c.x);
    return kInvSqrt2Pi * sum;
  };
  const double sup = kInvSqrt2Pi * (cfg.l1_mass() + cfg.tail_bound());
  return PotentialTransform(std::move(f), sup, "delta");
}

PotentialTransform mollifier_transform(const Mollifier& m) {
  auto f = [m](double p) {
    return kInvSqrt2Pi * std::polar(1.0, -p * m.center()) *
           m.unit_transform(m.epsilon() * p);
  };
  return PotentialTransform(std::move(f), kInvSqrt2Pi, "mollifier");
}

PotentialTransform mollified_transform(const DeltaConfig& cfg,
                                       const MollifierProfile& profile,
                                       double epsilon) {
  if (!(epsilon > 0.0))
    fail(ErrorCode::invalid_argument, "mollified_transform: epsilon <= 0");
  if (cfg.empty()) return zero_transform();
  // One shared unit-scale transform; centers only contribute phases.
  const Mollifier unit(profile, 0.0, epsilon);
  std::vector<DeltaCenter> centers = cfg.centers();
  auto f = [unit, centers](double p) {
    const cplx w = unit.unit_transform(unit.epsilon() * p);
    cplx sum = 0.0;
    for (const auto& c : centers) sum += c.alpha * std::polar(1.0, -p * c.x);
    return kInvSqrt2Pi * w * sum;
  };
  return PotentialTransform(std::move(f), kInvSqrt2Pi * cfg.l1_mass(),
                            "mollified");
}

Vector potential_on_differences(const PotentialTransform& v,
                                const MomentumGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Vector table = Vector::Zero(2 * n - 1);
  if (v.is_zero()) return table;
  const double dp = grid.spacing();
  for (Eigen::Index d = -(n - 1); d <= n - 1; ++d)
    table(d + n - 1) = v(dp * static_cast<double>(d)) * kInvSqrt2Pi;
  return table;
}

// --- l1 truncation ---------------------------------------------------------

DeltaConfig truncate_l1(const SummableSequence& seq, double delta) {
  if (!(delta > 0.0))
    fail(ErrorCode::invalid_argument, "truncate_l1: delta must be positive");
  if (!seq.term || !seq.tail_after)
    fail(ErrorCode::invalid_argument,
         "truncate_l1: sequence has no computable tail bound");
  constexpr std::size_t kMaxTerms = 1u << 20;
  std::size_t keep = 0;
  while (seq.tail_after(keep) > delta) {
    if (++keep > kMaxTerms)
      fail(ErrorCode::invalid_argument,
           "truncate_l1: tail does not fall below delta");
  }
  std::vector<DeltaCenter> centers;
  centers.reserve(keep);
  for (std::size_t i = 1; i <= keep; ++i) centers.push_back(seq.term(i));
  return DeltaConfig(std::move(centers), seq.tail_after(keep));
}

DeltaConfig truncate_l1(std::span<const DeltaCenter> finite, double delta) {
  if (!(delta > 0.0))
    fail(ErrorCode::invalid_argument, "truncate_l1: delta must be positive");
  return DeltaConfig(std::vector<DeltaCenter>(finite.begin(), finite.end()),
                     0.0);
}

}  // namespace pointdyn
