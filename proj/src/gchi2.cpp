#include "covdetect/gchi2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace covdetect {

namespace {

using std::numbers::pi;

// Per-side tail mass allowed to alias into the discretized inversion.
constexpr double kAliasTail = 1e-10;
// Bound on the integral discarded beyond the truncation point.
constexpr double kTruncation = 1e-10;
// Agreement required between the step and the half step.
constexpr double kRichardsonTol = 1e-9;
constexpr int kMaxHalvings = 5;
constexpr double kMaxTerms = 4e7;
constexpr int kMonteCarloDraws = 1'000'000;

struct Component {
  double weight;
  double dof;
};

std::vector<Component> merged_components(const GchiSqSpec& spec) {
  std::vector<double> w(spec.weights.data(), spec.weights.data() + spec.weights.size());
  std::sort(w.begin(), w.end());
  const double scale = spec.weights.cwiseAbs().maxCoeff();
  std::vector<Component> out;
  for (double v : w) {
    if (!out.empty() && std::abs(out.back().weight - v) <= 1e-12 * scale) {
      out.back().dof += spec.dof_per_component;
    } else {
      out.push_back({v, static_cast<double>(spec.dof_per_component)});
    }
  }
  return out;
}

// log E[exp(s Q)], finite for s in the interval where every 1 - 2 w s > 0.
double log_mgf(const std::vector<Component>& comps, double s) {
  double acc = 0.0;
  for (const auto& c : comps) acc -= 0.5 * c.dof * std::log1p(-2.0 * c.weight * s);
  return acc;
}

double mean_of(const std::vector<Component>& comps) {
  double m = 0.0;
  for (const auto& c : comps) m += c.dof * c.weight;
  return m;
}

double sd_of(const std::vector<Component>& comps) {
  double v = 0.0;
  for (const auto& c : comps) v += 2.0 * c.dof * c.weight * c.weight;
  return std::sqrt(v);
}

// inf_{s>0} exp(log_mgf(s) - s y) >= P(Q >= y)
double chernoff_upper(const std::vector<Component>& comps, double y) {
  double top = 0.0;
  for (const auto& c : comps) top = std::max(top, c.weight);
  if (top == 0.0) return y > 0.0 ? 0.0 : 1.0;

  double lo = 0.0;
  double hi = (1.0 - 1e-12) / (2.0 * top);
  auto f = [&](double s) { return log_mgf(comps, s) - s * y; };
  // The exponent is convex in s.
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - golden * (hi - lo);
  double b = lo + golden * (hi - lo);
  double fa = f(a), fb = f(b);
  for (int i = 0; i < 200 && hi - lo > 1e-15 * (hi + 1e-300); ++i) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - golden * (hi - lo);
      fa = f(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + golden * (hi - lo);
      fb = f(b);
    }
  }
  const double best = std::min({fa, fb, 0.0});
  return std::exp(best);
}

std::vector<Component> negated(std::vector<Component> comps) {
  for (auto& c : comps) c.weight = -c.weight;
  return comps;
}

// Smallest y (found by doubling steps from the mean) with P(Q >= y) <= eps.
double upper_quantile_bound(const std::vector<Component>& comps, double eps) {
  bool any_positive = std::any_of(comps.begin(), comps.end(), [](const Component& c) { return c.weight > 0.0; });
  if (!any_positive) return 0.0;
  const double sd = sd_of(comps);
  double y = std::max(mean_of(comps), 0.0) + sd;
  double step = sd;
  while (chernoff_upper(comps, y) > eps) {
    y += step;
    step *= 2.0;
  }
  return y;
}

// Imhof truncation point: for any subset of components,
//   |integral beyond U| <= 1 / (pi k U^k prod |w_j|^{dof_j/2}),  k = sum dof_j / 2.
// The largest weights first give the tightest bound.
double truncation_point(std::vector<Component> comps, double eps) {
  std::sort(comps.begin(), comps.end(),
            [](const Component& a, const Component& b) { return std::abs(a.weight) > std::abs(b.weight); });
  double best = std::numeric_limits<double>::infinity();
  double k = 0.0;
  double log_prod = 0.0;
  for (const auto& c : comps) {
    k += 0.5 * c.dof;
    log_prod += 0.5 * c.dof * std::log(std::abs(c.weight));
    const double log_u = (-std::log(pi * k * eps) - log_prod) / k;
    best = std::min(best, std::exp(log_u));
  }
  return best;
}

// Midpoint rule on the Imhof integral
//   P(Q <= x) = 1/2 - (1/pi) int_0^inf sin(theta(u)) / (u rho(u)) du.
double imhof_sum(const std::vector<Component>& comps, double x, double step, double upper) {
  double total = 0.0;
  const auto n = static_cast<long long>(std::ceil(upper / step));
  for (long long i = 0; i < n; ++i) {
    const double u = (static_cast<double>(i) + 0.5) * step;
    double theta = -0.5 * x * u;
    double log_rho = 0.0;
    for (const auto& c : comps) {
      const double wu = c.weight * u;
      theta += 0.5 * c.dof * std::atan(wu);
      log_rho += 0.25 * c.dof * std::log1p(wu * wu);
    }
    total += std::sin(theta) / u * std::exp(-log_rho);
  }
  return 0.5 - total * step / pi;
}

double monte_carlo_cdf(const std::vector<Component>& comps, double x) {
  std::mt19937_64 engine(0x5eedcdf5eedcdfULL);
  std::vector<std::gamma_distribution<double>> draws;
  for (const auto& c : comps) draws.emplace_back(0.5 * c.dof, 2.0);
  long long hits = 0;
  for (int i = 0; i < kMonteCarloDraws; ++i) {
    double q = 0.0;
    for (std::size_t j = 0; j < comps.size(); ++j) q += comps[j].weight * draws[j](engine);
    if (q <= x) ++hits;
  }
  return static_cast<double>(hits) / kMonteCarloDraws;
}

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace

GchiSqSpec GchiSqSpec::from_weights(const RVector& raw, int blocks) {
  if (blocks < 1) throw InvalidConfiguration("generalized chi-squared: block count must be positive");
  GchiSqSpec spec;
  spec.dof_per_component = 2 * blocks;
  const double top = raw.size() ? raw.cwiseAbs().maxCoeff() : 0.0;
  if (!std::isfinite(top)) throw NumericalDomainError("generalized chi-squared: non-finite weight");
  std::vector<double> kept;
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    if (top > 0.0 && std::abs(raw(i)) >= 1e-12 * top) kept.push_back(raw(i));
  }
  spec.weights = Eigen::Map<const RVector>(kept.data(), static_cast<Eigen::Index>(kept.size()));
  return spec;
}

void GchiSqSpec::validate() const {
  if (dof_per_component < 2 || dof_per_component % 2 != 0) {
    throw InvalidConfiguration("generalized chi-squared: dof must be even and >= 2");
  }
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights(i)) || weights(i) == 0.0) {
      throw InvalidConfiguration("generalized chi-squared: weights must be finite and nonzero");
    }
  }
}

double gchi2_upper_tail_bound(const GchiSqSpec& spec, double y) {
  spec.validate();
  if (spec.degenerate()) return y <= 0.0 ? 1.0 : 0.0;
  return chernoff_upper(merged_components(spec), y);
}

CdfValue gchi2_cdf(const GchiSqSpec& spec, double x) {
  spec.validate();
  if (std::isnan(x)) throw InvalidConfiguration("gchi2_cdf: x is NaN");
  if (spec.degenerate()) return {x >= 0.0 ? 1.0 : 0.0, CdfMethod::degenerate};

  const std::vector<Component> comps = merged_components(spec);

  if (comps.size() == 1 && comps.front().dof == 2.0) {
    // w * chi2_2 is exponential with mean 2w.
    const double w = comps.front().weight;
    double p = 0.0;
    if (w > 0.0) {
      p = x <= 0.0 ? 0.0 : -std::expm1(-x / (2.0 * w));
    } else {
      p = x >= 0.0 ? 1.0 : std::exp(x / (2.0 * -w));
    }
    return {clamp01(p), CdfMethod::exponential};
  }

  const double y_hi = upper_quantile_bound(comps, kAliasTail);
  const double y_lo = -upper_quantile_bound(negated(comps), kAliasTail);
  if (x >= y_hi) return {1.0, CdfMethod::tail_bound};
  if (x <= y_lo) return {0.0, CdfMethod::tail_bound};

  const double span = std::max(y_hi - x, x - y_lo);
  double step = 4.0 * pi / span;
  const double upper = truncation_point(comps, kTruncation) + step;
  if (upper / step * 3.0 > kMaxTerms) return {clamp01(monte_carlo_cdf(comps, x)), CdfMethod::monte_carlo};

  double coarse = imhof_sum(comps, x, step, upper);
  for (int i = 0; i < kMaxHalvings; ++i) {
    step /= 2.0;
    if (upper / step > kMaxTerms) break;
    const double fine = imhof_sum(comps, x, step, upper);
    if (std::abs(fine - coarse) <= kRichardsonTol) return {clamp01(fine), CdfMethod::imhof};
    coarse = fine;
  }
  throw ConvergenceError("gchi2_cdf: step refinement did not settle");
}

}  // namespace covdetect
