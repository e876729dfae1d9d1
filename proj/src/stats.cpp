#include "macs/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace macs {
namespace {

// erfc via the Maclaurin series of erf for small z and the Legendre continued
// fraction (modified Lentz evaluation) for large z. Absolute error below 1e-12
// on [0, inf); callers only pass z >= 0.
double erfc_positive(double z) {
  constexpr double kInvSqrtPi = 0.5641895835477562869;
  if (z < 2.0) {
    double term = z;
    double sum = z;
    double z2 = z * z;
    for (int n = 1; n < 200; ++n) {
      term *= -z2 / n;
      double add = term / (2 * n + 1);
      sum += add;
      if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return 1.0 - 2.0 * kInvSqrtPi * sum;
  }
  if (z > 27.0) return 0.0;
  // Legendre continued fraction: erfc(z)*sqrt(pi)*exp(z^2) equals
  // 1/(z + (1/2)/(z + (2/2)/(z + (3/2)/(z + ...)))), evaluated with the
  // modified Lentz method.
  constexpr double kTiny = 1e-300;
  double f = z;
  double c = f;
  double d = 0.0;
  for (int n = 1; n < 300; ++n) {
    double a = n / 2.0;
    d = z + a * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = z + a / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return kInvSqrtPi * std::exp(-z * z) / f;
}

}  // namespace

KMCurve km_fit(const std::vector<SurvivalObservation>& observations) {
  if (observations.empty()) throw DataError("km_fit: no observations");
  std::vector<SurvivalObservation> obs = observations;
  std::sort(obs.begin(), obs.end(), [](const SurvivalObservation& a, const SurvivalObservation& b) {
    return a.time_days < b.time_days;
  });
  KMCurve curve;
  double s = 1.0;
  std::size_t i = 0;
  const std::size_t n = obs.size();
  while (i < n) {
    double t = obs[i].time_days;
    std::size_t deaths = 0;
    std::size_t j = i;
    while (j < n && obs[j].time_days == t) {
      if (obs[j].event) ++deaths;
      ++j;
    }
    if (deaths > 0) {
      std::size_t at_risk = n - i;
      s *= 1.0 - static_cast<double>(deaths) / static_cast<double>(at_risk);
      curve.event_times.push_back(t);
      curve.survival.push_back(s);
      curve.at_risk.push_back(at_risk);
      curve.deaths.push_back(deaths);
    }
    i = j;
  }
  return curve;
}

std::optional<double> km_median(const KMCurve& curve) {
  for (std::size_t k = 0; k < curve.event_times.size(); ++k)
    if (curve.survival[k] <= 0.5) return curve.event_times[k];
  return std::nullopt;
}

MedianCi km_median_ci(const std::vector<SurvivalObservation>& observations, std::size_t n_boot,
                      RngSpec rng) {
  std::size_t events = 0;
  for (const auto& o : observations)
    if (o.event) ++events;
  if (events < 2) throw DataError("km_median_ci: fewer than two events");
  const std::size_t n = observations.size();
  std::vector<double> medians;
  medians.reserve(n_boot);
  std::vector<SurvivalObservation> res(n);
  for (std::size_t i = 0; i < n_boot; ++i) {
    Rng it(derive(rng, i));
    for (std::size_t k = 0; k < n; ++k) res[k] = observations[it.below(n)];
    auto m = km_median(km_fit(res));
    medians.push_back(m ? *m : std::numeric_limits<double>::infinity());
  }
  double lo = quantile(medians, 0.025);
  double hi = quantile(medians, 0.975);
  MedianCi out;
  if (std::isfinite(lo)) out.lo = lo;
  if (std::isfinite(hi)) {
    out.hi = hi;
  } else {
    std::size_t inf_count = 0;
    for (double m : medians)
      if (!std::isfinite(m)) ++inf_count;
    if (inf_count * 40 <= n_boot) {
      // Knife-edge: interpolation touched +inf although no more than 2.5% of
      // resamples were unreached; fall back to the largest finite median.
      double best = -std::numeric_limits<double>::infinity();
      for (double m : medians)
        if (std::isfinite(m) && m > best) best = m;
      out.hi = best;
    }
  }
  return out;
}

LogrankResult logrank(const std::vector<SurvivalObservation>& group_a,
                      const std::vector<SurvivalObservation>& group_b) {
  auto count_events = [](const std::vector<SurvivalObservation>& g) {
    std::size_t e = 0;
    for (const auto& o : g)
      if (o.event) ++e;
    return e;
  };
  if (count_events(group_a) == 0 || count_events(group_b) == 0)
    throw DataError("logrank: each group needs at least one event");

  std::vector<double> event_times;
  for (const auto& o : group_a)
    if (o.event) event_times.push_back(o.time_days);
  for (const auto& o : group_b)
    if (o.event) event_times.push_back(o.time_days);
  std::sort(event_times.begin(), event_times.end());
  event_times.erase(std::unique(event_times.begin(), event_times.end()), event_times.end());

  double sum_diff = 0.0;
  double sum_var = 0.0;
  for (double t : event_times) {
    double n_a = 0, n_b = 0, d_a = 0, d_b = 0;
    for (const auto& o : group_a) {
      if (o.time_days >= t) ++n_a;
      if (o.event && o.time_days == t) ++d_a;
    }
    for (const auto& o : group_b) {
      if (o.time_days >= t) ++n_b;
      if (o.event && o.time_days == t) ++d_b;
    }
    double n = n_a + n_b;
    double d = d_a + d_b;
    if (n <= 0 || d <= 0) continue;
    double expected_a = d * n_a / n;
    sum_diff += d_a - expected_a;
    if (n > 1) sum_var += d * (n_a / n) * (1.0 - n_a / n) * (n - d) / (n - 1);
  }
  if (sum_var <= 0.0) throw MetricError("logrank: zero variance, test degenerate");
  LogrankResult out;
  out.statistic = sum_diff * sum_diff / sum_var;
  out.p_value = chi2_sf(out.statistic, 1);
  return out;
}

double chi2_sf(double x, int df) {
  if (x < 0.0) throw DataError("chi2_sf: negative statistic");
  if (df != 1) throw ConfigError("chi2_sf: only df = 1 is supported");
  return erfc_positive(std::sqrt(x / 2.0));
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DataError("quantile: empty input");
  if (q < 0.0 || q > 1.0) throw DataError("quantile: q outside [0, 1]");
  std::sort(values.begin(), values.end());
  double h = (static_cast<double>(values.size()) - 1.0) * q;
  std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return values[lo];
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

Summary describe(const std::vector<double>& values) {
  if (values.empty()) throw DataError("describe: empty input");
  Summary s;
  s.median = quantile(values, 0.5);
  s.iqr_lo = quantile(values, 0.25);
  s.iqr_hi = quantile(values, 0.75);
  return s;
}

std::map<std::string, double> category_percentages(const std::vector<std::string>& items) {
  if (items.empty()) throw DataError("category_percentages: empty input");
  std::map<std::string, double> out;
  for (const auto& item : items) out[item] += 1.0;
  for (auto& [_, v] : out) v = 100.0 * v / static_cast<double>(items.size());
  return out;
}

}  // namespace macs
