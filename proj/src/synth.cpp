#include "synth.hpp"

#include <cmath>
#include <sstream>

#include "common.hpp"

namespace hicast {

namespace {

double uniform01(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

double sample_normal(std::mt19937_64& rng) {
  // Box-Muller, first branch only; one extra draw keeps this stateless.
  const double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
}

double sample_gamma(std::mt19937_64& rng, double shape) {
  if (shape < 1.0) {
    // Boost to shape+1 and scale back.
    const double u = uniform01(rng);
    return sample_gamma(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = sample_normal(rng);
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = uniform01(rng);
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::uint64_t sample_poisson(std::mt19937_64& rng, double mean) {
  if (mean <= 0.0) return 0;
  if (mean < 30.0) {
    const double limit = std::exp(-mean);
    double prod = uniform01(rng);
    std::uint64_t n = 0;
    while (prod > limit) {
      prod *= uniform01(rng);
      ++n;
    }
    return n;
  }
  // Normal approximation is plenty for the large-mean tail of a demand panel.
  const double v = mean + std::sqrt(mean) * sample_normal(rng);
  return v <= 0.0 ? 0 : static_cast<std::uint64_t>(std::llround(v));
}

PanelDataset synth_panel(const SynthConfig& cfg) {
  require(cfg.n_series >= 1 && cfg.n_days >= 1, ErrorCode::invalid_argument,
          "synth: need at least one series and one day");
  require(cfg.zero_fraction >= 0.0 && cfg.zero_fraction <= 1.0,
          ErrorCode::invalid_argument, "synth: zero_fraction must be in [0, 1]");
  for (int k : cfg.level_group_counts)
    require(k >= 1, ErrorCode::invalid_argument, "synth: group counts must be >= 1");

  std::mt19937_64 rng(cfg.seed);
  const std::size_t n = cfg.n_series;
  const std::size_t days = static_cast<std::size_t>(cfg.n_days);

  PanelDataset p;
  p.start_date = cfg.start;
  p.n_days = days;
  p.series_ids.resize(n);
  for (std::size_t s = 0; s < n; ++s) p.series_ids[s] = "s" + std::to_string(s);

  // Contiguous balanced groups per mid level, recorded as metadata columns.
  std::vector<std::vector<std::size_t>> group_of(cfg.level_group_counts.size());
  for (std::size_t lv = 0; lv < cfg.level_group_counts.size(); ++lv) {
    const std::size_t k = std::min<std::size_t>(cfg.level_group_counts[lv], n);
    p.meta_columns.push_back("level" + std::to_string(lv + 1));
    p.meta_values.emplace_back(n);
    group_of[lv].resize(n);
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t g = s * k / n;
      group_of[lv][s] = g;
      p.meta_values.back()[s] = "g" + std::to_string(g);
    }
  }

  // Per-group level shifts and per-series idiosyncrasy on the log rate.
  std::vector<std::vector<double>> group_shift(group_of.size());
  std::vector<std::vector<double>> group_phase(group_of.size());
  for (std::size_t lv = 0; lv < group_of.size(); ++lv) {
    const std::size_t k = std::min<std::size_t>(cfg.level_group_counts[lv], n);
    for (std::size_t g = 0; g < k; ++g) {
      group_shift[lv].push_back(0.4 * sample_normal(rng));
      group_phase[lv].push_back(365.0 * uniform01(rng));
    }
  }
  std::vector<double> log_rate(n), weekly_amp(n), base_price(n);
  for (std::size_t s = 0; s < n; ++s) {
    double mu = std::log(3.0) + 0.5 * sample_normal(rng);
    for (std::size_t lv = 0; lv < group_of.size(); ++lv)
      mu += group_shift[lv][group_of[lv][s]];
    log_rate[s] = mu;
    weekly_amp[s] = 0.5 + 0.5 * uniform01(rng);
    base_price[s] = std::exp(2.0 + 0.6 * sample_normal(rng));
  }

  static const double kWeekly[7] = {0.85, 0.9, 0.95, 1.0, 1.1, 1.3, 1.2};

  p.target.assign(n * days, 0.0);
  p.exog_names = {"sell_price"};
  p.exog.assign(1, std::vector<double>(n * days, 0.0));

  for (std::size_t s = 0; s < n; ++s) {
    double price = base_price[s];
    int promo_left = 0;
    double phase = group_of.empty() ? 0.0 : group_phase[0][group_of[0][s]];
    for (std::size_t t = 0; t < days; ++t) {
      const Date d = cfg.start + static_cast<int>(t);
      // Weekly promo lottery on Mondays: 20% price cut, 30% demand lift.
      if (day_of_week(d) == 0) {
        promo_left = uniform01(rng) < 0.05 ? 7 : 0;
      }
      const bool promo = promo_left > 0;
      if (promo_left > 0) --promo_left;
      p.exog[0][s * days + t] = promo ? 0.8 * price : price;

      if (cfg.zero_fraction >= 1.0) continue;
      if (uniform01(rng) < cfg.zero_fraction) continue;

      const double weekly = 1.0 + weekly_amp[s] * (kWeekly[day_of_week(d)] - 1.0);
      const double annual =
          1.0 + 0.25 * std::sin(2.0 * 3.141592653589793 *
                                (static_cast<double>(t) + phase) / 365.0);
      double mean = std::exp(log_rate[s]) * weekly * annual * (promo ? 1.3 : 1.0);
      mean = mean / (1.0 - cfg.zero_fraction);
      double nb_mean = std::max(mean - 1.0, 0.05);
      // Negative binomial as a gamma-poisson mixture, dispersion r = 2.
      const double r = 2.0;
      const double lambda = sample_gamma(rng, r) * (nb_mean / r);
      p.target[s * days + t] = 1.0 + static_cast<double>(sample_poisson(rng, lambda));
    }
  }
  return p;
}

std::string synth_hierarchy_spec(const SynthConfig& cfg) {
  std::ostringstream out;
  out << "{\"levels\":[{\"name\":\"total\"}";
  for (std::size_t lv = 0; lv < cfg.level_group_counts.size(); ++lv)
    out << ",{\"name\":\"level" << (lv + 1) << "\",\"column\":\"level" << (lv + 1)
        << "\"}";
  out << "]}";
  return out.str();
}

}  // namespace hicast
