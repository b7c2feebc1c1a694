#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "panel.hpp"

namespace hicast {

// Synthetic retail-style demand panel: integer counts with weekly and annual
// seasonality, per-group level shifts, promo-driven price effects and a
// controlled zero fraction.
struct SynthConfig {
  std::size_t n_series = 500;
  int n_days = 730;
  std::vector<int> level_group_counts = {10};  // mid levels; total and bottom implied
  double zero_fraction = 0.4;
  std::uint64_t seed = 0;
  Date start = date_from_civil(2016, 1, 4);
};

PanelDataset synth_panel(const SynthConfig& cfg);

// Declarative hierarchy spec matching the metadata columns synth_panel emits.
std::string synth_hierarchy_spec(const SynthConfig& cfg);

// Portable samplers (fixed algorithms, deterministic for a given engine
// state; the standard library's distributions are implementation-defined).
double sample_normal(std::mt19937_64& rng);
double sample_gamma(std::mt19937_64& rng, double shape);
std::uint64_t sample_poisson(std::mt19937_64& rng, double mean);

}  // namespace hicast
