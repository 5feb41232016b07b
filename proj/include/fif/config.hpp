#pragma once

// Experiment configuration: one JSON document describes a system and every
// numerical setting, so a run is reproducible from the file alone.
//
// {
//   "system": {
//     "kind": "alpha",                 // or "classical"
//     "knots": [0, 0.5, 1],            // alpha only
//     "germ": "sin(pi*x)", "base": "0",
//     "scaling": ["0.2", "0.2"],       // or a single string used for every map
//     "data": [[0,0],[0.5,1],[1,0]],   // classical only
//     "offsets": ["x", "1 - x"]        // classical only
//   },
//   "sampling":    {"grid_exponent": 15, "tol": 1e-8, "depth": 60},
//   "oscillation": {"p": 2, "m_max": 12, "beta": 0.5},
//   "hoelder":     {"s": 1},
//   "boxdim":      {"m_min": 4, "m_max": 11},
//   "contraction": {"c1": 1, "c2": 1},
//   "bilipschitz": {"pairs": 30000, "seed": 42},
//   "output":      {"dir": "out"}
// }

#include <cstdint>
#include <istream>
#include <memory>
#include <string>
#include <vector>

#include "fif/dimension.hpp"
#include "fif/fifcore.hpp"

namespace fif {

struct ExperimentConfig {
  std::string kind = "alpha";
  std::vector<double> knots;
  std::string germ;
  std::string base;
  std::vector<std::string> scaling;
  std::vector<DataPoint> data;
  std::vector<std::string> offsets;

  unsigned grid_exponent = 15;
  std::size_t depth = 60;
  DimensionSettings settings;
  double c1 = 1.0;
  double c2 = 1.0;
  std::size_t pairs = 30000;
  std::uint64_t seed = 42;
  std::string out_dir = "out";

  /// Validates the system through make_system / make_classical.
  std::unique_ptr<FractalSystem> build_system() const;
};

/// Throws ValidationError on malformed JSON, unknown keys or bad values.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

}  // namespace fif
