#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "krylov/sweep.hpp"

namespace krylov {

struct FigureOptions {
  // Model, grid, time window, classifier and workers. base.spec.n_sites is
  // used when sizes is empty.
  SweepConfig base;
  std::vector<int> sizes;
  // A single state; when unset, figures that need states use X+, Y+ and Z+.
  std::optional<double> theta;
  std::optional<double> phi;
  // Number of theta samples on the ipr-slice line.
  int slice_points = 61;
  std::filesystem::path out_dir = "out";
};

std::vector<std::string> figure_names();
std::string figure_description(const std::string& name);

// Writes the data files and a manifest.json into out_dir. Throws ConfigError
// for an unknown name.
std::vector<std::filesystem::path> figure_command(const std::string& name,
                                                  const FigureOptions& options);

}  // namespace krylov
