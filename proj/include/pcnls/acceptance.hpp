#pragma once

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pcnls
{

struct AcceptanceOptions
{
  /// replaces the points per axis of every spatial grid (0 keeps the defaults)
  int points_override = 0;
  /// seeds the sigma ladder with this value instead of the standard sigma_1
  std::optional<double> sigma1_override;
  /// scratch space for the determinism runs (a temporary directory when empty)
  std::filesystem::path scratch_dir;
  /// criteria to run (1..12); empty means all
  std::vector<int> only;
};

struct CriterionResult
{
  int id = 0;
  std::string name;
  bool passed = false;
  std::string measured;
  std::string tolerance;
  std::string note;
  double seconds = 0.0;
};

struct AcceptanceReport
{
  std::vector<CriterionResult> criteria;

  bool all_passed() const;
  nlohmann::json to_json() const;
  /// one line per criterion
  std::string to_text() const;
};

/// Runs every acceptance criterion at its stated tolerance.  Errors inside a
/// criterion become a failed entry; the suite itself does not throw.
AcceptanceReport acceptance_suite(const AcceptanceOptions& opt = {});

} // namespace pcnls
