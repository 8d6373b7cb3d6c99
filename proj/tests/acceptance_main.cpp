#include "pcnls/acceptance.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char** argv)
{
  CLI::App app{"acceptance suite"};
  pcnls::AcceptanceOptions opt;
  std::string json_out;
  app.add_option("--points", opt.points_override, "points per axis for every grid");
  app.add_option("--sigma1", opt.sigma1_override, "force sigma_1 in the schedule check");
  app.add_option("--only", opt.only, "criteria to run")->delimiter(',');
  app.add_option("--scratch", opt.scratch_dir, "scratch directory for the determinism runs");
  app.add_option("--json", json_out, "machine-readable report");
  CLI11_PARSE(app, argc, argv);

  const pcnls::AcceptanceReport rep = pcnls::acceptance_suite(opt);
  std::cout << rep.to_text() << std::flush;
  if (!json_out.empty())
    std::ofstream(json_out) << rep.to_json().dump(2) << "\n";
  const auto failed = std::count_if(rep.criteria.begin(), rep.criteria.end(), [](const auto& c) { return !c.passed; });
  std::cout << (rep.criteria.size() - failed) << "/" << rep.criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
