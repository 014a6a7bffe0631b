#include "dphase/config.hpp"
#include "dphase/error.hpp"
#include "dphase/run.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace
{

std::string kindOf(const dphase::Error &e)
{
  using namespace dphase;
  if (dynamic_cast<const ConfigError *>(&e))
    return "ConfigError";
  if (dynamic_cast<const InvalidWeight *>(&e))
    return "InvalidWeight";
  if (dynamic_cast<const InvalidGeometry *>(&e))
    return "InvalidGeometry";
  if (dynamic_cast<const DomainError *>(&e))
    return "DomainError";
  if (dynamic_cast<const RegimeError *>(&e))
    return "RegimeError";
  if (dynamic_cast<const NoConvergence *>(&e))
    return "NoConvergence";
  return "Error";
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Double phase eigenvalue experiments"};
  std::string configPath;
  std::optional<std::string> task, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool quiet = false;
  app.add_option("--config", configPath, "Experiment config file")->required()->check(CLI::ExistingFile);
  app.add_option("--task", task, "Override task.name");
  app.add_option("--out", out, "Override output.dir");
  app.add_option("--seed", seed, "Override solver.seed");
  app.add_option("--threads", threads, "Override solver.threads")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", quiet, "Only print failures");
  CLI11_PARSE(app, argc, argv);

  try
  {
    auto cfg = dphase::loadConfig(configPath);
    if (task)
      cfg.task = dphase::parseTask(*task);
    if (out)
      cfg.output = *out;
    if (seed)
      cfg.solver.seed = *seed;
    if (threads)
      cfg.threads = *threads;

    const auto report = dphase::run(cfg);
    for (const auto &w : report.warnings)
      std::cerr << "warning: " << w << "\n";
    int failed = 0;
    for (const auto &inv : report.invariants)
    {
      if (!inv.evaluated)
        continue;
      if (!inv.pass)
        ++failed;
      if (!quiet || !inv.pass)
        std::cout << (inv.pass ? "pass " : inv.hard ? "FAIL " : "soft-fail ") << inv.name
                  << "  slack=" << inv.slack << (inv.detail.empty() ? "" : "  " + inv.detail)
                  << "\n";
    }
    if (!quiet)
      std::cout << toString(cfg.task) << ": " << report.results.size() << " rows, "
                << report.seconds << " s, output in " << cfg.output << "\n";
    return report.hardInvariantsPass() ? 0 : 1;
  }
  catch (const dphase::Error &e)
  {
    std::cerr << "dphase-eig: " << kindOf(e) << ": " << e.what() << "\n";
    return 2;
  }
  catch (const std::exception &e)
  {
    std::cerr << "dphase-eig: " << e.what() << "\n";
    return 2;
  }
}
