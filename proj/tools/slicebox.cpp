#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace slicebox::cli;

  CLI::App app{"slicebox: one-dimensional slice sampling on unbounded variables"};
  app.require_subcommand(1);

  SampleOptions sample;
  auto* s = app.add_subcommand("sample", "draw from a target and write the chain");
  s->add_option("--target", sample.target, "builtin name or expr:DENSITY")->required();
  s->add_option("--method", sample.method, "unbounded | positive | bounded | stepout");
  s->add_option("--x0", sample.x0, "initial value");
  s->add_option("--n", sample.n, "post-burn-in draws");
  s->add_option("--burn-in", sample.burn_in, "draws discarded before recording");
  s->add_option("--thin", sample.thin, "keep every k-th draw");
  s->add_option("--seed", sample.seed, "random seed (default: $SLICEBOX_SEED or 0)");
  s->add_option("--a", sample.a_scale, "sigmoid scale A (unbounded)");
  s->add_option("--width", sample.width, "initial interval width (stepout)");
  s->add_option("--bounds", sample.bounds, "LO,HI (bounded)");
  s->add_option("--max-iter", sample.max_iter, "candidate cap per draw");
  s->add_option("--out", sample.out, "output file (default: stdout)");
  s->add_option("--format", sample.format, "csv | json");
  s->add_option("--reference", sample.reference, "builtin whose CDF the KS check uses");
  s->add_option("--bins", sample.bins, "histogram bins");
  s->add_option("--threshold", sample.threshold, "report the fraction of draws above this");
  s->add_option("--ks-thin", sample.ks_thin, "thinning applied before the KS check");

  CompareOptions compare;
  auto* c = app.add_subcommand("compare", "run a shipped or custom experiment scenario");
  c->add_option("--scenario", compare.scenario, "fig2a | fig2b | fig2c | fig3a | fig3b | fig4");
  c->add_option("--scenario-file", compare.scenario_file, "scenario in key = value form");
  c->add_option("--seed", compare.seed, "random seed (default: $SLICEBOX_SEED or the scenario's)");
  c->add_option("--format", compare.format, "text | json");

  DiagnoseOptions diagnose;
  auto* d = app.add_subcommand("diagnose", "recompute the report for a stored chain");
  d->add_option("--in", diagnose.in, "CSV written by `sample`")->required();
  d->add_option("--reference", diagnose.reference, "builtin whose CDF the KS check uses");
  d->add_option("--bins", diagnose.bins, "histogram bins");
  d->add_option("--threshold", diagnose.threshold, "report the fraction of draws above this");
  d->add_option("--ks-thin", diagnose.ks_thin, "thinning applied before the KS check");
  d->add_option("--max-iter", diagnose.max_iter, "n_shrinks at or above this counts as a cap hit");
  d->add_option("--format", diagnose.format, "text | json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*s) return cmd_sample(sample, std::cout, std::cerr);
    if (*c) return cmd_compare(compare, std::cout, std::cerr);
    return cmd_diagnose(diagnose, std::cout, std::cerr);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
