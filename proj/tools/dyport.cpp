// dyport <subcommand> --config <path> [--out <dir>] [--seed <u64>] [key=value ...]
//
// Exit status: 0 success, 1 validation error, 2 runtime error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dyport/dyport.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  std::optional<int> year;
  std::string records;
  std::string scores_dir;
};

dyport::RunConfig resolve(const Options& o) {
  auto cfg = dyport::RunConfig::load(o.config);
  cfg.apply_overrides(o.overrides);
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (o.seed) cfg.seed = *o.seed;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark link predictors on time-sliced concept graphs"};
  app.require_subcommand(1);
  Options opt;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"ingest", "parse the corpus into bundle.json"},
      {"snapshot", "export yearly snapshots"},
      {"attribute", "integrated-gradients attribution of test-year edges"},
      {"importance", "importance components and combined score of test positives"},
      {"train", "train the learned models of the roster"},
      {"evaluate", "sample negatives, score, and write report.json"},
      {"report", "render report.csv, plot_data.csv and report.md"},
      {"run", "all stages in order"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "run configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory (overrides out_dir)");
    sub->add_option("--seed", opt.seed, "master seed (overrides seed)");
    sub->add_option("overrides", opt.overrides, "key=value config overrides");
    if (name == "snapshot") sub->add_option("--year", opt.year, "export only this year");
    if (name == "evaluate") {
      sub->add_option("--records", opt.records, "saved eval_records.tsv");
      sub->add_option("--scores-dir", opt.scores_dir, "directory of <model>.tsv score files");
    }
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const auto cfg = resolve(opt);
    dyport::Pipeline p(cfg);
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "ingest") p.ingest();
    else if (cmd == "snapshot") p.snapshot(opt.year);
    else if (cmd == "attribute") p.attribute();
    else if (cmd == "importance") p.importance();
    else if (cmd == "train") p.train();
    else if (cmd == "evaluate") {
      if (opt.records.empty() != opt.scores_dir.empty()) {
        throw dyport::ValidationError("--records and --scores-dir go together");
      }
      if (opt.records.empty()) {
        p.evaluate();
      } else {
        dyport::evaluate_saved(cfg, opt.records, opt.scores_dir, p.out_dir() / "report.json");
      }
    } else if (cmd == "report") p.report();
    else p.run();
    return 0;
  } catch (const dyport::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
