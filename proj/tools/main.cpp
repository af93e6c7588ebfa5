#include <cstdio>
#include <fstream>
#include <string>

#include "CLI11.hpp"
#include "driver.hpp"

namespace {

struct CommonOpts {
  CLI::Option* tol = nullptr;
  CLI::Option* max_n = nullptr;
  CLI::Option* truncation = nullptr;
  CLI::Option* depth = nullptr;
  CLI::Option* seed = nullptr;
};

CommonOpts add_common(CLI::App* cmd, otcli::RunConfig& cfg, unsigned& seed_raw) {
  CommonOpts c;
  c.tol = cmd->add_option("--tol", cfg.tol, "numeric tolerance")->check(CLI::PositiveNumber);
  c.max_n = cmd->add_option("--max-n", cfg.max_n, "iteration horizon")
                ->check(CLI::PositiveNumber);
  c.truncation = cmd->add_option("--truncation", cfg.truncation, "truncation window")
                     ->check(CLI::PositiveNumber);
  c.depth = cmd->add_option("--depth", cfg.depth, "certificate depth")
                ->check(CLI::PositiveNumber);
  c.seed = cmd->add_option("--seed", seed_raw, "seed for randomized suites");
  cmd->add_option("--output", cfg.output, "write the report here instead of stdout");
  cmd->add_option("--format", cfg.format, "report format")
      ->check(CLI::IsMember({"json", "csv"}));
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for operator asymptotics"};
  app.require_subcommand(1);

  otcli::RunConfig cfg;
  unsigned seed_raw = 0;

  auto finish = [&cfg, &seed_raw](const CommonOpts& c, const char* name, double tol_default) {
    cfg.subcommand = name;
    if (!c.tol->count()) cfg.tol = tol_default;
    if (!c.max_n->count()) cfg.max_n = 200000;
    if (!c.truncation->count()) cfg.truncation = 2000;
    if (!c.depth->count()) cfg.depth = 8;
    if (c.seed->count()) cfg.seed = seed_raw;
  };

  {
    CLI::App* cmd = app.add_subcommand("cesaro", "averaged power limits of a square matrix");
    cmd->add_option("--input", cfg.input, "matrix document")->required();
    cmd->add_option("--method", cfg.method, "iterative, spectral, or both")
        ->check(CLI::IsMember({"iterative", "spectral", "both"}));
    CommonOpts c = add_common(cmd, cfg, seed_raw);
    cmd->callback([&, c] { finish(c, "cesaro", 1e-3); });
  }
  {
    CLI::App* cmd = app.add_subcommand("construct", "realize a prescribed limit spectrum");
    cmd->add_option("--values", cfg.values, "positive target eigenvalues")
        ->required()
        ->delimiter(',');
    cmd->add_option("--stable-dim", cfg.stable_dim, "prescribed kernel dimension")
        ->check(CLI::NonNegativeNumber);
    CommonOpts c = add_common(cmd, cfg, seed_raw);
    cmd->callback([&, c] { finish(c, "construct", 1e-8); });
  }
  {
    CLI::App* cmd = app.add_subcommand("commutant", "injectivity kernel of a block triple");
    cmd->add_option("--input", cfg.input, "document with T00, T01, T11")->required();
    cmd->add_option("--random-trials", cfg.random_trials,
                    "additionally run seeded stable-peripheral triples")
        ->check(CLI::NonNegativeNumber);
    CommonOpts c = add_common(cmd, cfg, seed_raw);
    cmd->callback([&, c] { finish(c, "commutant", 1e-8); });
  }
  {
    CLI::App* cmd = app.add_subcommand("lazy", "exact basis-level operator actions");
    cmd->add_option("--op", cfg.op, "scenario id, optionally scenario:name")->required();
    cmd->add_option("--vector", cfg.vector_path, "support-list document");
    cmd->add_option("--power", cfg.power, "apply this many forward steps")
        ->check(CLI::NonNegativeNumber);
    cmd->add_flag("--asymptotic", cfg.asymptotic, "certify diagonal limits on the support");
    CommonOpts c = add_common(cmd, cfg, seed_raw);
    cmd->callback([&, c] { finish(c, "lazy", 1e-3); });
  }
  {
    CLI::App* cmd = app.add_subcommand("tree", "weighted shifts on directed trees");
    cmd->add_option("--input", cfg.input, "tree document")->required();
    cmd->add_flag("--analyze", cfg.analyze, "structure, norm, corank");
    cmd->add_flag("--asymptote", cfg.asymptote, "alpha, isometric asymptote, dual family");
    cmd->add_flag("--cyclic-vector", cfg.cyclic_vector,
                  "cyclicity flags and the backward-ray construction");
    cmd->add_flag("--similarity", cfg.similarity, "similarity models and flags");
    CommonOpts c = add_common(cmd, cfg, seed_raw);
    cmd->callback([&, c] { finish(c, "tree", 1e-3); });
  }
  {
    CLI::App* cmd = app.add_subcommand("repro", "frozen reproduction scenarios");
    cmd->add_option("--scenario", cfg.scenario, "run a single scenario id");
    cmd->add_flag("--list", cfg.list_only, "list scenario ids and exit");
    CommonOpts c = add_common(cmd, cfg, seed_raw);
    cmd->callback([&, c] { finish(c, "repro", 1e-3); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    otcli::Report rep = otcli::run(cfg);
    otcli::json doc = otcli::report_to_json(rep);
    std::string text =
        cfg.format == "csv" ? otcli::csv_flatten(doc) : doc.dump(2) + "\n";
    if (cfg.output.empty()) {
      std::fputs(text.c_str(), stdout);
    } else {
      std::ofstream out(cfg.output);
      if (!out) {
        std::fprintf(stderr, "error: cannot write %s\n", cfg.output.c_str());
        return 2;
      }
      out << text;
    }
    return rep.pass() ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
