#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedgen/commands.hpp"
#include "fedgen/dataset.hpp"
#include "fedgen/errors.hpp"

namespace fs = std::filesystem;

namespace {

fs::path default_out(const std::string& leaf) {
  const char* root = std::getenv("FEDGEN_OUT_ROOT");
  return fs::path(root ? root : "out") / leaf;
}

fedgen::ExperimentConfig load(const std::string& config_path, bool seed_set, std::uint64_t seed) {
  fedgen::ExperimentConfig cfg = fedgen::load_config(config_path);
  if (seed_set) cfg.seed = seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized-training and inference-optimization workbench"};
  app.require_subcommand(1);

  std::string config_path, out_dir, mode = "hierarchy", what = "all";
  std::uint64_t seed = 0;
  bool seed_set = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
      seed_set = true;
    });
  };

  CLI::App* partition = app.add_subcommand("partition", "write the client partition manifest");
  add_common(partition);

  CLI::App* run = app.add_subcommand("run", "run a training pipeline");
  add_common(run);
  run->add_option("--mode", mode, "hierarchy | flat_fl | merge_only | local_only");

  CLI::App* trueput = app.add_subcommand("trueput", "pass@k / optimal-k sweep and strategy grid");
  add_common(trueput);
  trueput->add_option("what", what, "sweep | grid | all");

  CLI::App* decode = app.add_subcommand("decode", "parallel-decoding sweep and online learning");
  add_common(decode);
  decode->add_option("what", what, "sweep | learn | all");

  std::vector<std::string> run_dirs;
  CLI::App* report = app.add_subcommand("report", "join run summaries into a comparison table");
  report->add_option("runs", run_dirs, "run output directories")->required();
  report->add_option("--out", out_dir, "output directory");

  // Not part of the experiment pipeline: emits a synthetic corpus so the
  // other subcommands have something to chew on.
  std::string data_dir = "data";
  int gd_groups = 4, gd_samples = 100, gd_pairs = 2, gd_max_len = 12, gd_depth = 4;
  std::uint64_t gd_seed = 0;
  double gd_holdout = 0.2;
  CLI::App* gendata = app.add_subcommand("gendata", "generate a synthetic bracket corpus");
  gendata->add_option("--dir", data_dir, "output directory");
  gendata->add_option("--groups", gd_groups, "number of group tags");
  gendata->add_option("--samples", gd_samples, "samples per group");
  gendata->add_option("--pairs", gd_pairs, "bracket pair count (1-4)");
  gendata->add_option("--max-len", gd_max_len, "max bracket tokens per sample");
  gendata->add_option("--depth", gd_depth, "grammar max nesting depth");
  gendata->add_option("--holdout", gd_holdout, "fraction of samples held out for eval");
  gendata->add_option("--seed", gd_seed, "corpus seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (partition->parsed()) {
      auto cfg = load(config_path, seed_set, seed);
      fedgen::cmd_partition(cfg, out_dir.empty() ? default_out("partition") : fs::path(out_dir));
    } else if (run->parsed()) {
      auto cfg = load(config_path, seed_set, seed);
      fedgen::RunMode m = fedgen::parse_mode(mode);
      fedgen::cmd_run(cfg, m, out_dir.empty() ? default_out("run_" + mode) : fs::path(out_dir));
    } else if (trueput->parsed()) {
      auto cfg = load(config_path, seed_set, seed);
      fedgen::cmd_trueput(cfg, out_dir.empty() ? default_out("trueput") : fs::path(out_dir), what);
    } else if (decode->parsed()) {
      auto cfg = load(config_path, seed_set, seed);
      fedgen::cmd_decode(cfg, out_dir.empty() ? default_out("decode") : fs::path(out_dir), what);
    } else if (report->parsed()) {
      std::vector<fs::path> dirs(run_dirs.begin(), run_dirs.end());
      fedgen::cmd_report(dirs, out_dir.empty() ? default_out("report") : fs::path(out_dir));
    } else if (gendata->parsed()) {
      fedgen::Vocab vocab = fedgen::default_vocab(gd_pairs);
      fedgen::GrammarSpec grammar = fedgen::default_grammar(vocab, gd_depth);
      fedgen::CorpusSpec spec;
      spec.n_groups = gd_groups;
      spec.samples_per_group = gd_samples;
      spec.max_len = gd_max_len;
      spec.seed = gd_seed;
      auto pool = fedgen::make_corpus(vocab, grammar, spec);

      std::vector<fedgen::ClientDataset> train = pool, eval = pool;
      for (std::size_t g = 0; g < pool.size(); ++g) {
        const std::size_t held =
            static_cast<std::size_t>(gd_holdout * static_cast<double>(pool[g].samples.size()));
        eval[g].samples.assign(pool[g].samples.end() - static_cast<std::ptrdiff_t>(held),
                               pool[g].samples.end());
        train[g].samples.resize(pool[g].samples.size() - held);
      }
      fs::create_directories(data_dir);
      fedgen::save_vocab(vocab, fs::path(data_dir) / "vocab.txt");
      fedgen::save_dataset(train, vocab, fs::path(data_dir) / "train.tsv");
      fedgen::save_dataset(eval, vocab, fs::path(data_dir) / "eval.tsv");
    }
  } catch (const fedgen::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const fedgen::data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
