#include "fedgen/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "fedgen/dataset.hpp"
#include "fedgen/hierarchy.hpp"
#include "fedgen/partition.hpp"
#include "fedgen/pardecode.hpp"
#include "fedgen/rng.hpp"
#include "fedgen/trueput.hpp"

namespace fedgen {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write " + path.string());
  out << text;
}

// Config echo goes down before any computation so a killed run still leaves
// its parameters behind.
void begin_artifact(const ExperimentConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  write_text(dir / "config_echo.json", cfg.echo);
}

void end_artifact(const fs::path& dir, std::chrono::steady_clock::time_point start,
                  const std::string& extra = {}) {
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream os;
  os << "wall_clock_seconds=" << fmt(secs) << "\n";
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  os << "finished_unix_time="
     << std::chrono::duration_cast<std::chrono::seconds>(now).count() << "\n";
  os << extra;
  write_text(dir / "metadata.txt", os.str());
}

struct Loaded {
  Vocab vocab;
  GrammarSpec grammar;
  std::vector<ClientDataset> train_pool;
  ClientDataset validation;  // flattened eval dataset
};

GrammarSpec grammar_from_config(const ExperimentConfig& cfg, const Vocab& vocab) {
  GrammarSpec g;
  g.max_depth = cfg.grammar.max_depth;
  g.eos = vocab.eos;
  if (cfg.grammar.pairs.empty()) {
    for (int i = 0; i + 1 < vocab.size(); i += 2)
      g.pairs.emplace_back(static_cast<Token>(i), static_cast<Token>(i + 1));
  } else {
    for (const auto& [open, close] : cfg.grammar.pairs)
      g.pairs.emplace_back(vocab.id_of(open), vocab.id_of(close));
  }
  return g;
}

Loaded load_experiment(const ExperimentConfig& cfg, bool need_eval = true) {
  if (cfg.dataset.vocab.empty() || cfg.dataset.train.empty())
    throw config_error("config needs dataset.vocab and dataset.train paths");
  Loaded L;
  L.vocab = load_vocab(cfg.dataset.vocab);
  L.grammar = grammar_from_config(cfg, L.vocab);
  L.train_pool = load_dataset(cfg.dataset.train, L.vocab);
  if (need_eval) {
    if (cfg.dataset.eval.empty()) throw config_error("config needs a dataset.eval path");
    L.validation.group_tag = "validation";
    for (auto& ds : load_dataset(cfg.dataset.eval, L.vocab))
      for (auto& s : ds.samples) L.validation.samples.push_back(std::move(s));
  }
  return L;
}

ToyModel init_model(const ExperimentConfig& cfg, const Vocab& vocab) {
  if (cfg.model.init == "gaussian")
    return ToyModel::gaussian_init(vocab, cfg.model.context_len, cfg.model.init_sigma,
                                   derive_seed(cfg.seed, 0x141));
  return ToyModel::uniform(vocab, cfg.model.context_len);
}

AggregationMetric metric_from_config(const ExperimentConfig& cfg, const Loaded& L) {
  AggregationMetric m;
  if (cfg.fl.metric == "sample_ratio") {
    m.kind = MetricKind::sample_ratio;
    return m;
  }
  m.kind = cfg.fl.metric == "syntax_accuracy" ? MetricKind::syntax_accuracy
                                              : MetricKind::semantic_accuracy;
  EvalConfig ec;
  ec.validation = L.validation;
  ec.grammar = L.grammar;
  ec.n_samples = cfg.fl.metric_n_samples;
  ec.strategy = cfg.eval.strategy;
  ec.max_len = cfg.eval.max_len;
  ec.seed = derive_seed(cfg.seed, 0x5C0);
  m.eval_config = std::move(ec);
  return m;
}

FLConfig fl_from_config(const ExperimentConfig& cfg, const Loaded& L) {
  FLConfig fl;
  fl.rounds = cfg.fl.rounds;
  fl.participation = cfg.fl.participation;
  fl.epochs_per_round = cfg.fl.epochs_per_round;
  fl.lr = cfg.fl.lr;
  fl.metric = metric_from_config(cfg, L);
  fl.seed = derive_seed(cfg.seed, 0xF1);
  fl.zero_score_fallback = cfg.fl.zero_score_fallback == "uniform" ? ZeroScoreFallback::uniform
                                                                   : ZeroScoreFallback::error;
  return fl;
}

ToyModel pooled_trained_model(const ExperimentConfig& cfg, const Loaded& L) {
  ClientDataset pooled;
  pooled.group_tag = "pooled";
  for (const auto& ds : L.train_pool)
    pooled.samples.insert(pooled.samples.end(), ds.samples.begin(), ds.samples.end());
  return train_local(init_model(cfg, L.vocab), pooled, cfg.model.train_epochs, cfg.model.train_lr,
                     derive_seed(cfg.seed, 0x7A));
}

std::string round_rows(const std::vector<RoundRecord>& records,
                       const std::vector<int>* id_map) {
  std::ostringstream os;
  for (const RoundRecord& rec : records) {
    for (std::size_t i = 0; i < rec.participants.size(); ++i) {
      const int local = rec.participants[i];
      const int global = id_map ? (*id_map)[static_cast<std::size_t>(local)] : local;
      os << rec.round << ',' << global << ',' << fmt(rec.raw_scores[i]) << ','
         << fmt(rec.weights[i]) << ',';
      if (rec.post_agg_eval)
        os << fmt(rec.post_agg_eval->syntax_accuracy) << ','
           << fmt(rec.post_agg_eval->semantic_accuracy);
      else
        os << ',';
      os << '\n';
    }
  }
  return os.str();
}

std::string merge_rows(const std::vector<MergeRow>& report) {
  std::ostringstream os;
  os << "model_id,raw_score,weight,delta_l2_norm,post_drop_l2_norm\n";
  for (const MergeRow& r : report)
    os << r.model_id << ',' << fmt(r.raw_score) << ',' << fmt(r.weight) << ',' << fmt(r.delta_l2)
       << ',' << fmt(r.post_drop_l2) << '\n';
  return os.str();
}

}  // namespace

RunMode parse_mode(const std::string& name) {
  if (name == "hierarchy") return RunMode::hierarchy;
  if (name == "flat_fl") return RunMode::flat_fl;
  if (name == "merge_only") return RunMode::merge_only;
  if (name == "local_only") return RunMode::local_only;
  throw config_error("unknown run mode '" + name + "'");
}

std::string mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::hierarchy: return "hierarchy";
    case RunMode::flat_fl: return "flat_fl";
    case RunMode::merge_only: return "merge_only";
    case RunMode::local_only: return "local_only";
  }
  return "?";
}

RunArtifact cmd_partition(const ExperimentConfig& cfg, const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  Loaded L = load_experiment(cfg, /*need_eval=*/false);
  begin_artifact(cfg, out_dir);

  PartitionResult part = partition_dirichlet(L.train_pool, cfg.partition.alpha,
                                             cfg.partition.n_clients, derive_seed(cfg.seed, 0xD1));
  GroupSplit split = partition_groups(cfg.partition.n_clients, cfg.partition.n_groups,
                                      cfg.partition.n_isolated, derive_seed(cfg.seed, 0x62));
  auto hists = tag_histograms(L.train_pool, part.plan);

  std::vector<std::string> role(static_cast<std::size_t>(cfg.partition.n_clients));
  for (std::size_t g = 0; g < split.groups.size(); ++g)
    for (int c : split.groups[g]) role[static_cast<std::size_t>(c)] = "group" + std::to_string(g);
  for (int c : split.isolated) role[static_cast<std::size_t>(c)] = "isolated";

  std::ostringstream os;
  for (int c = 0; c < cfg.partition.n_clients; ++c) {
    const std::size_t ci = static_cast<std::size_t>(c);
    os << c << '\t' << role[ci] << '\t' << part.clients[ci].samples.size() << '\t';
    bool first = true;
    for (const auto& [tag, count] : hists[ci]) {
      if (!first) os << ';';
      os << tag << ':' << count;
      first = false;
    }
    os << '\n';
  }
  write_text(out_dir / "partition_manifest.tsv", os.str());
  end_artifact(out_dir, start, part.infeasible ? "warning=more clients than samples\n" : "");
  return RunArtifact{out_dir};
}

RunArtifact cmd_run(const ExperimentConfig& cfg, RunMode mode, const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  Loaded L = load_experiment(cfg);
  begin_artifact(cfg, out_dir);

  const ToyModel init = init_model(cfg, L.vocab);
  FLConfig fl = fl_from_config(cfg, L);

  // All modes share the same partition so their results are comparable.
  PartitionResult part = partition_dirichlet(L.train_pool, cfg.partition.alpha,
                                             cfg.partition.n_clients, derive_seed(cfg.seed, 0xD1));

  MergeConfig merge;
  merge.method = cfg.merge.method == "dare" ? MergeMethod::dare : MergeMethod::weighted_average;
  merge.drop_rate = cfg.merge.drop_rate;
  merge.base = init;
  merge.metric = fl.metric;
  merge.seed = derive_seed(cfg.seed, 0xDA);

  ToyModel final_model = init;
  CommLedger ledger;
  std::string rounds_csv = "round,client_id,raw_score,weight,post_agg_syntax_acc,post_agg_semantic_acc\n";

  switch (mode) {
    case RunMode::hierarchy:
    case RunMode::merge_only: {
      GroupSplit split =
          mode == RunMode::merge_only
              ? partition_groups(cfg.partition.n_clients, 0, cfg.partition.n_clients,
                                 derive_seed(cfg.seed, 0x62))
              : partition_groups(cfg.partition.n_clients, cfg.partition.n_groups,
                                 cfg.partition.n_isolated, derive_seed(cfg.seed, 0x62));
      HierarchyConfig hc;
      hc.groups = split.groups;
      hc.isolated = split.isolated;
      hc.fl_cfg = fl;
      hc.local_epochs = fl.rounds * fl.epochs_per_round;  // equal compute with FL clients
      hc.merge_cfg = merge;
      hc.init = init;
      HierarchyResult r = run_hierarchy(part.clients, hc);
      final_model = r.global;
      ledger = r.ledger;
      for (std::size_t g = 0; g < r.group_records.size(); ++g)
        rounds_csv += round_rows(r.group_records[g], &split.groups[g]);
      write_text(out_dir / "merge.csv", merge_rows(r.merge_report));
      break;
    }
    case RunMode::flat_fl: {
      FlatResult r = run_flat_fl(part.clients, init, fl);
      final_model = r.model;
      ledger = r.ledger;
      rounds_csv += round_rows(r.records, nullptr);
      break;
    }
    case RunMode::local_only: {
      // No aggregation at all: every client trains alone and the
      // best-scoring client model is reported.
      const int epochs = fl.rounds * fl.epochs_per_round;
      std::vector<ToyModel> local(part.clients.size(), init);
#pragma omp parallel for schedule(dynamic)
      for (long long c = 0; c < static_cast<long long>(part.clients.size()); ++c)
        local[static_cast<std::size_t>(c)] =
            train_local(init, part.clients[static_cast<std::size_t>(c)], epochs, fl.lr,
                        derive_seed(fl.seed, 0x10C + static_cast<std::uint64_t>(c)));
      std::ostringstream os;
      os << "client_id,raw_score\n";
      double best = -1.0;
      for (std::size_t c = 0; c < local.size(); ++c) {
        double s = score(fl.metric, local[c], part.clients[c].samples.size());
        os << c << ',' << fmt(s) << '\n';
        if (s > best) {
          best = s;
          final_model = local[c];
        }
      }
      write_text(out_dir / "local_scores.csv", os.str());
      break;
    }
  }
  write_text(out_dir / "rounds.csv", rounds_csv);

  const std::uint64_t eval_seed = derive_seed(cfg.seed, 0xEE);
  EvalReport final_eval = evaluate(final_model, L.validation, L.grammar, cfg.eval.n_samples,
                                   cfg.eval.strategy, eval_seed, cfg.eval.max_len);
  EvalReport init_eval = evaluate(init, L.validation, L.grammar, cfg.eval.n_samples,
                                  cfg.eval.strategy, eval_seed, cfg.eval.max_len);

  std::ostringstream acc;
  acc << "stage,syntax_accuracy,semantic_accuracy\n";
  acc << "init," << fmt(init_eval.syntax_accuracy) << ',' << fmt(init_eval.semantic_accuracy) << '\n';
  acc << "final," << fmt(final_eval.syntax_accuracy) << ',' << fmt(final_eval.semantic_accuracy) << '\n';
  write_text(out_dir / "accuracy_table.csv", acc.str());

  std::ostringstream sum;
  sum << "mode=" << mode_name(mode) << '\n'
      << "seed=" << cfg.seed << '\n'
      << "n_clients=" << cfg.partition.n_clients << '\n'
      << "n_groups=" << (mode == RunMode::hierarchy ? cfg.partition.n_groups : 0) << '\n'
      << "n_isolated="
      << (mode == RunMode::hierarchy ? cfg.partition.n_isolated
                                     : (mode == RunMode::merge_only ? cfg.partition.n_clients : 0))
      << '\n'
      << "central_transfers=" << ledger.central_transfers << '\n'
      << "group_transfers=" << ledger.group_transfers << '\n'
      << "bytes_per_transfer=" << ledger.bytes_per_transfer << '\n'
      << "init_syntax=" << fmt(init_eval.syntax_accuracy) << '\n'
      << "init_semantic=" << fmt(init_eval.semantic_accuracy) << '\n'
      << "final_syntax=" << fmt(final_eval.syntax_accuracy) << '\n'
      << "final_semantic=" << fmt(final_eval.semantic_accuracy) << '\n';
  write_text(out_dir / "summary.txt", sum.str());

  end_artifact(out_dir, start);
  return RunArtifact{out_dir};
}

RunArtifact cmd_trueput(const ExperimentConfig& cfg, const fs::path& out_dir,
                        const std::string& what) {
  const auto start = std::chrono::steady_clock::now();
  if (what != "sweep" && what != "grid" && what != "all")
    throw config_error("trueput expects sweep, grid, or all");
  begin_artifact(cfg, out_dir);

  const LatencyNormalization norm = cfg.trueput.normalization == "per_design"
                                        ? LatencyNormalization::per_design
                                        : LatencyNormalization::batch;

  if (what != "grid") {
    LatencyModel::Kind kind = LatencyModel::Kind::batched;
    if (cfg.trueput.latency == "constant") kind = LatencyModel::Kind::constant;
    if (cfg.trueput.latency == "linear") kind = LatencyModel::Kind::linear;

    std::vector<int> capacities = kind == LatencyModel::Kind::batched ? cfg.trueput.capacity_grid
                                                                      : std::vector<int>{0};
    std::ostringstream sweep, best;
    sweep << "capacity,k,pass_at_k,latency,trueput\n";
    best << "capacity,k_star,trueput_star\n";
    for (int cap : capacities) {
      TrueputProfile profile;
      profile.p = cfg.trueput.p;
      profile.k_max = cfg.trueput.k_max;
      profile.latency = LatencyModel{kind, cfg.trueput.t0, cfg.trueput.per_sample,
                                     std::max(cap, 1)};
      OptimalK opt = optimal_k(profile, norm);
      for (int k = 1; k <= profile.k_max; ++k)
        sweep << cap << ',' << k << ',' << fmt(pass_at_k_analytic(profile.p, k)) << ','
              << fmt(profile.latency(k)) << ',' << fmt(opt.curve[static_cast<std::size_t>(k - 1)])
              << '\n';
      best << cap << ',' << opt.k << ',' << fmt(opt.value) << '\n';
    }
    write_text(out_dir / "sweep.csv", sweep.str());
    write_text(out_dir / "optimal_k.csv", best.str());
  }

  if (what != "sweep" && !cfg.trueput.grid.empty()) {
    Loaded L = load_experiment(cfg);
    ToyModel model = pooled_trained_model(cfg, L);
    auto entries = strategy_grid_search(model, L.validation, L.grammar, cfg.trueput.grid,
                                        cfg.trueput.budget_samples, derive_seed(cfg.seed, 0x621D),
                                        cfg.eval.max_len);
    std::ostringstream os;
    os << "rank,strategy,hyperparams,syntax_accuracy,valid,diagnostic\n";
    for (std::size_t i = 0; i < entries.size(); ++i)
      os << i << ',' << entries[i].strategy.name() << ',' << entries[i].strategy.hyperparams()
         << ',' << fmt(entries[i].syntax_accuracy) << ',' << (entries[i].valid ? 1 : 0) << ','
         << entries[i].diagnostic << '\n';
    write_text(out_dir / "grid.csv", os.str());
  }

  end_artifact(out_dir, start);
  return RunArtifact{out_dir};
}

RunArtifact cmd_decode(const ExperimentConfig& cfg, const fs::path& out_dir,
                       const std::string& what) {
  const auto start = std::chrono::steady_clock::now();
  if (what != "sweep" && what != "learn" && what != "all")
    throw config_error("decode expects sweep, learn, or all");
  Loaded L = load_experiment(cfg);
  begin_artifact(cfg, out_dir);

  const ToyModel target = pooled_trained_model(cfg, L);

  // Deployment traffic: greedy serving of validation prompts; every context
  // the server sees is a training example for the draft heads.
  std::vector<TokenSeq> prompts;
  const int n_prompts = std::max(1, cfg.decode.n_prompts);
  for (int i = 0; i < n_prompts && i < static_cast<int>(L.validation.samples.size()); ++i)
    prompts.push_back(L.validation.samples[static_cast<std::size_t>(i)].prompt);

  std::vector<TokenSeq> served_contexts;
  SamplingStrategy greedy;
  for (const TokenSeq& prompt : prompts) {
    TokenSeq gen = generate(target, prompt, greedy, cfg.decode.max_len, 0);
    TokenSeq full = prompt;
    full.insert(full.end(), gen.begin(), gen.end());
    for (std::size_t end = static_cast<std::size_t>(target.context_len); end <= full.size(); ++end)
      served_contexts.emplace_back(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(end));
  }
  if (served_contexts.empty())
    served_contexts.push_back(TokenSeq(static_cast<std::size_t>(target.context_len), L.vocab.eos));

  DraftHeads heads = DraftHeads::uniform(L.vocab, target.context_len, cfg.decode.heads_depth);
  Rng stream_rng = Rng(cfg.seed).derive(0x1EA2);
  std::ostringstream learn;
  learn << "update_idx,kl\n";
  for (int step = 0; step < cfg.decode.learn_steps; ++step) {
    const TokenSeq& ctx = served_contexts[stream_rng.next_below(served_contexts.size())];
    KlUpdateResult r = online_kl_update(heads, target, ctx, cfg.decode.learn_lr);
    heads = std::move(r.heads);
    learn << step << ',' << fmt(r.kl) << '\n';
  }
  if (what != "sweep") write_text(out_dir / "learn.csv", learn.str());

  if (what != "learn") {
    std::vector<int> sizes = cfg.decode.tree_sizes;
    if (sizes.empty())
      for (int s = 1; s <= 64; ++s) sizes.push_back(s);
    std::ostringstream os;
    os << "tree_size,acceptance_ratio,tokens_per_step,relative_cost,speedup\n";
    for (int size : sizes) {
      DecodeStats stats =
          simulate_decode(target, heads, prompts, size, cfg.decode.ceiling, cfg.decode.max_len);
      os << size << ',' << fmt(stats.acceptance_ratio) << ',' << fmt(stats.mean_accepted_per_step)
         << ',' << fmt(stats.relative_cost) << ',' << fmt(stats.speedup) << '\n';
    }
    write_text(out_dir / "sweep.csv", os.str());
  }

  end_artifact(out_dir, start);
  return RunArtifact{out_dir};
}

RunArtifact cmd_report(const std::vector<fs::path>& run_dirs, const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(out_dir);

  static const std::vector<std::string> kCols = {
      "mode",          "seed",          "n_clients",        "central_transfers",
      "group_transfers", "init_syntax", "final_syntax",     "final_semantic"};

  std::ostringstream os;
  os << "run";
  for (const auto& c : kCols) os << ',' << c;
  os << '\n';
  for (const fs::path& dir : run_dirs) {
    std::ifstream in(dir / "summary.txt");
    if (!in) throw data_error("no summary.txt in " + dir.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
      auto pos = line.find('=');
      if (pos != std::string::npos) kv[line.substr(0, pos)] = line.substr(pos + 1);
    }
    os << dir.filename().string();
    for (const auto& c : kCols) os << ',' << kv[c];
    os << '\n';
  }
  write_text(out_dir / "comparison.csv", os.str());
  end_artifact(out_dir, start);
  return RunArtifact{out_dir};
}

}  // namespace fedgen
