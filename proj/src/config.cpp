#include "fedgen/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "fedgen/errors.hpp"

namespace fedgen {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw config_error("config section '" + where + "' must be an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.contains(key))
      throw config_error("unknown config key '" + key + "' in " + where);
}

template <typename T>
void get(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw config_error(std::string("bad value for config key '") + key + "'");
  }
}

SamplingStrategy parse_strategy(const json& j, const std::string& where) {
  check_keys(j, {"kind", "temperature", "top_k", "top_p", "beam_width", "n_candidates"}, where);
  if (!j.contains("kind")) throw config_error("strategy in " + where + " needs a 'kind'");
  SamplingStrategy s;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "greedy") s.kind = SamplingKind::greedy;
  else if (kind == "temperature") s.kind = SamplingKind::temperature;
  else if (kind == "top_k") s.kind = SamplingKind::top_k;
  else if (kind == "nucleus") s.kind = SamplingKind::nucleus;
  else if (kind == "beam") s.kind = SamplingKind::beam;
  else throw config_error("unknown sampling kind '" + kind + "' in " + where);
  get(j, "temperature", s.temperature);
  get(j, "top_k", s.top_k);
  get(j, "top_p", s.top_p);
  get(j, "beam_width", s.beam_width);
  get(j, "n_candidates", s.n_candidates);
  return s;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw config_error(std::string("config is not valid JSON: ") + e.what());
  }

  check_keys(j, {"seed", "dataset", "model", "grammar", "partition", "fl", "merge", "eval",
                 "trueput", "decode"},
             "top level");

  ExperimentConfig cfg;
  get(j, "seed", cfg.seed);

  if (j.contains("dataset")) {
    const json& d = j["dataset"];
    check_keys(d, {"train", "eval", "vocab"}, "dataset");
    get(d, "train", cfg.dataset.train);
    get(d, "eval", cfg.dataset.eval);
    get(d, "vocab", cfg.dataset.vocab);
  }
  if (j.contains("model")) {
    const json& m = j["model"];
    check_keys(m, {"context_len", "init", "init_sigma", "train_epochs", "train_lr"}, "model");
    get(m, "context_len", cfg.model.context_len);
    get(m, "init", cfg.model.init);
    get(m, "init_sigma", cfg.model.init_sigma);
    get(m, "train_epochs", cfg.model.train_epochs);
    get(m, "train_lr", cfg.model.train_lr);
    if (cfg.model.init != "zero" && cfg.model.init != "gaussian")
      throw config_error("model.init must be 'zero' or 'gaussian'");
  }
  if (j.contains("grammar")) {
    const json& g = j["grammar"];
    check_keys(g, {"max_depth", "pairs"}, "grammar");
    get(g, "max_depth", cfg.grammar.max_depth);
    if (g.contains("pairs")) {
      for (const auto& p : g["pairs"]) {
        if (!p.is_array() || p.size() != 2)
          throw config_error("grammar.pairs entries must be [open, close]");
        cfg.grammar.pairs.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
      }
    }
  }
  if (j.contains("partition")) {
    const json& p = j["partition"];
    check_keys(p, {"alpha", "n_clients", "n_groups", "n_isolated"}, "partition");
    get(p, "alpha", cfg.partition.alpha);
    get(p, "n_clients", cfg.partition.n_clients);
    get(p, "n_groups", cfg.partition.n_groups);
    get(p, "n_isolated", cfg.partition.n_isolated);
  }
  if (j.contains("fl")) {
    const json& f = j["fl"];
    check_keys(f,
               {"rounds", "participation", "epochs_per_round", "lr", "metric",
                "zero_score_fallback", "metric_n_samples"},
               "fl");
    get(f, "rounds", cfg.fl.rounds);
    get(f, "participation", cfg.fl.participation);
    get(f, "epochs_per_round", cfg.fl.epochs_per_round);
    get(f, "lr", cfg.fl.lr);
    get(f, "metric", cfg.fl.metric);
    get(f, "zero_score_fallback", cfg.fl.zero_score_fallback);
    get(f, "metric_n_samples", cfg.fl.metric_n_samples);
    static const std::set<std::string> kMetrics = {"sample_ratio", "syntax_accuracy",
                                                   "semantic_accuracy"};
    if (!kMetrics.contains(cfg.fl.metric))
      throw config_error("unknown fl.metric '" + cfg.fl.metric + "'");
    if (cfg.fl.zero_score_fallback != "error" && cfg.fl.zero_score_fallback != "uniform")
      throw config_error("fl.zero_score_fallback must be 'error' or 'uniform'");
  }
  if (j.contains("merge")) {
    const json& m = j["merge"];
    check_keys(m, {"method", "drop_rate"}, "merge");
    get(m, "method", cfg.merge.method);
    get(m, "drop_rate", cfg.merge.drop_rate);
    if (cfg.merge.method != "weighted_average" && cfg.merge.method != "dare")
      throw config_error("merge.method must be 'weighted_average' or 'dare'");
  }
  if (j.contains("eval")) {
    const json& e = j["eval"];
    check_keys(e, {"n_samples", "max_len", "strategy"}, "eval");
    get(e, "n_samples", cfg.eval.n_samples);
    get(e, "max_len", cfg.eval.max_len);
    if (e.contains("strategy")) cfg.eval.strategy = parse_strategy(e["strategy"], "eval.strategy");
  }
  if (j.contains("trueput")) {
    const json& t = j["trueput"];
    check_keys(t,
               {"p", "latency", "t0", "per_sample", "k_max", "capacity_grid", "normalization",
                "grid", "budget_samples"},
               "trueput");
    get(t, "p", cfg.trueput.p);
    get(t, "latency", cfg.trueput.latency);
    get(t, "t0", cfg.trueput.t0);
    get(t, "per_sample", cfg.trueput.per_sample);
    get(t, "k_max", cfg.trueput.k_max);
    get(t, "capacity_grid", cfg.trueput.capacity_grid);
    get(t, "normalization", cfg.trueput.normalization);
    get(t, "budget_samples", cfg.trueput.budget_samples);
    if (t.contains("grid")) {
      cfg.trueput.grid.clear();
      for (const auto& s : t["grid"]) cfg.trueput.grid.push_back(parse_strategy(s, "trueput.grid"));
    }
    static const std::set<std::string> kLatencies = {"constant", "linear", "batched"};
    if (!kLatencies.contains(cfg.trueput.latency))
      throw config_error("unknown trueput.latency '" + cfg.trueput.latency + "'");
    if (cfg.trueput.normalization != "batch" && cfg.trueput.normalization != "per_design")
      throw config_error("trueput.normalization must be 'batch' or 'per_design'");
  }
  if (j.contains("decode")) {
    const json& d = j["decode"];
    check_keys(d,
               {"tree_sizes", "ceiling", "heads_depth", "learn_steps", "learn_lr", "max_len",
                "n_prompts"},
               "decode");
    get(d, "tree_sizes", cfg.decode.tree_sizes);
    get(d, "ceiling", cfg.decode.ceiling);
    get(d, "heads_depth", cfg.decode.heads_depth);
    get(d, "learn_steps", cfg.decode.learn_steps);
    get(d, "learn_lr", cfg.decode.learn_lr);
    get(d, "max_len", cfg.decode.max_len);
    get(d, "n_prompts", cfg.decode.n_prompts);
  }

  cfg.echo = j.dump(2) + "\n";
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

}  // namespace fedgen
