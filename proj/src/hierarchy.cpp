#include "fedgen/hierarchy.hpp"

#include <set>

#include "fedgen/rng.hpp"

namespace fedgen {

namespace {

void validate(const std::vector<ClientDataset>& clients, const HierarchyConfig& cfg) {
  if (clients.empty()) throw config_error("run_hierarchy: no clients");
  if (cfg.groups.empty() && cfg.isolated.empty())
    throw config_error("run_hierarchy: need at least one group or isolated client");
  std::set<int> seen;
  auto claim = [&](int c) {
    if (c < 0 || c >= static_cast<int>(clients.size()))
      throw config_error("run_hierarchy: client index out of range");
    if (!seen.insert(c).second) throw config_error("run_hierarchy: client assigned twice");
  };
  for (const auto& g : cfg.groups) {
    if (g.empty()) throw config_error("run_hierarchy: empty group");
    for (int c : g) claim(c);
  }
  for (int c : cfg.isolated) claim(c);
}

}  // namespace

HierarchyResult run_hierarchy(const std::vector<ClientDataset>& clients,
                              const HierarchyConfig& cfg) {
  validate(clients, cfg);

  HierarchyResult result;
  result.ledger.bytes_per_transfer = cfg.init.params.values.size() * sizeof(double);

  const std::size_t n_groups = cfg.groups.size();
  const std::size_t n_units = n_groups + cfg.isolated.size();
  std::vector<ToyModel> tier1(n_units, cfg.init);
  std::vector<std::size_t> unit_sizes(n_units, 0);
  result.group_records.resize(n_groups);
  std::vector<CommLedger> group_ledgers(n_groups);

  // Tier 1. Groups and isolated clients are independent units of work; each
  // unit derives its own seed so results do not depend on scheduling.
#pragma omp parallel for schedule(dynamic)
  for (long long u = 0; u < static_cast<long long>(n_units); ++u) {
    const std::size_t i = static_cast<std::size_t>(u);
    if (i < n_groups) {
      std::vector<ClientDataset> group;
      for (int c : cfg.groups[i]) group.push_back(clients[static_cast<std::size_t>(c)]);
      FLConfig fl = cfg.fl_cfg;
      fl.seed = derive_seed(cfg.fl_cfg.seed, i);
      FLResult r = run_fl(group, cfg.init, fl, group_ledgers[i], TransferChannel::group);
      tier1[i] = std::move(r.model);
      result.group_records[i] = std::move(r.records);
      for (const auto& ds : group) unit_sizes[i] += ds.samples.size();
    } else {
      const int c = cfg.isolated[i - n_groups];
      const ClientDataset& ds = clients[static_cast<std::size_t>(c)];
      tier1[i] = train_local(cfg.init, ds, cfg.local_epochs, cfg.fl_cfg.lr,
                             derive_seed(cfg.fl_cfg.seed, 0x150 + static_cast<std::uint64_t>(c)));
      unit_sizes[i] = ds.samples.size();
    }
  }
  for (const CommLedger& gl : group_ledgers) result.ledger.group_transfers += gl.group_transfers;

  // Tier 2: one central merge of all tier-1 models.
  std::vector<double> scores(n_units);
  for (std::size_t i = 0; i < n_units; ++i)
    scores[i] = score(cfg.merge_cfg.metric, tier1[i], unit_sizes[i]);
  result.ledger.central_transfers += n_units;

  bool all_zero = true;
  for (double s : scores) all_zero = all_zero && s == 0.0;
  if (all_zero && cfg.fl_cfg.zero_score_fallback == ZeroScoreFallback::uniform)
    scores.assign(n_units, 1.0);

  result.global = cfg.merge_cfg.method == MergeMethod::dare
                      ? merge_dare(tier1, scores, cfg.merge_cfg, &result.merge_report)
                      : merge_weighted(tier1, scores, &result.merge_report);

  std::vector<double> weights = normalize_scores(scores);
  for (std::size_t i = 0; i < n_units; ++i) {
    StageSnapshot snap;
    snap.stage = i < n_groups ? "group" + std::to_string(i)
                              : "isolated" + std::to_string(cfg.isolated[i - n_groups]);
    snap.model = tier1[i];
    snap.raw_score = scores[i];
    snap.weight = weights[i];
    result.audit.push_back(std::move(snap));
  }
  return result;
}

FlatResult run_flat_fl(const std::vector<ClientDataset>& clients, const ToyModel& init,
                       const FLConfig& cfg) {
  if (clients.empty()) throw config_error("run_flat_fl: no clients");
  FlatResult result{init, {}, {}};
  FLResult r = run_fl(clients, init, cfg, result.ledger, TransferChannel::central);
  result.model = std::move(r.model);
  result.records = std::move(r.records);
  return result;
}

}  // namespace fedgen
