#pragma once

#include <string>
#include <vector>

#include "fedgen/fed.hpp"
#include "fedgen/ledger.hpp"
#include "fedgen/merge.hpp"

namespace fedgen {

struct HierarchyConfig {
  std::vector<std::vector<int>> groups;  // client indices per FL group
  std::vector<int> isolated;             // client indices trained locally
  FLConfig fl_cfg;
  int local_epochs = 1;  // per isolated client; callers usually set R * epochs
  MergeConfig merge_cfg;
  ToyModel init;
};

struct StageSnapshot {
  std::string stage;  // "group0", "isolated17", ...
  ToyModel model;
  double raw_score = 0.0;
  double weight = 0.0;
};

struct HierarchyResult {
  ToyModel global;
  CommLedger ledger;
  std::vector<StageSnapshot> audit;
  std::vector<std::vector<RoundRecord>> group_records;
  std::vector<MergeRow> merge_report;
};

// Tier 1: FL inside each group plus local training on isolated clients.
// Tier 2: one central merge of the G + N_L tier-1 models, charged to the
// ledger as exactly G + N_L central transfers.
HierarchyResult run_hierarchy(const std::vector<ClientDataset>& clients, const HierarchyConfig& cfg);

struct FlatResult {
  ToyModel model;
  CommLedger ledger;
  std::vector<RoundRecord> records;
};

// Single-group FL where every participant upload is a central transfer; the
// ledger baseline the hierarchy is compared against.
FlatResult run_flat_fl(const std::vector<ClientDataset>& clients, const ToyModel& init,
                       const FLConfig& cfg);

}  // namespace fedgen
