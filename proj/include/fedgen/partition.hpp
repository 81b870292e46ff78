#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fedgen/model.hpp"

namespace fedgen {

struct PartitionPlan {
  double alpha = 1.0;
  int n_clients = 0;
  std::uint64_t seed = 0;
  // global sample index (pool concatenation order) -> client index
  std::vector<int> assignment;
};

struct PartitionResult {
  std::vector<ClientDataset> clients;
  PartitionPlan plan;
  bool infeasible = false;  // more clients than samples; empty clients allowed
};

// For each group tag, client shares are drawn from Dirichlet(alpha) via
// normalized Gamma draws and converted to counts by largest-remainder
// rounding, so the sample multiset is conserved exactly.
PartitionResult partition_dirichlet(const std::vector<ClientDataset>& pool, double alpha,
                                    int n_clients, std::uint64_t seed);

struct GroupSplit {
  std::vector<std::vector<int>> groups;
  std::vector<int> isolated;
};

// Seeded shuffle, then the first n_isolated clients are isolated and the rest
// go round-robin into n_groups groups.
GroupSplit partition_groups(int n_clients, int n_groups, int n_isolated, std::uint64_t seed);

// Per-client histogram of originating group tags, for manifests and
// heterogeneity measurements.
std::vector<std::map<std::string, int>> tag_histograms(const std::vector<ClientDataset>& pool,
                                                       const PartitionPlan& plan);

double entropy(const std::vector<double>& weights);  // natural log, 0 ln 0 = 0

}  // namespace fedgen
