#include "fedgen/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedgen/rng.hpp"

namespace fedgen {

namespace {

// Largest-remainder rounding of n * shares; counts sum to n exactly.
std::vector<std::size_t> apportion(std::size_t n, const std::vector<double>& shares) {
  const std::size_t m = shares.size();
  std::vector<std::size_t> counts(m);
  std::vector<std::pair<double, std::size_t>> remainders(m);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < m; ++i) {
    double exact = static_cast<double>(n) * shares[i];
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[i];
    remainders[i] = {exact - std::floor(exact), i};
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) counts[remainders[i].second] += 1;
  return counts;
}

}  // namespace

PartitionResult partition_dirichlet(const std::vector<ClientDataset>& pool, double alpha,
                                    int n_clients, std::uint64_t seed) {
  if (pool.empty()) throw data_error("partition_dirichlet: empty pool");
  if (alpha <= 0.0) throw config_error("alpha must be > 0");
  if (n_clients < 1) throw config_error("n_clients must be >= 1");

  std::size_t total = 0;
  for (const auto& ds : pool) total += ds.samples.size();

  PartitionResult result;
  result.plan.alpha = alpha;
  result.plan.n_clients = n_clients;
  result.plan.seed = seed;
  result.plan.assignment.resize(total, -1);
  result.infeasible = static_cast<std::size_t>(n_clients) > total;
  result.clients.resize(static_cast<std::size_t>(n_clients));
  for (int c = 0; c < n_clients; ++c)
    result.clients[static_cast<std::size_t>(c)].group_tag = "client" + std::to_string(c);

  std::size_t base = 0;  // global index of the group's first sample
  for (std::size_t g = 0; g < pool.size(); ++g) {
    const std::size_t n = pool[g].samples.size();
    Rng rng = Rng(seed).derive(0xD112, g);

    std::vector<double> shares(static_cast<std::size_t>(n_clients));
    double sum = 0.0;
    for (auto& s : shares) {
      s = rng.next_gamma(alpha);
      sum += s;
    }
    for (auto& s : shares) s /= sum;
    std::vector<std::size_t> counts = apportion(n, shares);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng = Rng(seed).derive(0xD113, g);
    shuffle_rng.shuffle(order);

    std::size_t cursor = 0;
    for (int c = 0; c < n_clients; ++c) {
      for (std::size_t j = 0; j < counts[static_cast<std::size_t>(c)]; ++j, ++cursor) {
        const std::size_t local = order[cursor];
        result.plan.assignment[base + local] = c;
        result.clients[static_cast<std::size_t>(c)].samples.push_back(pool[g].samples[local]);
      }
    }
    base += n;
  }
  return result;
}

GroupSplit partition_groups(int n_clients, int n_groups, int n_isolated, std::uint64_t seed) {
  if (n_groups < 0 || n_isolated < 0) throw config_error("group sizes must be nonnegative");
  if (n_groups + n_isolated < 1) throw config_error("need at least one group or isolated client");
  if (n_groups + n_isolated > n_clients)
    throw config_error("infeasible split: n_groups + n_isolated exceeds client count");
  if (n_groups == 0 && n_isolated != n_clients)
    throw config_error("with no groups, every client must be isolated");

  std::vector<int> order(static_cast<std::size_t>(n_clients));
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng(seed).derive(0x62);
  rng.shuffle(order);

  GroupSplit split;
  split.isolated.assign(order.begin(), order.begin() + n_isolated);
  split.groups.resize(static_cast<std::size_t>(n_groups));
  for (int i = n_isolated; i < n_clients; ++i)
    split.groups[static_cast<std::size_t>((i - n_isolated) % n_groups)].push_back(
        order[static_cast<std::size_t>(i)]);
  return split;
}

std::vector<std::map<std::string, int>> tag_histograms(const std::vector<ClientDataset>& pool,
                                                       const PartitionPlan& plan) {
  std::vector<std::map<std::string, int>> hist(static_cast<std::size_t>(plan.n_clients));
  std::size_t idx = 0;
  for (const auto& ds : pool)
    for (std::size_t j = 0; j < ds.samples.size(); ++j, ++idx)
      hist[static_cast<std::size_t>(plan.assignment[idx])][ds.group_tag] += 1;
  return hist;
}

double entropy(const std::vector<double>& weights) {
  double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (sum <= 0.0) return 0.0;
  double h = 0.0;
  for (double w : weights) {
    if (w <= 0.0) continue;
    double p = w / sum;
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace fedgen
