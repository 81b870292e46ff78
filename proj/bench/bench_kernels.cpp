// Compares the OpenMP kernels against their serial reference implementations
// and reports wall time plus the maximum result deviation for each pair.

#include <chrono>
#include <cmath>
#include <cstdio>

#include "fedgen/dataset.hpp"
#include "fedgen/eval.hpp"
#include "fedgen/model.hpp"

using namespace fedgen;
using Clock = std::chrono::steady_clock;

namespace {

template <typename F>
double time_ms(F&& fn, int reps) {
  fn();  // warm up
  const auto start = Clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto stop = Clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

void bench_gradient(const ToyModel& model, const ClientDataset& data, int reps) {
  ParamVector par, ser;
  const double t_par = time_ms([&] { par = ce_gradient(model, data); }, reps);
  const double t_ser = time_ms([&] { ser = serial::ce_gradient(model, data); }, reps);
  double gap = 0.0;
  for (std::size_t i = 0; i < par.values.size(); ++i)
    gap = std::max(gap, std::fabs(par.values[i] - ser.values[i]));
  std::printf("ce_gradient   %8zu samples  parallel %8.3f ms  serial %8.3f ms  speedup %5.2fx  max diff %g\n",
              data.samples.size(), t_par, t_ser, t_ser / t_par, gap);
}

void bench_evaluate(const ToyModel& model, const ClientDataset& data, const GrammarSpec& g,
                    int n_samples, int reps) {
  EvalReport par, ser;
  SamplingStrategy greedy;
  const double t_par = time_ms([&] { par = evaluate(model, data, g, n_samples, greedy, 7); }, reps);
  const double t_ser =
      time_ms([&] { ser = serial::evaluate(model, data, g, n_samples, greedy, 7); }, reps);
  const double gap = std::max(std::fabs(par.syntax_accuracy - ser.syntax_accuracy),
                              std::fabs(par.semantic_accuracy - ser.semantic_accuracy));
  std::printf("evaluate      %8d samples  parallel %8.3f ms  serial %8.3f ms  speedup %5.2fx  max diff %g\n",
              n_samples, t_par, t_ser, t_ser / t_par, gap);
}

}  // namespace

int main() {
  Vocab v = default_vocab(3);
  GrammarSpec g = default_grammar(v, 6);
  ToyModel model = ToyModel::gaussian_init(v, 3, 0.5, 1);

  for (int n : {1000, 10000, 100000}) {
    CorpusSpec spec;
    spec.n_groups = 4;
    spec.samples_per_group = n / 4;
    spec.seed = 2;
    ClientDataset data;
    for (auto& ds : make_corpus(v, g, spec))
      for (auto& s : ds.samples) data.samples.push_back(std::move(s));
    bench_gradient(model, data, n >= 100000 ? 3 : 10);
    bench_evaluate(model, data, g, n / 10, n >= 100000 ? 3 : 10);
  }
  return 0;
}
