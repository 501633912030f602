#include "mmdopt/bench.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>

#include "mmdopt/datasets.hpp"
#include "mmdopt/detail/permutation_rounds.hpp"
#include "mmdopt/estimators.hpp"

namespace mmdopt {

std::string_view to_string(SamplerVariant v) { return v == SamplerVariant::optimized ? "optimized" : "naive"; }

SamplerVariant parse_variant(std::string_view name) {
  if (name == "optimized") return SamplerVariant::optimized;
  if (name == "naive") return SamplerVariant::naive;
  throw std::invalid_argument("unknown sampler variant '" + std::string(name) + "'");
}

BenchRun run_bench(const JointGram& k, const BenchOptions& options) {
  if (k.m < 4) throw std::invalid_argument("benchmark sizes must be at least 4");
  if (options.permutations == 0 || options.reps == 0) throw std::invalid_argument("need permutations and reps");
  BenchRun run;
  std::vector<double> reference;

  auto timed = [&](SamplerVariant variant, std::size_t threads, std::size_t rep) {
    const auto start = std::chrono::steady_clock::now();
    NullSamples null = sample_null(variant, k, options.permutations, options.seed, threads);
    const auto stop = std::chrono::steady_clock::now();
    if (reference.empty()) {
      reference = null.values;
    } else if (null.values != reference) {
      run.outputs_agree = false;
    }
    const double seconds = std::chrono::duration<double>(stop - start).count();
    run.records.push_back({k.m, options.permutations, threads, variant, rep, seconds});
  };

  for (SamplerVariant variant : options.variants) {
    std::vector<std::size_t> thread_counts = options.threads;
    if (variant == SamplerVariant::naive) thread_counts = {1};
    for (std::size_t threads : thread_counts) {
      if (threads == 0) throw std::invalid_argument("thread count must be positive");
      if (options.warmup) {
        (void)sample_null(variant, k, std::min<std::size_t>(options.permutations, 4), options.seed, threads);
      }
      for (std::size_t rep = 0; rep < options.reps; ++rep) timed(variant, threads, rep);
    }
  }
  return run;
}

BenchRun run_bench_sizes(std::span<const std::size_t> sizes, const BenchOptions& options, std::uint64_t data_seed) {
  BenchRun all;
  for (std::size_t m : sizes) {
    if (m < 4) throw std::invalid_argument("benchmark sizes must be at least 4");
    JointGram k;
    {
      const SamplePair data = gauss_vs_laplace(m, 2, data_seed);
      k = joint_gram(KernelSpec::rbf(1.0), data.x, data.y);
    }
    BenchRun run = run_bench(k, options);
    all.outputs_agree = all.outputs_agree && run.outputs_agree;
    all.records.insert(all.records.end(), run.records.begin(), run.records.end());
  }
  return all;
}

std::vector<BenchSummary> summarize(std::span<const BenchRecord> records) {
  std::map<std::tuple<std::size_t, std::size_t, std::size_t, int>, BenchSummary> cells;
  for (const BenchRecord& r : records) {
    auto& s = cells[{r.m, r.permutations, r.threads, static_cast<int>(r.variant)}];
    if (s.reps == 0) {
      s = BenchSummary{r.m, r.permutations, r.threads, r.variant, 0.0, r.wall_seconds, 0};
    }
    s.mean_seconds += r.wall_seconds;
    s.min_seconds = std::min(s.min_seconds, r.wall_seconds);
    ++s.reps;
  }
  std::vector<BenchSummary> out;
  for (auto& [key, s] : cells) {
    s.mean_seconds /= static_cast<double>(s.reps);
    out.push_back(s);
  }
  return out;
}

void write_bench_csv(std::ostream& out, std::span<const BenchRecord> records) {
  out << "m,B,threads,variant,rep,wall_seconds\n";
  for (const BenchRecord& r : records) {
    out << r.m << ',' << r.permutations << ',' << r.threads << ',' << to_string(r.variant) << ',' << r.rep << ','
        << r.wall_seconds << '\n';
  }
}

namespace {

// Records the flat offset of every read, per round.
struct AuditReader {
  const double* data;
  std::size_t n;
  std::vector<std::size_t>* log;

  double load(std::size_t a, std::size_t b) const {
    log->push_back(a * n + b);
    return data[a * n + b];
  }
};

}  // namespace

AccessAudit cache_profile(std::size_t m, std::size_t rounds, SamplerVariant variant, std::uint64_t seed) {
  if (m < 2 || rounds == 0) throw std::invalid_argument("audit needs m >= 2 and at least one round");
  const SamplePair data = gauss_vs_laplace(m, 2, seed);
  const JointGram k = joint_gram(KernelSpec::rbf(1.0), data.x, data.y);
  const std::size_t n = k.pooled();
  const NullSamples expected = sample_null(variant, k, rounds, seed);

  AccessAudit audit;
  audit.variant = variant;
  audit.rounds = rounds;
  std::vector<std::size_t> log;
  std::vector<std::uint32_t> counts(n * n);
  std::vector<std::uint32_t> perm(n);
  detail::RoundLabels labels(n);
  std::vector<double> copy;
  const AuditReader reader{k.k.data(), n, &log};

  for (std::size_t b = 0; b < rounds; ++b) {
    log.clear();
    detail::round_permutation(seed, b, perm);
    FixedTotal numerator = 0;
    if (variant == SamplerVariant::optimized) {
      labels.assign(perm);
      detail::batched_rounds(reader, n, std::span<const detail::RoundLabels>(&labels, 1),
                             std::span<FixedTotal>(&numerator, 1));
    } else {
      numerator = detail::materialized_round(reader, perm, copy);
    }
    if (mmd2_from_numerator(numerator, k.m) != expected.values[b]) audit.statistics_match = false;

    std::ranges::fill(counts, 0u);
    for (std::size_t i = 0; i < log.size(); ++i) {
      if (i > 0 && log[i] < log[i - 1]) audit.monotone = false;
      audit.max_reads_per_entry = std::max<std::size_t>(audit.max_reads_per_entry, ++counts[log[i]]);
    }
    audit.reads += log.size();
  }
  return audit;
}

}  // namespace mmdopt
