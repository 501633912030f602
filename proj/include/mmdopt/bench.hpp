#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "mmdopt/kernels.hpp"
#include "mmdopt/nulldist.hpp"

namespace mmdopt {

std::string_view to_string(SamplerVariant v);
SamplerVariant parse_variant(std::string_view name);

struct BenchRecord {
  std::size_t m = 0;
  std::size_t permutations = 0;
  std::size_t threads = 1;
  SamplerVariant variant = SamplerVariant::optimized;
  std::size_t rep = 0;
  double wall_seconds = 0;
};

struct BenchOptions {
  std::size_t permutations = 200;
  std::vector<std::size_t> threads{1};
  std::vector<SamplerVariant> variants{SamplerVariant::optimized};
  std::size_t reps = 3;
  std::uint64_t seed = 0;
  bool warmup = true;
};

struct BenchRun {
  std::vector<BenchRecord> records;
  /// Every timed run of the cell produced the same null samples (across
  /// variants and thread counts).
  bool outputs_agree = true;
};

/// Times null sampling on a prebuilt joint Gram; Gram construction is never
/// inside the timed region. Naive runs ignore the thread count and are only
/// timed once per rep at threads = 1.
BenchRun run_bench(const JointGram& k, const BenchOptions& options);

/// Builds a Gaussian-vs-Laplace joint Gram (RBF, unit bandwidth, 2-D) for
/// each size and benchmarks it.
BenchRun run_bench_sizes(std::span<const std::size_t> sizes, const BenchOptions& options, std::uint64_t data_seed);

struct BenchSummary {
  std::size_t m = 0;
  std::size_t permutations = 0;
  std::size_t threads = 1;
  SamplerVariant variant = SamplerVariant::optimized;
  double mean_seconds = 0;
  double min_seconds = 0;
  std::size_t reps = 0;
};

std::vector<BenchSummary> summarize(std::span<const BenchRecord> records);

/// CSV with header m,B,threads,variant,rep,wall_seconds.
void write_bench_csv(std::ostream& out, std::span<const BenchRecord> records);

/// Result of replaying sampler rounds through an instrumented Gram reader.
struct AccessAudit {
  SamplerVariant variant = SamplerVariant::optimized;
  std::size_t rounds = 0;
  std::size_t reads = 0;            // total reads over all rounds
  bool monotone = true;             // addresses nondecreasing within every round
  std::size_t max_reads_per_entry = 0;
  bool statistics_match = true;     // audited rounds reproduce the sampler output
};

/// Audits the access pattern of `rounds` rounds of a sampler on a random
/// Gaussian-vs-Laplace problem of size m.
AccessAudit cache_profile(std::size_t m, std::size_t rounds, SamplerVariant variant, std::uint64_t seed = 0);

}  // namespace mmdopt
