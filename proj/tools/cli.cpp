#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "mmdopt/bench.hpp"
#include "mmdopt/criticism.hpp"
#include "mmdopt/datasets.hpp"
#include "mmdopt/error.hpp"
#include "mmdopt/estimators.hpp"
#include "mmdopt/experiments.hpp"
#include "mmdopt/nulldist.hpp"
#include "mmdopt/selection.hpp"

namespace mmdopt::cli {

namespace {

using Json = nlohmann::ordered_json;

struct Global {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string output;
  std::string format;
};

struct KernelFlags {
  std::optional<double> sigma;
  std::vector<double> ard_weights;
  std::string kernel_file;
  bool median = false;
};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

Json json_number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open '" + path + "' for writing");
  f << content;
  if (!f.flush()) throw DataError("failed writing '" + path + "'");
}

class Emitter {
 public:
  Emitter(const Global& g, std::ostream& out) : g_(g), out_(out) {}

  std::string format(std::string_view fallback, std::initializer_list<std::string_view> allowed) const {
    const std::string f = g_.format.empty() ? std::string(fallback) : g_.format;
    if (std::ranges::find(allowed, f) == allowed.end()) {
      throw std::invalid_argument("--format " + f + " is not supported by this command");
    }
    return f;
  }

  void emit(const std::string& content) const {
    if (g_.output.empty() || g_.output == "-") {
      out_ << content;
    } else {
      write_file(g_.output, content);
    }
  }

  void emit(const Json& j) const { emit(j.dump(2) + "\n"); }

 private:
  const Global& g_;
  std::ostream& out_;
};

Json header(std::string_view command) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  return j;
}

Json kernel_json(const KernelSpec& s) {
  Json j;
  j["kind"] = s.kind == KernelKind::rbf ? "rbf" : "ard-rbf";
  j["bandwidth"] = s.bandwidth();
  j["log_bandwidth"] = s.log_bandwidth;
  if (s.kind == KernelKind::ard_rbf) {
    j["weights"] = s.weights();
    j["log_weights"] = s.log_weights;
  }
  return j;
}

KernelSpec kernel_from_json(const Json& doc) {
  const Json& j = doc.contains("kernel") ? doc.at("kernel") : doc;
  const std::string kind = j.value("kind", "rbf");
  if (kind != "rbf" && kind != "ard-rbf") throw DataError("unknown kernel kind '" + kind + "'");
  double log_bandwidth = 0;
  if (j.contains("log_bandwidth")) {
    log_bandwidth = j.at("log_bandwidth").get<double>();
  } else if (j.contains("bandwidth")) {
    log_bandwidth = std::log(j.at("bandwidth").get<double>());
  } else {
    throw DataError("kernel file needs 'log_bandwidth' or 'bandwidth'");
  }
  KernelSpec s;
  if (kind == "ard-rbf") {
    if (j.contains("log_weights")) {
      s.kind = KernelKind::ard_rbf;
      s.log_weights = j.at("log_weights").get<std::vector<double>>();
    } else if (j.contains("weights")) {
      s = KernelSpec::ard(1.0, j.at("weights").get<std::vector<double>>());
    } else {
      throw DataError("ard-rbf kernel file needs 'log_weights' or 'weights'");
    }
  }
  s.log_bandwidth = log_bandwidth;
  s.validate();
  return s;
}

KernelSpec read_kernel_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open kernel file '" + path + "'");
  try {
    return kernel_from_json(Json::parse(f));
  } catch (const Json::exception& e) {
    throw DataError("bad kernel file '" + path + "': " + e.what());
  }
}

void add_kernel_flags(CLI::App* cmd, KernelFlags& k) {
  auto* sigma = cmd->add_option("--sigma", k.sigma, "RBF bandwidth");
  auto* median = cmd->add_flag("--median", k.median, "median-heuristic bandwidth (default)");
  auto* file = cmd->add_option("--kernel", k.kernel_file, "kernel JSON file");
  cmd->add_option("--ard-weights", k.ard_weights, "per-dimension ARD weights")->delimiter(',')->excludes(file);
  sigma->excludes(median)->excludes(file);
  median->excludes(file);
}

KernelSpec resolve_kernel(const KernelFlags& k, const Dataset& x, const Dataset& y, std::uint64_t seed) {
  KernelSpec s;
  if (!k.kernel_file.empty()) {
    s = read_kernel_file(k.kernel_file);
  } else {
    const double sigma = k.sigma ? *k.sigma : median_heuristic(x, y, kDefaultMedianCap, seed);
    s = k.ard_weights.empty() ? KernelSpec::rbf(sigma) : KernelSpec::ard(sigma, k.ard_weights);
  }
  s.validate(x.cols());
  return s;
}

struct DataFlags {
  std::string x, y;
  std::string data_format;
};

void add_data_flags(CLI::App* cmd, DataFlags& d) {
  cmd->add_option("--x", d.x, "first sample")->required();
  cmd->add_option("--y", d.y, "second sample")->required();
  cmd->add_option("--data-format", d.data_format, "csv or bin (default: from extension)")
      ->check(CLI::IsMember({"csv", "bin"}));
}

DataFormat data_format(const std::string& flag, const std::string& path) {
  if (flag.empty()) return format_for_path(path);
  return flag == "bin" ? DataFormat::bin : DataFormat::csv;
}

Dataset load(const std::string& path, const std::string& flag) { return read_dataset(path, data_format(flag, path)); }

Json test_json(const TestResult& r, const KernelSpec& spec) {
  Json j;
  j["statistic"] = r.statistic;
  j["threshold"] = r.threshold;
  j["p_value"] = r.p_value;
  j["reject"] = r.reject;
  j["alpha"] = r.alpha;
  j["B"] = r.permutations;
  j["m"] = r.m;
  j["mmd2"] = r.mmd2;
  j["kernel"] = kernel_json(spec);
  j["seed"] = r.seed;
  return j;
}

// gen ----------------------------------------------------------------------

struct GenArgs {
  std::string kind;
  double epsilon = 6.0;
  std::size_t m = 500;
  std::size_t d = 2;
  std::size_t grid_size = 5;
  double spacing = 10.0;
  std::string x_out, y_out, data_format;
};

void run_gen(const GenArgs& a, const Global& g, const Emitter& em) {
  em.format("json", {"json"});
  SamplePair pair;
  if (a.kind == "blobs") {
    pair = blobs_generate({a.epsilon, a.grid_size, a.spacing, a.m, g.seed});
  } else {
    pair = gauss_vs_laplace(a.m, a.d, g.seed);
  }
  write_dataset(pair.x, a.x_out, data_format(a.data_format, a.x_out));
  write_dataset(pair.y, a.y_out, data_format(a.data_format, a.y_out));
  Json j = header("gen");
  j["kind"] = a.kind;
  j["m"] = a.m;
  j["d"] = pair.x.cols();
  if (a.kind == "blobs") {
    j["epsilon"] = a.epsilon;
    j["grid_size"] = a.grid_size;
    j["spacing"] = a.spacing;
  }
  j["seed"] = g.seed;
  j["x"] = a.x_out;
  j["y"] = a.y_out;
  em.emit(j);
}

// test ---------------------------------------------------------------------

struct TestArgs {
  DataFlags data;
  KernelFlags kernel;
  double alpha = 0.1;
  std::size_t perms = 1000;
};

void run_test(const TestArgs& a, const Global& g, const Emitter& em) {
  const std::string fmt = em.format("json", {"json", "csv"});
  const Dataset x = load(a.data.x, a.data.data_format);
  const Dataset y = load(a.data.y, a.data.data_format);
  const KernelSpec spec = resolve_kernel(a.kernel, x, y, g.seed);
  const TestResult r = two_sample_test(x, y, spec, a.alpha, a.perms, g.seed, g.threads);
  if (fmt == "csv") {
    std::ostringstream s;
    s << "statistic,threshold,p_value,reject,alpha,B,m,mmd2,bandwidth,seed\n"
      << num(r.statistic) << ',' << num(r.threshold) << ',' << num(r.p_value) << ',' << (r.reject ? 1 : 0) << ','
      << num(r.alpha) << ',' << r.permutations << ',' << r.m << ',' << num(r.mmd2) << ',' << num(spec.bandwidth())
      << ',' << r.seed << '\n';
    em.emit(s.str());
    return;
  }
  Json j = header("test");
  j.update(test_json(r, spec));
  em.emit(j);
}

// select -------------------------------------------------------------------

struct SelectArgs {
  DataFlags data;
  std::string criterion = "max-t";
  bool median = false;
  std::optional<double> grid_center, grid_min, grid_max;
  std::size_t grid_count = 30;
  double grid_factor = 32.0;
  double alpha = 0.1;
  std::size_t perms = 1000;
  std::optional<double> train_fraction;
  std::string csv;
};

std::string candidates_csv(const SelectionReport& r) {
  std::ostringstream s;
  s << "index,bandwidth,mmd2,variance,t_stat,power_estimate,chosen\n";
  for (std::size_t i = 0; i < r.candidates.size(); ++i) {
    const CandidateScore& c = r.candidates[i];
    s << i << ',' << num(c.spec.bandwidth()) << ',' << num(c.mmd2) << ',' << num(c.variance) << ','
      << num(c.t_stat) << ',' << num(c.power_estimate) << ',' << (i == r.chosen ? 1 : 0) << '\n';
  }
  return s.str();
}

void run_select(const SelectArgs& a, const Global& g, const Emitter& em) {
  const std::string fmt = em.format("json", {"json", "csv"});
  const Dataset x = load(a.data.x, a.data.data_format);
  const Dataset y = load(a.data.y, a.data.data_format);
  check_pair(KernelSpec{}, x, y);

  std::optional<TrainTestSplit> split;
  if (a.train_fraction) split = split_train_test(x, y, *a.train_fraction, g.seed);
  const Dataset& xs = split ? split->x_train : x;
  const Dataset& ys = split ? split->y_train : y;

  SelectionOptions opt;
  opt.alpha = a.alpha;
  opt.permutations = a.perms;
  opt.seed = g.seed;
  opt.threads = g.threads;

  SelectionReport report;
  std::vector<KernelSpec> grid;
  if (a.median) {
    report = median_select(xs, ys, opt);
  } else {
    const Criterion c = parse_criterion(a.criterion);
    if (c == Criterion::median) throw std::invalid_argument("use --median for the median heuristic");
    if (a.grid_min || a.grid_max) {
      if (!a.grid_min || !a.grid_max) throw std::invalid_argument("--grid-min and --grid-max go together");
      grid = log_bandwidth_grid(*a.grid_min, *a.grid_max, a.grid_count);
    } else {
      const double center = a.grid_center ? *a.grid_center : median_heuristic(xs, ys, kDefaultMedianCap, g.seed);
      grid = bandwidth_grid(center, a.grid_count, a.grid_factor);
    }
    report = grid_select(xs, ys, grid, c, opt);
  }

  const std::string table = candidates_csv(report);
  if (!a.csv.empty()) write_file(a.csv, table);
  if (fmt == "csv") {
    em.emit(table);
    return;
  }

  Json j = header("select");
  j["criterion"] = to_string(report.criterion);
  j["chosen"] = report.chosen;
  j["kernel"] = kernel_json(report.chosen_spec());
  j["split_seed"] = report.split_seed;
  j["alpha"] = a.alpha;
  j["m"] = xs.rows();
  Json cands = Json::array();
  for (const CandidateScore& c : report.candidates) {
    Json row;
    row["bandwidth"] = c.spec.bandwidth();
    row["log_bandwidth"] = c.spec.log_bandwidth;
    row["mmd2"] = c.mmd2;
    row["variance"] = c.variance;
    row["t_stat"] = c.t_stat;
    row["power_estimate"] = json_number(c.power_estimate);
    cands.push_back(std::move(row));
  }
  j["candidates"] = std::move(cands);
  if (split) {
    j["train_fraction"] = *a.train_fraction;
    const TestResult r =
        two_sample_test(split->x_test, split->y_test, report.chosen_spec(), a.alpha, a.perms, g.seed, g.threads);
    Json held = test_json(r, report.chosen_spec());
    held.erase("kernel");
    j["held_out"] = std::move(held);
  }
  em.emit(j);
}

// train --------------------------------------------------------------------

struct TrainArgs {
  DataFlags data;
  KernelFlags kernel;
  bool ard = false;
  TrainConfig cfg;
  std::optional<std::size_t> batch_size;
  std::string trace;
};

void run_train(TrainArgs a, const Global& g, const Emitter& em) {
  const std::string fmt = em.format("json", {"json", "csv"});
  const Dataset x = load(a.data.x, a.data.data_format);
  const Dataset y = load(a.data.y, a.data.data_format);
  KernelSpec init = resolve_kernel(a.kernel, x, y, g.seed);
  if (a.ard && init.kind == KernelKind::rbf) init = KernelSpec::ard_from(init, x.cols());
  a.cfg.seed = g.seed;
  a.cfg.batch_size = a.batch_size ? *a.batch_size : std::min<std::size_t>(500, std::min(x.rows(), y.rows()));
  const TrainResult r = train_ard(x, y, init, a.cfg);

  std::ostringstream trace;
  trace << "iteration,t_stat\n";
  for (std::size_t i = 0; i < r.trace.size(); ++i) trace << i << ',' << num(r.trace[i]) << '\n';
  if (!a.trace.empty()) write_file(a.trace, trace.str());
  if (fmt == "csv") {
    em.emit(trace.str());
    return;
  }

  const EstimatorOutput before = estimate(gram_bundle(init, x, y), a.cfg.floor);
  const EstimatorOutput after = estimate(gram_bundle(r.spec, x, y), a.cfg.floor);
  Json j = header("train");
  j["kernel"] = kernel_json(r.spec);
  j["initial_kernel"] = kernel_json(init);
  j["iterations"] = a.cfg.iterations;
  j["learning_rate"] = a.cfg.learning_rate;
  j["batch_size"] = a.cfg.batch_size;
  j["seed"] = g.seed;
  j["initial_t_stat"] = before.t_stat;
  j["final_t_stat"] = after.t_stat;
  em.emit(j);
}

// power-curve --------------------------------------------------------------

struct PowerArgs {
  std::vector<double> epsilons{1, 2, 4, 6, 8, 10};
  std::vector<std::string> methods{"median", "max-mmd", "max-t", "best"};
  std::size_t reps = 100;
  BlobsProtocol protocol;
  double grid_min = 0.1;
  double grid_max = 100.0;
  std::size_t grid_count = 30;
  std::string choices;
  bool progress = false;
};

void run_power_curve(PowerArgs a, const Global& g, const Emitter& em, std::ostream& err) {
  em.format("csv", {"csv"});
  a.protocol.methods.clear();
  for (const std::string& m : a.methods) a.protocol.methods.push_back(parse_method(m));
  a.protocol.grid = log_bandwidth_grid(a.grid_min, a.grid_max, a.grid_count);
  a.protocol.threads = g.threads;
  TrialCallback cb;
  if (a.progress) {
    cb = [&](double eps, std::size_t rep) { err << "epsilon " << num(eps) << " run " << rep + 1 << '\n'; };
  }
  const PowerCurve curve = power_curve(a.protocol, a.epsilons, a.reps, g.seed, cb);

  std::ostringstream s;
  s << "epsilon,method,rejection_rate,stderr\n";
  for (const PowerCurveRow& r : curve.rows) {
    s << num(r.epsilon) << ',' << to_string(r.method) << ',' << num(r.rejection_rate) << ',' << num(r.stderr_) << '\n';
  }
  if (!a.choices.empty()) {
    std::ostringstream c;
    c << "epsilon,rep,method,bandwidth,reject\n";
    for (const ChoiceRow& r : curve.choices) {
      c << num(r.epsilon) << ',' << r.rep << ',' << to_string(r.method) << ',' << num(r.bandwidth) << ','
        << (r.reject ? 1 : 0) << '\n';
    }
    write_file(a.choices, c.str());
  }
  em.emit(s.str());
}

// witness ------------------------------------------------------------------

struct WitnessArgs {
  DataFlags data;
  KernelFlags kernel;
  std::string probes;
  std::string labels;
  std::size_t top = 5;
  std::string extremes;
};

std::vector<int> read_labels(const std::string& path, std::size_t expected) {
  const Dataset d = read_dataset(path, DataFormat::csv);
  if (d.cols() != 1 || d.rows() != expected) {
    throw DataError("labels file '" + path + "' must hold one 0/1 value per probe");
  }
  std::vector<int> out;
  out.reserve(expected);
  for (double v : d.values()) {
    if (v != 0.0 && v != 1.0) throw DataError("labels file '" + path + "' holds a value other than 0 or 1");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

void run_witness(const WitnessArgs& a, const Global& g, const Emitter& em) {
  const std::string fmt = em.format("csv", {"csv", "json"});
  const Dataset x = load(a.data.x, a.data.data_format);
  const Dataset y = load(a.data.y, a.data.data_format);
  const Dataset probes = load(a.probes, a.data.data_format);
  const KernelSpec spec = resolve_kernel(a.kernel, x, y, g.seed);
  std::vector<int> labels;
  if (!a.labels.empty()) labels = read_labels(a.labels, probes.rows());
  const WitnessReport r = witness_report(spec, x, y, probes, std::min(a.top, probes.rows()), labels);

  Json ex = header("witness");
  ex["kernel"] = kernel_json(spec);
  ex["top"] = r.top_positive.size();
  ex["top_positive"] = r.top_positive;
  ex["top_negative"] = r.top_negative;
  ex["mean_gap"] = r.mean_gap ? json_number(*r.mean_gap) : Json(nullptr);
  if (!a.extremes.empty()) write_file(a.extremes, ex.dump(2) + "\n");

  if (fmt == "json") {
    ex["values"] = r.values;
    em.emit(ex);
    return;
  }
  std::ostringstream s;
  s << "index,witness\n";
  for (std::size_t i = 0; i < r.values.size(); ++i) s << i << ',' << num(r.values[i]) << '\n';
  em.emit(s.str());
}

// bench / audit ------------------------------------------------------------

struct BenchArgs {
  std::vector<std::size_t> sizes{2000};
  std::vector<std::string> variants{"optimized"};
  BenchOptions options;
};

void run_bench_cmd(BenchArgs a, const Global& g, const Emitter& em) {
  const std::string fmt = em.format("csv", {"csv", "json"});
  a.options.variants.clear();
  for (const std::string& v : a.variants) a.options.variants.push_back(parse_variant(v));
  a.options.seed = g.seed;
  const BenchRun run = run_bench_sizes(a.sizes, a.options, g.seed);
  if (fmt == "csv") {
    std::ostringstream s;
    write_bench_csv(s, run.records);
    em.emit(s.str());
    return;
  }
  Json j = header("bench");
  j["outputs_agree"] = run.outputs_agree;
  Json cells = Json::array();
  for (const BenchSummary& c : summarize(run.records)) {
    Json row;
    row["m"] = c.m;
    row["B"] = c.permutations;
    row["threads"] = c.threads;
    row["variant"] = to_string(c.variant);
    row["reps"] = c.reps;
    row["mean_seconds"] = c.mean_seconds;
    row["min_seconds"] = c.min_seconds;
    cells.push_back(std::move(row));
  }
  j["cells"] = std::move(cells);
  em.emit(j);
}

struct AuditArgs {
  std::size_t m = 50;
  std::size_t rounds = 4;
  std::string variant = "optimized";
};

void run_audit(const AuditArgs& a, const Global& g, const Emitter& em) {
  em.format("json", {"json"});
  const AccessAudit r = cache_profile(a.m, a.rounds, parse_variant(a.variant), g.seed);
  Json j = header("audit");
  j["variant"] = to_string(r.variant);
  j["m"] = a.m;
  j["rounds"] = r.rounds;
  j["reads"] = r.reads;
  j["monotone"] = r.monotone;
  j["max_reads_per_entry"] = r.max_reads_per_entry;
  j["statistics_match"] = r.statistics_match;
  j["passed"] = r.monotone && r.max_reads_per_entry <= 1 && r.statistics_match;
  em.emit(j);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Power-optimized kernel two-sample testing", "mmdopt"};
  app.require_subcommand(1);
  app.fallthrough();

  Global g;
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--threads", g.threads, "worker threads for null sampling")->check(CLI::PositiveNumber);
  app.add_option("--output", g.output, "output path (default: stdout)");
  app.add_option("--format", g.format, "json or csv (default depends on command)")
      ->check(CLI::IsMember({"json", "csv"}));

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic sample pair");
  gen_cmd->add_option("kind", gen.kind, "blobs or gauss-laplace")
      ->required()
      ->check(CLI::IsMember({"blobs", "gauss-laplace"}));
  gen_cmd->add_option("--epsilon", gen.epsilon, "Blobs eigenvalue ratio");
  gen_cmd->add_option("--m", gen.m, "sample size")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--d", gen.d, "dimension (gauss-laplace)")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--grid-size", gen.grid_size, "Blobs grid size")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--spacing", gen.spacing, "Blobs center spacing");
  gen_cmd->add_option("--x-out", gen.x_out, "path for X")->required();
  gen_cmd->add_option("--y-out", gen.y_out, "path for Y")->required();
  gen_cmd->add_option("--data-format", gen.data_format, "csv or bin (default: from extension)")
      ->check(CLI::IsMember({"csv", "bin"}));

  TestArgs test;
  auto* test_cmd = app.add_subcommand("test", "permutation two-sample test");
  add_data_flags(test_cmd, test.data);
  add_kernel_flags(test_cmd, test.kernel);
  test_cmd->add_option("--alpha", test.alpha, "test level");
  test_cmd->add_option("--perms", test.perms, "permutation count B");

  SelectArgs sel;
  auto* sel_cmd = app.add_subcommand("select", "choose an RBF bandwidth");
  add_data_flags(sel_cmd, sel.data);
  auto* crit = sel_cmd->add_option("--criterion", sel.criterion, "max-mmd, max-t or max-power");
  sel_cmd->add_flag("--median", sel.median, "median heuristic instead of a grid")->excludes(crit);
  sel_cmd->add_option("--grid-center", sel.grid_center, "grid center (default: median heuristic)");
  sel_cmd->add_option("--grid-count", sel.grid_count, "grid size")->check(CLI::PositiveNumber);
  sel_cmd->add_option("--grid-factor", sel.grid_factor, "grid spans center/factor .. center*factor");
  sel_cmd->add_option("--grid-min", sel.grid_min, "explicit grid lower end");
  sel_cmd->add_option("--grid-max", sel.grid_max, "explicit grid upper end");
  sel_cmd->add_option("--alpha", sel.alpha, "test level");
  sel_cmd->add_option("--perms", sel.perms, "permutation count B");
  sel_cmd->add_option("--train-fraction", sel.train_fraction, "select on a split and test on the rest");
  sel_cmd->add_option("--csv", sel.csv, "write the candidate table here");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "gradient ascent of the t-statistic");
  add_data_flags(train_cmd, train.data);
  add_kernel_flags(train_cmd, train.kernel);
  train_cmd->add_flag("--ard", train.ard, "learn per-dimension weights");
  train_cmd->add_option("--learning-rate", train.cfg.learning_rate, "step size on log-parameters");
  train_cmd->add_option("--iterations", train.cfg.iterations, "iteration count");
  train_cmd->add_option("--batch-size", train.batch_size, "minibatch size (default min(500, m))");
  train_cmd->add_option("--floor", train.cfg.floor, "variance floor");
  train_cmd->add_option("--trace", train.trace, "write the objective trace CSV here");

  PowerArgs pc;
  auto* pc_cmd = app.add_subcommand("power-curve", "Blobs rejection rate versus epsilon");
  pc_cmd->add_option("--epsilons", pc.epsilons, "epsilon values")->delimiter(',');
  pc_cmd->add_option("--methods", pc.methods, "median,max-mmd,max-t,max-power,best")->delimiter(',');
  pc_cmd->add_option("--reps", pc.reps, "runs per epsilon")->check(CLI::PositiveNumber);
  pc_cmd->add_option("--m", pc.protocol.m, "test-half sample size");
  pc_cmd->add_option("--alpha", pc.protocol.alpha, "test level");
  pc_cmd->add_option("--perms", pc.protocol.permutations, "permutations per test");
  pc_cmd->add_option("--selection-perms", pc.protocol.selection_permutations, "permutations per max-power candidate");
  pc_cmd->add_option("--grid-min", pc.grid_min, "smallest grid bandwidth");
  pc_cmd->add_option("--grid-max", pc.grid_max, "largest grid bandwidth");
  pc_cmd->add_option("--grid-count", pc.grid_count, "grid size");
  pc_cmd->add_option("--choices", pc.choices, "write per-run bandwidth choices here");
  pc_cmd->add_flag("--progress", pc.progress, "report each run on stderr");

  WitnessArgs wit;
  auto* wit_cmd = app.add_subcommand("witness", "witness function on probe points");
  add_data_flags(wit_cmd, wit.data);
  add_kernel_flags(wit_cmd, wit.kernel);
  wit_cmd->add_option("--probes", wit.probes, "probe points")->required();
  wit_cmd->add_option("--labels", wit.labels, "CSV of 0/1 probe groups");
  wit_cmd->add_option("--top", wit.top, "extreme count");
  wit_cmd->add_option("--extremes", wit.extremes, "write extreme indices JSON here");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "time the null samplers");
  bench_cmd->add_option("--sizes", bench.sizes, "sample sizes m")->delimiter(',');
  bench_cmd->add_option("--perms", bench.options.permutations, "permutations B");
  bench_cmd->add_option("--thread-list", bench.options.threads, "thread counts")->delimiter(',');
  bench_cmd->add_option("--variants", bench.variants, "optimized,naive")->delimiter(',');
  bench_cmd->add_option("--reps", bench.options.reps, "timed repetitions")->check(CLI::PositiveNumber);
  bench_cmd->add_flag("!--no-warmup", bench.options.warmup, "skip the untimed warm-up run");

  AuditArgs audit;
  auto* audit_cmd = app.add_subcommand("audit", "check the sampler's memory access order");
  audit_cmd->add_option("--m", audit.m, "sample size");
  audit_cmd->add_option("--rounds", audit.rounds, "permutation rounds");
  audit_cmd->add_option("--variant", audit.variant, "optimized or naive");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  const Emitter em(g, out);
  try {
    if (gen_cmd->parsed()) run_gen(gen, g, em);
    if (test_cmd->parsed()) run_test(test, g, em);
    if (sel_cmd->parsed()) run_select(sel, g, em);
    if (train_cmd->parsed()) run_train(train, g, em);
    if (pc_cmd->parsed()) run_power_curve(pc, g, em, err);
    if (wit_cmd->parsed()) run_witness(wit, g, em);
    if (bench_cmd->parsed()) run_bench_cmd(bench, g, em);
    if (audit_cmd->parsed()) run_audit(audit, g, em);
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kOk;
}

}  // namespace mmdopt::cli
