#include "pardpp/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pardpp/errors.hpp"
#include "pardpp/rng.hpp"
#include "pardpp/samplers.hpp"
#include "pardpp/validation.hpp"

namespace pardpp {
namespace {

using Json = nlohmann::ordered_json;

// Bad flag combinations discovered after parsing; exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelFlags {
  std::string model;
  std::string matrix;
  int k = -1;
  std::string partition;

  void attach(CLI::App* cmd) {
    cmd->add_option("--model", model, "Model description (JSON)");
    cmd->add_option("--matrix", matrix, "Ensemble matrix file");
    cmd->add_option("--k", k, "Cardinality constraint (with --matrix)");
    cmd->add_option("--partition", partition, "Partition constraint, e.g. 0,1|2,3:1,1");
  }

  std::shared_ptr<const DppModel> load() const {
    if (model.empty() == matrix.empty()) {
      throw UsageError("exactly one of --model and --matrix is required");
    }
    if (!model.empty()) {
      if (k >= 0 || !partition.empty()) {
        throw UsageError("--k and --partition apply to --matrix only");
      }
      return load_model(model);
    }
    if (k >= 0 && !partition.empty()) throw UsageError("--k and --partition are exclusive");
    Constraint c;
    if (k >= 0) c = Constraint::cardinality(k);
    if (!partition.empty()) c = parse_partition(partition);
    return DppModel::make(EnsembleMatrix(read_matrix_file(matrix)), std::move(c));
  }
};

struct SampleFlags {
  std::string sampler = "auto";
  std::int64_t samples = 1;
  std::uint64_t seed = 0;
  double eps = 0.05;
  double c = 0.1;
  int workers = 1;
  std::string out = "-";
  bool timing = false;

  void attach(CLI::App* cmd, bool with_sampler) {
    if (with_sampler) {
      cmd->add_option("--sampler", sampler, "sequential|batched-sym|ei|filtered|auto")
          ->capture_default_str();
      cmd->add_option("--eps", eps, "TV target of approximate samplers")->capture_default_str();
      cmd->add_option("--c", c, "Batch exponent of the entropic sampler")->capture_default_str();
    }
    cmd->add_option("--samples", samples, "Number of samples")->capture_default_str();
    cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
    cmd->add_option("--workers", workers, "Concurrent proposal evaluators")
        ->capture_default_str();
    cmd->add_option("--out", out, "Output path, - for stdout")->capture_default_str();
    cmd->add_flag("--timing", timing, "Add wall time to records");
  }
};

ElementSet parse_index_list(const std::string& text) {
  ElementSet out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw UsageError("bad index '" + item + "'");
    }
    if (used != item.size()) throw UsageError("bad index '" + item + "'");
    out.push_back(v);
  }
  return normalized(std::move(out));
}

// The invocation without flags that cannot change the output.
std::string command_echo(const std::vector<std::string>& args) {
  std::string echo;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--timing") continue;
    if (a == "--workers" || a == "--out") {
      ++i;
      continue;
    }
    if (a.rfind("--workers=", 0) == 0 || a.rfind("--out=", 0) == 0) continue;
    if (!echo.empty()) echo += ' ';
    echo += a;
  }
  return echo;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

void append_double(std::string& bytes, double v) {
  char raw[sizeof(double)];
  std::memcpy(raw, &v, sizeof raw);
  bytes.append(raw, sizeof raw);
}

void append_int(std::string& bytes, std::int64_t v) {
  bytes += std::to_string(v);
  bytes += ';';
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (path != "-") {
      file_.open(path);
      if (!file_) throw UsageError("cannot open output file " + path);
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

Json meter_json(Json record, const RoundMeter& meter) {
  record["adaptive_rounds"] = meter.adaptive_rounds;
  record["proposal_work"] = meter.proposal_work;
  record["max_width"] = meter.max_width;
  return record;
}

int cmd_sample(const ModelFlags& mf, const SampleFlags& sf, const std::string& echo,
               std::ostream& out) {
  if (sf.samples < 0) throw UsageError("--samples must be nonnegative");
  SamplerKind kind;
  try {
    kind = parse_sampler_kind(sf.sampler);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const auto model = mf.load();
  SamplerConfig config;
  config.seed = sf.seed;
  config.eps = sf.eps;
  config.c = sf.c;
  config.workers = sf.workers;
  try {
    config.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  Sampler sampler(model, kind, config);
  const std::string digest = model_digest(*model);
  Output sink(sf.out, out);
  bool failed = false;
  for (std::int64_t i = 0; i < sf.samples; ++i) {
    const std::uint64_t sample_seed = derive_key(sf.seed, {static_cast<std::uint64_t>(i)});
    const auto start = std::chrono::steady_clock::now();
    const SampleResult r = sampler.draw(sample_seed);
    const auto stop = std::chrono::steady_clock::now();
    Json rec;
    rec["command"] = echo;
    rec["index"] = i;
    rec["seed"] = sf.seed;
    rec["sample_seed"] = sample_seed;
    rec["model_digest"] = digest;
    rec["sampler"] = std::string(to_string(sampler.resolved_kind()));
    rec["sample"] = r.sample;
    rec = meter_json(std::move(rec), r.meter);
    rec["status"] = std::string(to_string(r.status));
    if (r.status != SampleStatus::kExact) rec["eps"] = r.eps;
    if (!r.message.empty()) rec["message"] = r.message;
    if (sf.timing) {
      rec["wall_time_ms"] = std::chrono::duration<double, std::milli>(stop - start).count();
    }
    *sink << rec.dump() << '\n';
    failed = failed || r.status == SampleStatus::kFailed;
  }
  return failed ? kExitRuntime : kExitOk;
}

int cmd_count(const ModelFlags& mf, const std::string& given, std::ostream& out) {
  const ElementSet t = parse_index_list(given);
  const auto model = mf.load();
  for (int i : t) {
    if (i < 0 || i >= model->ground_size()) throw UsageError("--given index out of range");
  }
  out << std::setprecision(12) << model->count(t) << '\n';
  return kExitOk;
}

int cmd_tv(const ModelFlags& mf, const std::string& samples_file, double slack,
           std::ostream& out) {
  std::ifstream in(samples_file);
  if (!in) throw UsageError("cannot open samples file " + samples_file);
  std::vector<ElementSet> samples;
  std::int64_t failed = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto rec = nlohmann::json::parse(line);
      if (rec.value("status", std::string("exact")) == "failed") {
        ++failed;
        continue;
      }
      samples.push_back(normalized(rec.at("sample").get<ElementSet>()));
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("samples file line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (samples.empty()) throw UsageError("samples file holds no samples");
  const auto model = mf.load();
  for (const auto& s : samples) {
    for (int i : s) {
      if (i < 0 || i >= model->ground_size()) throw UsageError("sample index out of range");
    }
  }
  const ExactDistribution exact = brute_force_distribution(*model);
  const ExactDistribution empirical = empirical_distribution(samples);
  CriterionReport report;
  report.name = "tv";
  report.measured = tv_distance(empirical, exact);
  const double tolerance = statistical_tv_tolerance(static_cast<double>(exact.support.size()),
                                                    static_cast<double>(samples.size()));
  report.threshold = tolerance + slack;
  report.pass = report.measured <= report.threshold;
  Json j = Json::parse(to_json(report).dump());
  j["samples"] = samples.size();
  j["failed_records"] = failed;
  j["support"] = exact.support.size();
  j["statistical_tolerance"] = tolerance;
  j["slack"] = slack;
  j["model_digest"] = model_digest(*model);
  out << j.dump() << '\n';
  return kExitOk;
}

int cmd_planar(const std::string& graph_path, const std::string& mode, const SampleFlags& sf,
               const std::string& echo, std::ostream& out) {
  if (mode != "count" && mode != "sample") throw UsageError("--mode must be count or sample");
  const PlanarGraph graph = read_graph_file(graph_path);
  if (mode == "count") {
    out << std::fixed << std::setprecision(0) << count_matchings(graph) << '\n';
    return kExitOk;
  }
  if (sf.samples < 0) throw UsageError("--samples must be nonnegative");
  MatchingSampler sampler(graph);
  const std::string digest = graph_digest(graph);
  Output sink(sf.out, out);
  for (std::int64_t i = 0; i < sf.samples; ++i) {
    const std::uint64_t sample_seed = derive_key(sf.seed, {static_cast<std::uint64_t>(i)});
    const auto start = std::chrono::steady_clock::now();
    const MatchingSample m = sampler.draw(sample_seed);
    const auto stop = std::chrono::steady_clock::now();
    Json rec;
    rec["command"] = echo;
    rec["index"] = i;
    rec["seed"] = sf.seed;
    rec["sample_seed"] = sample_seed;
    rec["model_digest"] = digest;
    Json edges = Json::array();
    for (const auto& [u, v] : m.edges) edges.push_back({u, v});
    rec["edges"] = edges;
    rec = meter_json(std::move(rec), m.meter);
    rec["status"] = "exact";
    if (sf.timing) {
      rec["wall_time_ms"] = std::chrono::duration<double, std::milli>(stop - start).count();
    }
    *sink << rec.dump() << '\n';
  }
  return kExitOk;
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string model_digest(const DppModel& model) {
  std::string bytes;
  const Matrix& m = model.ensemble().matrix();
  append_int(bytes, m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) append_double(bytes, m(i, j));
  }
  const Constraint& c = model.constraint();
  bytes += std::string(to_string(c.type));
  append_int(bytes, c.k);
  for (const auto& block : c.blocks) {
    bytes += '|';
    for (int v : block) append_int(bytes, v);
  }
  bytes += ':';
  for (int q : c.quotas) append_int(bytes, q);
  return hex64(fnv1a(bytes));
}

std::string graph_digest(const PlanarGraph& graph) {
  std::ostringstream s;
  write_graph(s, graph, true);
  return hex64(fnv1a(s.str()));
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Parallel sampling for determinantal point processes and planar matchings",
               "pardpp"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand");

  ModelFlags sample_model;
  SampleFlags sample_flags;
  auto* sample = app.add_subcommand("sample", "Draw samples as JSONL run records");
  sample_model.attach(sample);
  sample_flags.attach(sample, true);

  ModelFlags count_model;
  std::string given;
  auto* count = app.add_subcommand("count", "Print the count of supersets of --given");
  count_model.attach(count);
  count->add_option("--given", given, "Comma-separated indices");

  ModelFlags tv_model;
  std::string samples_file;
  double slack = 0.0;
  auto* tv = app.add_subcommand("tv", "TV distance between samples and the exact distribution");
  tv_model.attach(tv);
  tv->add_option("--samples-file", samples_file, "JSONL run records")->required();
  tv->add_option("--slack", slack, "Added to the statistical tolerance")->capture_default_str();

  std::string graph_path;
  std::string mode = "count";
  SampleFlags planar_flags;
  auto* planar = app.add_subcommand("planar", "Count or sample perfect matchings");
  planar->add_option("--graph", graph_path, "Graph file")->required();
  planar->add_option("--mode", mode, "count|sample")->capture_default_str();
  planar_flags.attach(planar, false);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  const std::string echo = command_echo(args);
  try {
    if (*sample) return cmd_sample(sample_model, sample_flags, echo, out);
    if (*count) return cmd_count(count_model, given, out);
    if (*tv) return cmd_tv(tv_model, samples_file, slack, out);
    if (*planar) return cmd_planar(graph_path, mode, planar_flags, echo, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace pardpp
