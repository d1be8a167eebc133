// Command-line surface for the MEKT toolkit: synthetic data generation,
// end-to-end adaptation runs, source ranking, and benchmark protocols.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "mekt/container.hpp"
#include "mekt/pipeline.hpp"

namespace {

using json = nlohmann::json;
using namespace mekt;

constexpr const char* kToolkitVersion = "1.0.0";

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

std::uint64_t fnv1a_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open " + path.string());
  }
  std::uint64_t hash = 1469598103934665603ull;
  char c;
  while (in.get(c)) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 1099511628211ull;
  }
  return hash;
}

std::string digest_hex(const std::filesystem::path& path) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a_digest(path)));
  return buf;
}

MeanKind parse_mean(const std::string& name) {
  if (name == "riemannian") return MeanKind::Riemannian;
  if (name == "euclidean") return MeanKind::Euclidean;
  if (name == "logeuclidean") return MeanKind::LogEuclidean;
  throw ConfigError("unknown mean kind: " + name);
}

std::optional<KernelConfig> parse_kernel(const std::string& spec) {
  if (spec == "none") return std::nullopt;
  if (spec == "linear") return KernelConfig{KernelKind::Linear, 1.0};
  if (spec.rfind("rbf:", 0) == 0) {
    const double width = std::stod(spec.substr(4));
    if (width <= 0.0) throw ConfigError("RBF width must be positive");
    return KernelConfig{KernelKind::Rbf, width};
  }
  throw ConfigError("unknown kernel spec: " + spec);
}

json config_json(const PipelineOptions& opts) {
  json j;
  j["mean"] = opts.mean == MeanKind::Riemannian    ? "riemannian"
              : opts.mean == MeanKind::Euclidean   ? "euclidean"
                                                   : "logeuclidean";
  j["alpha"] = opts.mekt.alpha;
  j["beta"] = opts.mekt.beta;
  j["rho"] = opts.mekt.rho;
  j["subspace_dim"] = opts.mekt.subspace_dim;
  j["iterations"] = opts.mekt.iterations;
  j["knn"] = opts.mekt.knn;
  j["sigma"] = opts.mekt.sigma;
  j["v_ridge"] = opts.mekt.v_ridge;
  j["mode"] = opts.mode == FeatureMode::TangentUpper ? "tangent" : "erp-block";
  j["select_k"] = opts.select_k;
  j["mmd"] = opts.mmd == MmdKind::Joint ? "joint" : "marginal-conditional";
  if (opts.kernel) {
    j["kernel"] = opts.kernel->kind == KernelKind::Linear
                      ? std::string("linear")
                      : "rbf:" + std::to_string(opts.kernel->width);
  } else {
    j["kernel"] = "none";
  }
  j["dte_norm"] = "entrywise";
  j["lda_shrinkage"] = "ledoit-wolf-auto";
  return j;
}

json diagnostics_json(const std::vector<IterationDiag>& diags) {
  json arr = json::array();
  for (const auto& d : diags) {
    arr.push_back({{"joint_mmd", d.joint_mmd},
                   {"objective", d.objective},
                   {"label_changes", d.label_changes}});
  }
  return arr;
}

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw FormatError("cannot write " + path.string());
  }
  out << j.dump(2) << "\n";
}

struct RunFlags {
  std::vector<std::string> source_paths;
  std::string target_path;
  std::string mean = "riemannian";
  PipelineOptions opts;
  std::string kernel = "none";
  std::string mode = "tangent";
  std::string mmd_name = "joint";
  std::string report = "run_report.json";
};

void add_run_flags(CLI::App* cmd, RunFlags& flags) {
  cmd->add_option("--source", flags.source_paths, "Source EEGB files")
      ->required()
      ->expected(-1);
  cmd->add_option("--target", flags.target_path, "Target EEGB file")->required();
  cmd->add_option("--mean", flags.mean, "Reference mean kind")
      ->check(CLI::IsMember({"riemannian", "euclidean", "logeuclidean"}));
  cmd->add_option("--alpha", flags.opts.mekt.alpha)->check(CLI::NonNegativeNumber);
  cmd->add_option("--beta", flags.opts.mekt.beta)->check(CLI::NonNegativeNumber);
  cmd->add_option("--rho", flags.opts.mekt.rho)->check(CLI::NonNegativeNumber);
  cmd->add_option("--dim", flags.opts.mekt.subspace_dim, "Subspace dimensionality")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--iters", flags.opts.mekt.iterations, "Refinement iterations")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--knn", flags.opts.mekt.knn)->check(CLI::PositiveNumber);
  cmd->add_option("--sigma", flags.opts.mekt.sigma)->check(CLI::PositiveNumber);
  cmd->add_option("--kernel", flags.kernel, "none | linear | rbf:<width>");
  cmd->add_option("--mode", flags.mode)->check(CLI::IsMember({"tangent", "erp-block"}));
  cmd->add_option("--erp-target-class", flags.opts.erp_target_class)
      ->check(CLI::PositiveNumber);
  cmd->add_option("--select-k", flags.opts.select_k, "ANOVA-F feature count (0 = off)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--mmd", flags.mmd_name, "joint | traditional")
      ->check(CLI::IsMember({"joint", "traditional"}));
  cmd->add_option("--report", flags.report, "Manifest output path");
}

struct LoadedRun {
  std::vector<DomainTrials> sources;
  DomainTrials target;
  json digests;
};

LoadedRun load_run_inputs(const RunFlags& flags) {
  LoadedRun loaded;
  loaded.digests = json::object();
  for (const auto& p : flags.source_paths) {
    loaded.sources.push_back(read_container(p));
    loaded.digests[p] = digest_hex(p);
  }
  loaded.target = read_container(flags.target_path);
  loaded.digests[flags.target_path] = digest_hex(flags.target_path);
  return loaded;
}

PipelineOptions finalize_options(RunFlags& flags) {
  flags.opts.mean = parse_mean(flags.mean);
  flags.opts.kernel = parse_kernel(flags.kernel);
  flags.opts.mode = flags.mode == "tangent" ? FeatureMode::TangentUpper
                                            : FeatureMode::ErpBlock;
  flags.opts.mmd = flags.mmd_name == "joint" ? MmdKind::Joint
                                                  : MmdKind::MarginalConditional;
  return flags.opts;
}

void write_labels(const std::vector<int>& labels,
                  const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw FormatError("cannot write " + path.string());
  }
  for (int y : labels) out << y << "\n";
}

int cmd_synth(const SynthConfig& cfg, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto domains = synth_domains(cfg);
  json manifest;
  manifest["toolkit_version"] = kToolkitVersion;
  manifest["seed"] = cfg.seed;
  manifest["config"] = {{"channels", cfg.channels},
                        {"samples", cfg.samples},
                        {"trials_per_class", cfg.trials_per_class},
                        {"classes", cfg.classes},
                        {"domains", cfg.n_domains},
                        {"domain_rotation_deg", cfg.domain_rotation_deg},
                        {"class_rotation_deg", cfg.class_rotation_deg},
                        {"noise_scale", cfg.noise_scale}};
  json files = json::object();
  for (const auto& domain : domains) {
    std::filesystem::path path =
        std::filesystem::path(out_dir) / (domain.subject_id + ".eegb");
    write_container(domain, path);
    files[path.string()] = digest_hex(path);
  }
  manifest["files"] = files;
  write_json(manifest, std::filesystem::path(out_dir) / "manifest.json");
  return 0;
}

int cmd_run(RunFlags& flags) {
  PipelineOptions opts = finalize_options(flags);
  LoadedRun loaded = load_run_inputs(flags);
  TaskResult result = run_mekt_task(loaded.sources, loaded.target, opts);

  json manifest;
  manifest["toolkit_version"] = kToolkitVersion;
  manifest["config"] = config_json(opts);
  manifest["inputs"] = loaded.digests;
  json task;
  json srcs = json::array();
  for (const auto& s : loaded.sources) srcs.push_back(s.subject_id);
  task["sources"] = srcs;
  task["target"] = loaded.target.subject_id;
  task["runtime_ms"] = result.runtime_ms;
  task["diagnostics"] = diagnostics_json(result.diagnostics);
  if (result.bca) task["bca"] = *result.bca;
  manifest["task"] = task;
  write_json(manifest, flags.report);

  std::filesystem::path labels_path = flags.report;
  labels_path.replace_extension(".labels");
  write_labels(result.predicted, labels_path);
  if (result.bca) {
    std::cout << "bca " << *result.bca << "\n";
  }
  std::cout << "report written to " << flags.report << "\n";
  return 0;
}

int cmd_dte(RunFlags& flags, int top, bool then_run) {
  PipelineOptions opts = finalize_options(flags);
  LoadedRun loaded = load_run_inputs(flags);

  std::vector<FeatureMatrix> features;
  FeatureMatrix target_features;
  {
    PreparedFeatures prepared =
        prepare_features(loaded.sources, loaded.target, opts);
    features = std::move(prepared.sources);
    target_features = std::move(prepared.target);
  }

  std::vector<TransferabilityScore> scores;
  for (const auto& f : features) {
    scores.push_back(transferability(f, target_features));
  }
  const int z = static_cast<int>(scores.size());
  const int z_star = top > 0 ? top : default_selection_count(z);
  if (z_star > z) {
    throw ConfigError("--top exceeds source count");
  }
  auto selected = select_sources(scores, z_star);

  json manifest;
  manifest["toolkit_version"] = kToolkitVersion;
  manifest["config"] = config_json(opts);
  manifest["inputs"] = loaded.digests;
  json ranking = json::array();
  for (const auto& s : scores) {
    ranking.push_back({{"source", s.source_id},
                       {"dis", s.dis},
                       {"dif", s.dif},
                       {"r", s.r}});
  }
  manifest["ranking"] = ranking;
  manifest["selected"] = selected;

  if (then_run) {
    std::vector<DomainTrials> chosen;
    for (const auto& id : selected) {
      for (const auto& src : loaded.sources) {
        if (src.subject_id == id) chosen.push_back(src);
      }
    }
    TaskResult result = run_mekt_task(chosen, loaded.target, opts);
    json task;
    task["sources"] = selected;
    task["target"] = loaded.target.subject_id;
    task["runtime_ms"] = result.runtime_ms;
    task["diagnostics"] = diagnostics_json(result.diagnostics);
    if (result.bca) task["bca"] = *result.bca;
    manifest["task"] = task;
  }
  write_json(manifest, flags.report);
  for (const auto& s : selected) std::cout << s << "\n";
  return 0;
}

int cmd_bench(const std::string& dataset_dir, const std::string& protocol_name,
              const std::string& method_name, RunFlags& flags) {
  PipelineOptions opts = finalize_options(flags);
  BenchProtocol protocol =
      protocol_name == "sts" ? BenchProtocol::Sts : BenchProtocol::Mts;
  BenchMethod method = parse_bench_method(method_name);

  std::vector<DomainTrials> domains;
  json digests = json::object();
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dataset_dir)) {
    if (entry.path().extension() == ".eegb") paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) {
    domains.push_back(read_container(p));
    if (!domains.back().labels) {
      throw ConfigError("bench requires labels in every file: " + p.string());
    }
    digests[p.string()] = digest_hex(p);
  }
  if (domains.size() < 2) {
    throw ConfigError("bench requires at least 2 domains");
  }

  auto tasks = bench_tasks(static_cast<int>(domains.size()), protocol);
  std::vector<BenchRow> rows;
  for (const auto& task : tasks) {
    rows.push_back(run_bench_task(domains, task, method, opts));
  }

  double sum = 0.0;
  for (const auto& row : rows) sum += row.bca;
  const double mean_bca = sum / rows.size();
  double var = 0.0;
  for (const auto& row : rows) var += (row.bca - mean_bca) * (row.bca - mean_bca);
  const double std_bca = rows.size() > 1 ? std::sqrt(var / (rows.size() - 1)) : 0.0;

  std::filesystem::path csv_path = flags.report;
  csv_path.replace_extension(".csv");
  std::ofstream csv(csv_path);
  if (!csv) {
    throw FormatError("cannot write " + csv_path.string());
  }
  csv << "task_id,sources,target,method,bca,runtime_ms,iterations,seed\n";
  for (const auto& row : rows) {
    std::string srcs;
    for (size_t i = 0; i < row.sources.size(); ++i) {
      if (i) srcs += "+";
      srcs += row.sources[i];
    }
    csv << row.task_id << "," << srcs << "," << row.target << "," << method_name
        << "," << row.bca << "," << row.runtime_ms << "," << row.iterations
        << ",0\n";
  }

  json manifest;
  manifest["toolkit_version"] = kToolkitVersion;
  manifest["config"] = config_json(opts);
  manifest["inputs"] = digests;
  manifest["protocol"] = protocol_name;
  manifest["method"] = method_name;
  json jrows = json::array();
  for (const auto& row : rows) {
    jrows.push_back({{"task_id", row.task_id},
                     {"sources", row.sources},
                     {"target", row.target},
                     {"bca", row.bca},
                     {"runtime_ms", row.runtime_ms},
                     {"iterations", row.iterations}});
  }
  manifest["tasks"] = jrows;
  manifest["aggregate"] = {{"mean_bca", mean_bca}, {"std_bca", std_bca}};
  write_json(manifest, flags.report);
  std::cout << "mean_bca " << mean_bca << " std_bca " << std_bca << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Manifold embedded knowledge transfer toolkit"};
  app.require_subcommand(1);

  // synth
  SynthConfig synth_cfg;
  std::string out_dir = "synth_data";
  auto* synth = app.add_subcommand("synth", "Generate synthetic shifted domains");
  synth->add_option("--seed", synth_cfg.seed);
  synth->add_option("--channels", synth_cfg.channels)->check(CLI::PositiveNumber);
  synth->add_option("--samples", synth_cfg.samples)->check(CLI::PositiveNumber);
  synth->add_option("--trials", synth_cfg.trials_per_class, "Trials per class")
      ->check(CLI::PositiveNumber);
  synth->add_option("--classes", synth_cfg.classes)->check(CLI::Range(2, 1000));
  synth->add_option("--domains", synth_cfg.n_domains)->check(CLI::PositiveNumber);
  synth->add_option("--domain-rot", synth_cfg.domain_rotation_deg);
  synth->add_option("--class-rot", synth_cfg.class_rotation_deg);
  synth->add_option("--noise", synth_cfg.noise_scale)->check(CLI::NonNegativeNumber);
  synth->add_option("--out-dir", out_dir);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "Run the adaptation pipeline");
  add_run_flags(run, run_flags);

  RunFlags dte_flags;
  int dte_top = 0;
  bool then_run = false;
  auto* dte = app.add_subcommand("dte", "Rank source domains by transferability");
  add_run_flags(dte, dte_flags);
  dte->add_option("--top", dte_top, "Number of sources to keep (0 = round((z-1)/2))")
      ->check(CLI::NonNegativeNumber);
  dte->add_flag("--then-run", then_run, "Run the pipeline on the selected subset");

  RunFlags bench_flags;
  std::string dataset_dir, protocol = "mts", method = "mekt";
  auto* bench = app.add_subcommand("bench", "Benchmark protocols over a dataset");
  bench->add_option("--dataset-dir", dataset_dir)->required();
  bench->add_option("--protocol", protocol)->check(CLI::IsMember({"sts", "mts"}));
  bench->add_option("--method", method)
      ->check(CLI::IsMember({"mekt", "ca", "ea", "ra-mdm", "csp-lda"}));
  bench->add_option("--mean", bench_flags.mean)
      ->check(CLI::IsMember({"riemannian", "euclidean", "logeuclidean"}));
  bench->add_option("--alpha", bench_flags.opts.mekt.alpha)->check(CLI::NonNegativeNumber);
  bench->add_option("--beta", bench_flags.opts.mekt.beta)->check(CLI::NonNegativeNumber);
  bench->add_option("--rho", bench_flags.opts.mekt.rho)->check(CLI::NonNegativeNumber);
  bench->add_option("--dim", bench_flags.opts.mekt.subspace_dim)->check(CLI::PositiveNumber);
  bench->add_option("--iters", bench_flags.opts.mekt.iterations)->check(CLI::PositiveNumber);
  bench->add_option("--mmd", bench_flags.mmd_name)
      ->check(CLI::IsMember({"joint", "traditional"}));
  bench->add_option("--report", bench_flags.report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_cfg, out_dir);
    if (run->parsed()) return cmd_run(run_flags);
    if (dte->parsed()) return cmd_dte(dte_flags, dte_top, then_run);
    if (bench->parsed())
      return cmd_bench(dataset_dir, protocol, method, bench_flags);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const UnsupportedVersion& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
