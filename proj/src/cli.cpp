#include "dage/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string_view>

#include <CLI11.hpp>
#include <json.hpp>

#include "dage/checks.hpp"
#include "dage/dataset.hpp"
#include "dage/error.hpp"
#include "dage/runner.hpp"
#include "dage/serialize.hpp"

namespace dage {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Config grammar. One JSON document drives every command:
//
//   {
//     "method": "dage-lda" | "ccsa" | "dsne" | "nem",
//     "data": { "source_csv": "...", "target_csv": "..." }
//           | { "synthetic": { class_count, dim, per_class, separation,
//                              within_std, rotation_deg, translation, scale,
//                              seed } },
//     "protocol": { "kind": "rectified" | "traditional", test_fraction,
//                   n_source_per_class, n_target_per_class, ratio_same,
//                   ratio_diff, test_seed, run_seeds: [..] },
//     "train": { d, learning_rate, momentum, epochs, batch_pairs,
//                beta, gamma | ratio_da_ce, ratio_st,
//                epsilon, nu, k, sigma, l2 },
//     "out_dir": "...", "jobs": N, "baseline": true|false
//   }
//
// Unknown keys anywhere are rejected. `--set a.b.c=value` rewrites the
// document before conversion; dedicated flags (--out, --protocol, --jobs)
// are applied last and therefore win.
// ---------------------------------------------------------------------------

[[noreturn]] void bad_config(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::InvalidConfig, where + ": " + what);
}

void reject_unknown(const json& j, const std::string& where,
                    std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) bad_config(where, "expected an object");
  for (const auto& item : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](std::string_view a) { return a == item.key(); });
    if (!known) bad_config(where, "unknown key '" + item.key() + "'");
  }
}

double num_or(const json& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) bad_config(where, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

int int_or(const json& j, const char* key, int fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) {
    bad_config(where, std::string("'") + key + "' must be an integer");
  }
  return v.get<int>();
}

std::uint64_t seed_or(const json& j, const char* key, std::uint64_t fallback,
                      const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                 v.get<std::int64_t>() < 0)) {
    bad_config(where, std::string("'") + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

bool bool_or(const json& j, const char* key, bool fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean()) bad_config(where, std::string("'") + key + "' must be a boolean");
  return v.get<bool>();
}

std::string str_or(const json& j, const char* key, const std::string& fallback,
                   const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) bad_config(where, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> dim_vector(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) bad_config(where, "expected a number or an array of numbers");
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number()) bad_config(where, "expected a number or an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

ShiftSpec shift_spec_from_json(const json& j) {
  const std::string where = "data.synthetic";
  reject_unknown(j, where,
                 {"class_count", "dim", "per_class", "separation", "within_std",
                  "rotation_deg", "translation", "scale", "seed"});
  ShiftSpec spec;
  spec.class_count = int_or(j, "class_count", spec.class_count, where);
  spec.dim = int_or(j, "dim", spec.dim, where);
  spec.per_class = int_or(j, "per_class", spec.per_class, where);
  spec.separation = num_or(j, "separation", spec.separation, where);
  spec.within_std = num_or(j, "within_std", spec.within_std, where);
  spec.rotation_deg = num_or(j, "rotation_deg", spec.rotation_deg, where);
  if (j.contains("translation")) {
    spec.translation = dim_vector(j.at("translation"), where + ".translation");
  }
  if (j.contains("scale")) spec.scale = dim_vector(j.at("scale"), where + ".scale");
  spec.seed = seed_or(j, "seed", spec.seed, where);
  return spec;
}

void protocol_from_json(const json& j, ExperimentConfig& cfg) {
  const std::string where = "protocol";
  reject_unknown(j, where,
                 {"kind", "test_fraction", "n_source_per_class", "n_target_per_class",
                  "ratio_same", "ratio_diff", "test_seed", "run_seeds"});
  const std::string kind = str_or(j, "kind", cfg.protocol, where);
  if (kind != "rectified" && kind != "traditional") {
    bad_config(where, "'kind' must be 'rectified' or 'traditional', got '" + kind + "'");
  }
  cfg.protocol = kind;
  cfg.params.test_fraction = num_or(j, "test_fraction", cfg.params.test_fraction, where);
  cfg.params.n_source_per_class =
      int_or(j, "n_source_per_class", cfg.params.n_source_per_class, where);
  cfg.params.n_target_per_class =
      int_or(j, "n_target_per_class", cfg.params.n_target_per_class, where);
  cfg.params.ratio_same = int_or(j, "ratio_same", cfg.params.ratio_same, where);
  cfg.params.ratio_diff = int_or(j, "ratio_diff", cfg.params.ratio_diff, where);
  cfg.params.test_seed = seed_or(j, "test_seed", cfg.params.test_seed, where);
  if (j.contains("run_seeds")) {
    const json& seeds = j.at("run_seeds");
    if (!seeds.is_array() || seeds.empty()) {
      bad_config(where, "'run_seeds' must be a non-empty array of non-negative integers");
    }
    cfg.run_seeds.clear();
    for (const json& s : seeds) {
      if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
        bad_config(where, "'run_seeds' must hold non-negative integers");
      }
      cfg.run_seeds.push_back(s.get<std::uint64_t>());
    }
  }
}

void train_from_json(const json& j, TrainConfig& train) {
  const std::string where = "train";
  reject_unknown(j, where,
                 {"d", "learning_rate", "momentum", "epochs", "batch_pairs", "beta",
                  "gamma", "ratio_da_ce", "ratio_st", "epsilon", "nu", "k", "sigma", "l2"});
  train.d = int_or(j, "d", train.d, where);
  train.learning_rate = num_or(j, "learning_rate", train.learning_rate, where);
  train.momentum = num_or(j, "momentum", train.momentum, where);
  train.epochs = int_or(j, "epochs", train.epochs, where);
  train.batch_pairs = int_or(j, "batch_pairs", train.batch_pairs, where);
  train.epsilon = num_or(j, "epsilon", train.epsilon, where);
  train.nu = num_or(j, "nu", train.nu, where);
  train.k = int_or(j, "k", train.k, where);
  train.sigma = num_or(j, "sigma", train.sigma, where);
  train.l2 = num_or(j, "l2", train.l2, where);

  const bool has_direct = j.contains("beta") || j.contains("gamma");
  const bool has_ratio = j.contains("ratio_da_ce") || j.contains("ratio_st");
  if (has_direct && has_ratio) {
    bad_config(where, "give beta/gamma or ratio_da_ce/ratio_st, not both");
  }
  if (has_direct) {
    train.beta = num_or(j, "beta", train.beta, where);
    train.gamma = num_or(j, "gamma", train.gamma, where);
  } else if (has_ratio) {
    // The reparameterized weighting: ratio_da_ce = (beta+gamma)/(1+beta+gamma)
    // splits total cross-entropy weight against the domain term, ratio_st =
    // beta/(beta+gamma) splits it between source and target.
    const double r_da_ce = num_or(j, "ratio_da_ce", -1.0, where);
    if (!(r_da_ce >= 0.0 && r_da_ce < 1.0)) {
      bad_config(where, "'ratio_da_ce' is required with the ratio form and must lie in [0, 1)");
    }
    const double total = r_da_ce / (1.0 - r_da_ce);
    if (total == 0.0) {
      if (j.contains("ratio_st")) {
        const double r_st = num_or(j, "ratio_st", 0.0, where);
        if (!(r_st >= 0.0 && r_st <= 1.0)) {
          bad_config(where, "'ratio_st' must lie in [0, 1]");
        }
      }
      train.beta = 0.0;
      train.gamma = 0.0;
    } else {
      if (!j.contains("ratio_st")) {
        bad_config(where, "'ratio_st' is required when ratio_da_ce > 0");
      }
      const double r_st = num_or(j, "ratio_st", 0.0, where);
      if (!(r_st >= 0.0 && r_st <= 1.0)) {
        bad_config(where, "'ratio_st' must lie in [0, 1]");
      }
      train.beta = r_st * total;
      train.gamma = (1.0 - r_st) * total;
    }
  }
}

ExperimentConfig config_from_json(const json& root) {
  reject_unknown(root, "config",
                 {"method", "data", "protocol", "train", "out_dir", "jobs", "baseline"});
  ExperimentConfig cfg;
  cfg.run_seeds = {1, 2, 3, 4, 5};
  cfg.method = str_or(root, "method", cfg.method, "config");
  cfg.train.loss_kind = loss_kind_from_string(cfg.method);

  if (root.contains("data")) {
    const json& d = root.at("data");
    reject_unknown(d, "data", {"source_csv", "target_csv", "synthetic"});
    const bool has_csv = d.contains("source_csv") || d.contains("target_csv");
    if (has_csv && d.contains("synthetic")) {
      bad_config("data", "give csv paths or a synthetic block, not both");
    }
    if (has_csv) {
      if (!d.contains("source_csv") || !d.contains("target_csv")) {
        bad_config("data", "source_csv and target_csv go together");
      }
      cfg.source_csv = str_or(d, "source_csv", "", "data");
      cfg.target_csv = str_or(d, "target_csv", "", "data");
    }
    if (d.contains("synthetic")) cfg.synthetic = shift_spec_from_json(d.at("synthetic"));
  }

  if (root.contains("protocol")) protocol_from_json(root.at("protocol"), cfg);
  if (root.contains("train")) train_from_json(root.at("train"), cfg.train);

  cfg.out_dir = str_or(root, "out_dir", cfg.out_dir, "config");
  cfg.jobs = int_or(root, "jobs", cfg.jobs, "config");
  if (cfg.jobs < 1) bad_config("config", "'jobs' must be >= 1");
  cfg.baseline = bool_or(root, "baseline", cfg.baseline, "config");
  return cfg;
}

// `--set path.to.key=value`; the value is parsed as JSON when possible and
// falls back to a plain string (so method=ccsa works without quoting).
void apply_override(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    bad_config("--set", "expected key=value, got '" + assignment + "'");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  json value = json::parse(raw, /*cb=*/nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = raw;

  json* node = &root;
  std::size_t begin = 0;
  while (true) {
    const std::size_t dot = path.find('.', begin);
    const std::string key = path.substr(begin, dot == std::string::npos ? dot : dot - begin);
    if (key.empty()) bad_config("--set", "empty path segment in '" + path + "'");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    json& next = (*node)[key];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) {
      bad_config("--set", "'" + path.substr(0, dot) + "' is not an object");
    }
    node = &next;
    begin = dot + 1;
  }
}

json load_config_json(const std::string& config_path) {
  if (config_path.empty()) return json::object();
  std::string text;
  try {
    text = read_text(config_path);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("--config: ") + e.what());
  }
  json root = json::parse(text, nullptr, false);
  if (root.is_discarded()) {
    bad_config("--config", "'" + config_path + "' is not valid JSON");
  }
  return root;
}

void require_split_recipe(const ExperimentConfig& cfg) {
  if (cfg.params.n_source_per_class < 1 || cfg.params.n_target_per_class < 1) {
    bad_config("protocol",
               "n_source_per_class and n_target_per_class must be >= 1 to build splits");
  }
}

// ---------------------------------------------------------------------------
// Result files.
// ---------------------------------------------------------------------------

json results_json(const RunSummary& s) {
  json per_seed = json::array();
  for (const SeedResult& r : s.seeds) {
    json row{{"seed", r.seed},
             {"val_curve", r.val_curve},
             {"best_epoch", r.best_epoch},
             {"validation_accuracy", r.best_validation_accuracy},
             {"test_accuracy", r.test_accuracy},
             {"test_evaluations", r.test_evaluations}};
    if (r.baseline_ncm) row["baseline_ncm"] = *r.baseline_ncm;
    per_seed.push_back(std::move(row));
  }
  json out{{"method", s.method},
           {"protocol", s.protocol},
           {"manifest_hash", s.manifest_hash},
           {"per_seed", std::move(per_seed)},
           {"mean_test_accuracy", s.mean_test_accuracy},
           {"std_test_accuracy", s.std_test_accuracy}};
  if (s.baseline_mean) out["baseline_mean_ncm"] = *s.baseline_mean;
  return out;
}

std::string results_csv(const RunSummary& s) {
  std::string csv = "seed,best_epoch,validation_accuracy,test_accuracy,baseline_ncm\n";
  for (const SeedResult& r : s.seeds) {
    csv += std::to_string(r.seed);
    csv += ',';
    csv += std::to_string(r.best_epoch);
    csv += ',';
    csv += format_double(r.best_validation_accuracy);
    csv += ',';
    csv += format_double(r.test_accuracy);
    csv += ',';
    if (r.baseline_ncm) csv += format_double(*r.baseline_ncm);
    csv += '\n';
  }
  return csv;
}

// ---------------------------------------------------------------------------
// Commands.
// ---------------------------------------------------------------------------

std::string fmt_pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * fraction);
  return buf;
}

int cmd_gen(const ExperimentConfig& cfg, std::ostream& out) {
  if (!cfg.synthetic) {
    bad_config("gen", "a data.synthetic block is required to generate CSVs");
  }
  const auto [source, target] = generate(*cfg.synthetic);
  fs::create_directories(cfg.out_dir);
  const fs::path src_path = fs::path(cfg.out_dir) / "source.csv";
  const fs::path tgt_path = fs::path(cfg.out_dir) / "target.csv";
  write_text_atomic(src_path, to_feature_csv(source));
  write_text_atomic(tgt_path, to_feature_csv(target));
  out << "wrote " << src_path.string() << " (" << source.size() << " samples, dim "
      << source.dim() << ")\n";
  out << "wrote " << tgt_path.string() << " (" << target.size() << " samples, dim "
      << target.dim() << ")\n";
  out << "dataset fingerprint: " << dataset_fingerprint(source, target) << "\n";
  return 0;
}

int cmd_split(const ExperimentConfig& cfg, std::ostream& out) {
  require_split_recipe(cfg);
  const auto [source, target] = load_experiment_data(cfg);
  const SplitManifest manifest = manifest_for(cfg, source, target);
  fs::create_directories(cfg.out_dir);
  const fs::path mpath = fs::path(cfg.out_dir) / "manifest.json";
  write_text_atomic(mpath, canonical_dump(manifest_to_json(manifest)) + "\n");
  out << "wrote " << mpath.string() << "\n";
  out << "protocol: " << manifest.protocol << "\n";
  out << "dataset fingerprint: " << manifest.dataset_fingerprint << "\n";
  out << "manifest digest: " << manifest_hash(manifest) << "\n";
  out << "test columns: " << manifest.test.size() << "\n";
  for (const RunRecord& run : manifest.runs) {
    out << "seed " << run.seed << ": train_target " << run.train_target.size()
        << ", validation " << run.validation.size() << ", train_source "
        << run.train_source.size() << ", pairs " << run.pairs.n_same << "+"
        << run.pairs.n_diff << "\n";
  }
  return 0;
}

int cmd_run(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  require_split_recipe(cfg);
  const auto [source, target] = load_experiment_data(cfg);
  fs::create_directories(cfg.out_dir);
  const fs::path mpath = fs::path(cfg.out_dir) / "manifest.json";

  SplitManifest manifest;
  if (fs::exists(mpath)) {
    const json doc = json::parse(read_text(mpath), nullptr, false);
    if (doc.is_discarded()) {
      throw Error(ErrorCode::ManifestMismatch, mpath.string() + " is not valid JSON");
    }
    manifest = manifest_from_json(doc);
    if (manifest.dataset_fingerprint != dataset_fingerprint(source, target)) {
      throw Error(ErrorCode::ManifestMismatch,
                  mpath.string() + " was built from different data (fingerprint mismatch); "
                                   "delete it or point --out elsewhere");
    }
    if (manifest.protocol != cfg.protocol) {
      bad_config("--protocol", "existing manifest uses the '" + manifest.protocol +
                                   "' protocol; delete it or match the flag");
    }
    out << "reusing " << mpath.string() << "\n";
  } else {
    manifest = manifest_for(cfg, source, target);
    write_text_atomic(mpath, canonical_dump(manifest_to_json(manifest)) + "\n");
    out << "wrote " << mpath.string() << "\n";
  }
  out << "manifest digest: " << manifest_hash(manifest) << "\n";

  const RunSummary summary = run_experiment(cfg, source, target, manifest);

  // The quarantine audit: the test columns are consumed by exactly one
  // evaluation per seed.
  for (const SeedResult& r : summary.seeds) {
    if (r.test_evaluations != 1) {
      err << "test-set quarantine violated on seed " << r.seed << " ("
          << r.test_evaluations << " evaluations)\n";
      return 1;
    }
  }

  const fs::path out_dir(cfg.out_dir);
  write_text_atomic(out_dir / "results.json", canonical_dump(results_json(summary)) + "\n");
  write_text_atomic(out_dir / "results.csv", results_csv(summary));
  for (const SeedResult& r : summary.seeds) {
    write_text_atomic(out_dir / ("model_" + std::to_string(r.seed) + ".json"),
                      canonical_dump(joint_model_to_json(r.model)) + "\n");
  }

  for (const SeedResult& r : summary.seeds) {
    out << "seed " << r.seed << ": best epoch " << r.best_epoch << ", validation "
        << fmt_pct(r.best_validation_accuracy) << "%, test " << fmt_pct(r.test_accuracy)
        << "%\n";
  }
  out << summary.method << " (" << summary.protocol << ") test accuracy: "
      << format_mean_std(summary.mean_test_accuracy, summary.std_test_accuracy) << " over "
      << summary.seeds.size() << " seeds\n";
  if (summary.baseline_mean) {
    double var = 0.0;
    for (const SeedResult& r : summary.seeds) {
      const double d = r.baseline_ncm.value_or(0.0) - *summary.baseline_mean;
      var += d * d;
    }
    var /= static_cast<double>(summary.seeds.size());
    out << "source-only ncm baseline: "
        << format_mean_std(*summary.baseline_mean, std::sqrt(var)) << "\n";
  }
  return 0;
}

int cmd_check(const std::string& filter, bool skip_heavy, const std::string& golden_dir,
              std::ostream& out) {
  int failed = 0;
  int ran = 0;
  int skipped = 0;
  for (const Check& check : all_checks(golden_dir)) {
    if (!filter.empty() && check.name.find(filter) == std::string::npos) continue;
    if (skip_heavy && check.heavy) {
      ++skipped;
      out << "[SKIP] " << check.name << " (criterion " << check.criterion << "): heavy\n";
      continue;
    }
    CheckResult result;
    try {
      result = check.fn();
    } catch (const std::exception& e) {
      result = {false, std::string("threw: ") + e.what()};
    }
    ++ran;
    if (!result.pass) ++failed;
    out << (result.pass ? "[PASS] " : "[FAIL] ") << check.name << " (criterion "
        << check.criterion << "): " << result.detail << "\n";
  }
  out << "summary: " << (ran - failed) << "/" << ran << " passed";
  if (skipped > 0) out << ", " << skipped << " skipped";
  out << "\n";
  if (ran == 0) {
    out << "no checks matched the filter\n";
    return 1;
  }
  return failed == 0 ? 0 : 1;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::NonPositiveMargin:
    case ErrorCode::NonPositiveSigma:
    case ErrorCode::KTooLarge:
    case ErrorCode::DimensionTooLarge:
      return 2;
    case ErrorCode::MissingFile:
    case ErrorCode::MalformedHeader:
    case ErrorCode::RaggedRow:
    case ErrorCode::NonFiniteValue:
    case ErrorCode::UnknownDomainTag:
    case ErrorCode::InvalidLabel:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::MissingClass:
    case ErrorCode::ClassTooSmall:
    case ErrorCode::InsufficientPool:
    case ErrorCode::InsufficientSource:
    case ErrorCode::NoSameClassPairs:
    case ErrorCode::EmptyPairSet:
    case ErrorCode::MissingSameClassSource:
    case ErrorCode::MissingDifferentClassSource:
    case ErrorCode::ManifestMismatch:
      return 3;
    case ErrorCode::NegativeWeight:
    case ErrorCode::NonZeroDiagonal:
    case ErrorCode::SingularNumerator:
    case ErrorCode::DegenerateDenominator:
    case ErrorCode::NonFiniteProbe:
    case ErrorCode::NonFiniteLoss:
      return 4;
  }
  return 2;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"supervised domain adaptation via graph embedding", "dage"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  std::string out_flag;
  std::string protocol_flag;
  int jobs_flag = 0;
  app.add_option("--config", config_path, "JSON experiment config file");
  app.add_option("--set", sets, "override a config entry, e.g. --set train.epochs=40")
      ->type_size(1)
      ->take_all();
  app.add_option("--out", out_flag, "output directory (overrides config out_dir)");
  app.add_option("--protocol", protocol_flag, "split protocol")
      ->check(CLI::IsMember({"rectified", "traditional"}));
  app.add_option("--jobs", jobs_flag, "worker threads for independent seeds")
      ->check(CLI::PositiveNumber);

  CLI::App* split = app.add_subcommand("split", "build and write the split manifest");
  CLI::App* run = app.add_subcommand("run", "train and evaluate every seed");
  CLI::App* check = app.add_subcommand("check", "run the invariant suite");
  CLI::App* gen = app.add_subcommand("gen", "emit synthetic domain CSVs");

  std::string filter;
  bool skip_heavy = false;
  std::string golden_dir;
  check->add_option("--filter", filter, "only run checks whose name contains this text");
  check->add_flag("--skip-heavy", skip_heavy, "skip the long-running benchmark check");
  check->add_option("--golden", golden_dir, "directory holding golden.json to cross-check");

  for (CLI::App* sub : {split, run, check, gen}) sub->fallthrough();

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    // --help lands here too; CLI11 prints it and reports exit code 0.
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (check->parsed()) return cmd_check(filter, skip_heavy, golden_dir, out);

    json root = load_config_json(config_path);
    for (const std::string& assignment : sets) apply_override(root, assignment);
    if (!out_flag.empty()) root["out_dir"] = out_flag;
    if (!protocol_flag.empty()) root["protocol"]["kind"] = protocol_flag;
    if (jobs_flag > 0) root["jobs"] = jobs_flag;
    const ExperimentConfig cfg = config_from_json(root);

    if (gen->parsed()) return cmd_gen(cfg, out);
    if (split->parsed()) return cmd_split(cfg, out);
    return cmd_run(cfg, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  args.reserve(static_cast<std::size_t>(argc > 0 ? argc - 1 : 0));
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(std::move(args), std::cout, std::cerr);
}

}  // namespace dage
