#include "dage/serialize.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <sstream>

namespace dage {
namespace {

using nlohmann::json;

json matrix_to_row_major(const Eigen::MatrixXd& m) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      arr.push_back(m(i, j));
    }
  }
  return arr;
}

Eigen::MatrixXd matrix_from_row_major(const json& arr, Eigen::Index rows,
                                      Eigen::Index cols, const char* what) {
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != rows * cols) {
    throw Error(ErrorCode::InvalidConfig,
                std::string(what) + ": expected " + std::to_string(rows * cols) +
                    " numbers, got " + std::to_string(arr.size()));
  }
  Eigen::MatrixXd m(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j, ++k) {
      m(i, j) = arr[static_cast<std::size_t>(k)].get<double>();
    }
  }
  return m;
}

const json& require(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw Error(ErrorCode::InvalidConfig, std::string("missing key '") + key + "'");
  }
  return *it;
}

}  // namespace

std::string canonical_dump(const nlohmann::json& j) { return j.dump(); }

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::InvalidConfig, "SHA-256 digest failed");
  }
  static const char hex[] = "0123456789abcdef";
  std::string out(static_cast<std::size_t>(len) * 2, '0');
  for (unsigned int i = 0; i < len; ++i) {
    out[2 * i] = hex[digest[i] >> 4];
    out[2 * i + 1] = hex[digest[i] & 0xf];
  }
  return out;
}

nlohmann::json embedding_to_json(const EmbeddingModel& model) {
  json j;
  j["kind"] = model.kind == EmbeddingModel::Kind::Linear ? "linear" : "kernel";
  j["d"] = static_cast<std::int64_t>(model.projection.cols());
  j["projection"] = matrix_to_row_major(model.projection);
  j["reg"] = model.reg;
  j["solver"] = model.solver == SolverKind::RatioTrace ? "ratio_trace" : "trace_ratio";
  if (model.lambda.has_value()) j["lambda"] = *model.lambda;
  if (model.kind == EmbeddingModel::Kind::Kernel) {
    json k;
    k["type"] = model.kernel.type == KernelType::Linear ? "linear" : "rbf";
    k["sigma"] = model.kernel.sigma;
    j["kernel"] = k;
    j["reference"] = matrix_to_row_major(model.reference);
  }
  return j;
}

EmbeddingModel embedding_from_json(const nlohmann::json& j) {
  EmbeddingModel model;
  const std::string kind = require(j, "kind").get<std::string>();
  if (kind != "linear" && kind != "kernel") {
    throw Error(ErrorCode::InvalidConfig, "embedding kind must be linear or kernel");
  }
  model.kind =
      kind == "linear" ? EmbeddingModel::Kind::Linear : EmbeddingModel::Kind::Kernel;
  const auto d = require(j, "d").get<Eigen::Index>();
  if (d < 1) throw Error(ErrorCode::InvalidConfig, "embedding d must be positive");
  const auto& proj = require(j, "projection");
  if (proj.size() % static_cast<std::size_t>(d) != 0) {
    throw Error(ErrorCode::InvalidConfig, "projection length not divisible by d");
  }
  const Eigen::Index m = static_cast<Eigen::Index>(proj.size()) / d;
  model.projection = matrix_from_row_major(proj, m, d, "projection");
  model.reg = require(j, "reg").get<double>();
  const std::string solver = require(j, "solver").get<std::string>();
  if (solver != "ratio_trace" && solver != "trace_ratio") {
    throw Error(ErrorCode::InvalidConfig, "solver must be ratio_trace or trace_ratio");
  }
  model.solver = solver == "ratio_trace" ? SolverKind::RatioTrace : SolverKind::TraceRatio;
  if (j.contains("lambda")) model.lambda = j["lambda"].get<double>();
  if (model.kind == EmbeddingModel::Kind::Kernel) {
    const auto& k = require(j, "kernel");
    const std::string type = require(k, "type").get<std::string>();
    if (type != "linear" && type != "rbf") {
      throw Error(ErrorCode::InvalidConfig, "kernel type must be linear or rbf");
    }
    model.kernel.type = type == "linear" ? KernelType::Linear : KernelType::Rbf;
    model.kernel.sigma = require(k, "sigma").get<double>();
    const auto& ref = require(j, "reference");
    if (m == 0 || ref.size() % static_cast<std::size_t>(m) != 0) {
      throw Error(ErrorCode::InvalidConfig, "reference length not divisible by N");
    }
    model.reference =
        matrix_from_row_major(ref, static_cast<Eigen::Index>(ref.size()) / m, m, "reference");
  }
  return model;
}

nlohmann::json train_config_to_json(const TrainConfig& cfg) {
  json j;
  j["loss_kind"] = to_string(cfg.loss_kind);
  j["d"] = cfg.d;
  j["learning_rate"] = cfg.learning_rate;
  j["momentum"] = cfg.momentum;
  j["epochs"] = cfg.epochs;
  j["batch_pairs"] = cfg.batch_pairs;
  j["beta"] = cfg.beta;
  j["gamma"] = cfg.gamma;
  j["epsilon"] = cfg.epsilon;
  j["nu"] = cfg.nu;
  j["k"] = cfg.k;
  j["sigma"] = cfg.sigma;
  j["seed"] = cfg.seed;
  j["l2"] = cfg.l2;
  return j;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  cfg.loss_kind = loss_kind_from_string(require(j, "loss_kind").get<std::string>());
  cfg.d = require(j, "d").get<int>();
  cfg.learning_rate = require(j, "learning_rate").get<double>();
  cfg.momentum = require(j, "momentum").get<double>();
  cfg.epochs = require(j, "epochs").get<int>();
  cfg.batch_pairs = require(j, "batch_pairs").get<int>();
  cfg.beta = require(j, "beta").get<double>();
  cfg.gamma = require(j, "gamma").get<double>();
  cfg.epsilon = require(j, "epsilon").get<double>();
  cfg.nu = require(j, "nu").get<double>();
  cfg.k = require(j, "k").get<int>();
  cfg.sigma = require(j, "sigma").get<double>();
  cfg.seed = require(j, "seed").get<std::uint64_t>();
  cfg.l2 = require(j, "l2").get<double>();
  return cfg;
}

nlohmann::json joint_model_to_json(const JointModel& model) {
  json j;
  j["embedding"] = embedding_to_json(model.embedding);
  j["classifier_weights"] = matrix_to_row_major(model.classifier_w);
  j["classifier_bias"] = matrix_to_row_major(model.classifier_b);
  j["config"] = train_config_to_json(model.config);
  j["final_epoch"] = model.final_epoch;
  j["loss_curve"] = model.loss_curve;
  return j;
}

JointModel joint_model_from_json(const nlohmann::json& j) {
  JointModel model;
  model.embedding = embedding_from_json(require(j, "embedding"));
  model.config = train_config_from_json(require(j, "config"));
  const auto& w = require(j, "classifier_weights");
  const Eigen::Index d = model.embedding.projection.cols();
  if (d == 0 || w.size() % static_cast<std::size_t>(d) != 0) {
    throw Error(ErrorCode::InvalidConfig, "classifier weights not divisible by d");
  }
  const Eigen::Index classes = static_cast<Eigen::Index>(w.size()) / d;
  model.classifier_w = matrix_from_row_major(w, d, classes, "classifier_weights");
  model.classifier_b =
      matrix_from_row_major(require(j, "classifier_bias"), classes, 1, "classifier_bias");
  model.final_epoch = require(j, "final_epoch").get<int>();
  model.loss_curve = require(j, "loss_curve").get<std::vector<double>>();
  return model;
}

nlohmann::json manifest_body_json(const SplitManifest& m) {
  json j;
  j["protocol"] = m.protocol;
  j["dataset_fingerprint"] = m.dataset_fingerprint;
  json params;
  params["test_fraction"] = m.params.test_fraction;
  params["n_source_per_class"] = m.params.n_source_per_class;
  params["n_target_per_class"] = m.params.n_target_per_class;
  params["ratio_same"] = m.params.ratio_same;
  params["ratio_diff"] = m.params.ratio_diff;
  params["test_seed"] = m.params.test_seed;
  j["params"] = params;
  j["test"] = m.test;
  json runs = json::array();
  for (const auto& run : m.runs) {
    json r;
    r["seed"] = run.seed;
    r["train_target"] = run.train_target;
    r["validation"] = run.validation;
    r["train_source"] = run.train_source;
    json same = json::array();
    json diff = json::array();
    for (const auto& p : run.pairs.pairs) {
      (p.same_class ? same : diff).push_back(json::array({p.source, p.target}));
    }
    json pairs;
    pairs["same"] = same;
    pairs["diff"] = diff;
    pairs["ratio_same"] = run.pairs.ratio_same;
    pairs["ratio_diff"] = run.pairs.ratio_diff;
    pairs["diff_requested"] = run.pairs.n_diff_requested;
    r["pairs"] = pairs;
    runs.push_back(r);
  }
  j["runs"] = runs;
  return j;
}

std::string manifest_hash(const SplitManifest& m) {
  return sha256_hex(canonical_dump(manifest_body_json(m)));
}

nlohmann::json manifest_to_json(const SplitManifest& m) {
  json j = manifest_body_json(m);
  j["manifest_hash"] = manifest_hash(m);
  return j;
}

SplitManifest manifest_from_json(const nlohmann::json& j) {
  SplitManifest m;
  m.protocol = require(j, "protocol").get<std::string>();
  m.dataset_fingerprint = require(j, "dataset_fingerprint").get<std::string>();
  const auto& params = require(j, "params");
  m.params.test_fraction = require(params, "test_fraction").get<double>();
  m.params.n_source_per_class = require(params, "n_source_per_class").get<int>();
  m.params.n_target_per_class = require(params, "n_target_per_class").get<int>();
  m.params.ratio_same = require(params, "ratio_same").get<int>();
  m.params.ratio_diff = require(params, "ratio_diff").get<int>();
  m.params.test_seed = require(params, "test_seed").get<std::uint64_t>();
  m.test = require(j, "test").get<std::vector<int>>();
  for (const auto& r : require(j, "runs")) {
    RunRecord run;
    run.seed = require(r, "seed").get<std::uint64_t>();
    run.train_target = require(r, "train_target").get<std::vector<int>>();
    run.validation = require(r, "validation").get<std::vector<int>>();
    run.train_source = require(r, "train_source").get<std::vector<int>>();
    const auto& pairs = require(r, "pairs");
    run.pairs.ratio_same = require(pairs, "ratio_same").get<int>();
    run.pairs.ratio_diff = require(pairs, "ratio_diff").get<int>();
    run.pairs.n_diff_requested = require(pairs, "diff_requested").get<std::int64_t>();
    for (const auto& p : require(pairs, "same")) {
      run.pairs.pairs.push_back({p.at(0).get<int>(), p.at(1).get<int>(), true});
    }
    run.pairs.n_same = static_cast<std::int64_t>(run.pairs.pairs.size());
    for (const auto& p : require(pairs, "diff")) {
      run.pairs.pairs.push_back({p.at(0).get<int>(), p.at(1).get<int>(), false});
    }
    run.pairs.n_diff = static_cast<std::int64_t>(run.pairs.pairs.size()) - run.pairs.n_same;
    m.runs.push_back(std::move(run));
  }
  // A stored hash must match the body it claims to describe.
  if (j.contains("manifest_hash") &&
      j["manifest_hash"].get<std::string>() != manifest_hash(m)) {
    throw Error(ErrorCode::InvalidConfig, "manifest hash does not match its contents");
  }
  return m;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::MissingFile, "cannot write '" + tmp.string() + "'");
    }
    out << content;
    out.flush();
    if (!out) {
      throw Error(ErrorCode::MissingFile, "write failed for '" + tmp.string() + "'");
    }
  }
  std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::MissingFile, "cannot open '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace dage
