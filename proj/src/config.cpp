#include "gigp/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gigp::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::size_t> parse_size_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(std::stoul(tok));
  }
  return out;
}

std::string size_list_str(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::invalid_argument("config: bad boolean for " + key + ": " + s);
}

}  // namespace

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key");
    if (kv.count(key))
      throw std::invalid_argument("config: duplicate key " + key);
    kv[key] = val;
  }
  return kv;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

ExperimentConfig ExperimentConfig::from_string(const std::string& text) {
  auto kv = parse_kv(text);
  ExperimentConfig c;
  auto take = [&](const std::string& key) -> std::string* {
    auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    return &it->second;
  };
  auto consume = [&](const std::string& key) {
    kv.erase(key);
  };

  if (auto* v = take("task")) {
    if (*v == "rot_digits")
      c.task = Task::RotDigits;
    else if (*v == "synth_invariant")
      c.task = Task::SynthInvariant;
    else if (*v == "xyz_regression")
      c.task = Task::XyzRegression;
    else
      throw std::invalid_argument("config: unknown task " + *v);
    consume("task");
  }
  if (auto* v = take("group")) {
    if (*v == "SO2")
      c.group = group::GroupId::SO2;
    else if (*v == "SO3")
      c.group = group::GroupId::SO3;
    else
      throw std::invalid_argument("config: unknown group " + *v);
    consume("group");
  }
  if (auto* v = take("pooling")) {
    if (*v == "mean")
      c.pooling = Pooling::Mean;
    else if (*v == "gigp")
      c.pooling = Pooling::Gigp;
    else if (*v == "coord_debug")
      c.pooling = Pooling::CoordDebug;
    else
      throw std::invalid_argument("config: unknown pooling " + *v);
    consume("pooling");
  }

  auto size_field = [&](const char* key, std::size_t& dst) {
    if (auto* v = take(key)) {
      dst = std::stoul(*v);
      consume(key);
    }
  };
  auto double_field = [&](const char* key, double& dst) {
    if (auto* v = take(key)) {
      dst = std::stod(*v);
      consume(key);
    }
  };
  auto string_field = [&](const char* key, std::string& dst) {
    if (auto* v = take(key)) {
      dst = *v;
      consume(key);
    }
  };
  auto bool_field = [&](const char* key, bool& dst) {
    if (auto* v = take(key)) {
      dst = parse_bool(*v, key);
      consume(key);
    }
  };
  auto list_field = [&](const char* key, std::vector<std::size_t>& dst) {
    if (auto* v = take(key)) {
      dst = parse_size_list(*v);
      consume(key);
    }
  };

  size_field("channels", c.channels);
  size_field("blocks", c.blocks);
  size_field("k", c.nbhd_k);
  double_field("mc_fraction", c.mc_fraction);
  list_field("kernel_hidden", c.kernel_hidden);
  list_field("phi_hidden", c.phi_hidden);
  list_field("head_hidden", c.head_hidden);
  size_field("anchors_m", c.anchors_m);
  double_field("sigma", c.sigma_override);
  double_field("lambda_orbit", c.lambda_orbit);
  bool_field("train_anchors", c.train_anchors);
  double_field("lr", c.lr);
  size_field("batch", c.batch);
  size_field("epochs", c.epochs);
  if (auto* v = take("seed")) {
    c.seed = std::stoull(*v);
    consume("seed");
  }
  double_field("val_fraction", c.val_fraction);
  if (auto* v = take("threads")) {
    c.threads = std::stoi(*v);
    consume("threads");
  }
  bool_field("parallel", c.parallel);
  size_field("n_train", c.n_train);
  size_field("n_test", c.n_test);
  size_field("n_points", c.n_points);
  string_field("synth_path", c.synth_path);
  string_field("train_images", c.train_images);
  string_field("train_labels", c.train_labels);
  string_field("test_images", c.test_images);
  string_field("test_labels", c.test_labels);
  double_field("img_threshold", c.img_threshold);
  size_field("img_max_points", c.img_max_points);
  if (auto* v = take("rotation_seed")) {
    c.rotation_seed = std::stoull(*v);
    consume("rotation_seed");
  }
  size_field("digits_train_limit", c.digits_train_limit);
  size_field("digits_test_limit", c.digits_test_limit);
  string_field("xyz_dir", c.xyz_dir);
  string_field("xyz_targets", c.xyz_targets);
  bool_field("recenter", c.recenter);

  if (!kv.empty()) {
    std::string unknown;
    for (const auto& [k, v] : kv) unknown += (unknown.empty() ? "" : ", ") + k;
    throw std::invalid_argument("config: unknown keys: " + unknown);
  }
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  if (channels < 1 || blocks < 1 || nbhd_k < 1 || anchors_m < 1 || batch < 1 ||
      epochs < 1 || n_points < 1)
    throw std::invalid_argument("config: counts must be >= 1");
  if (lr <= 0.0) throw std::invalid_argument("config: lr > 0 required");
  if (mc_fraction <= 0.0 || mc_fraction > 1.0)
    throw std::invalid_argument("config: mc_fraction in (0, 1]");
  if (static_cast<std::size_t>(mc_fraction * static_cast<double>(nbhd_k)) < 1)
    throw std::invalid_argument("config: mc_fraction * k must be >= 1");
  if (val_fraction < 0.0 || val_fraction >= 1.0)
    throw std::invalid_argument("config: val_fraction in [0, 1)");
  if (img_threshold <= 0.0 || img_threshold >= 1.0)
    throw std::invalid_argument("config: img_threshold in (0, 1)");
  if (task == Task::RotDigits && group != group::GroupId::SO2)
    throw std::invalid_argument("config: rot_digits needs group SO2");
}

std::string ExperimentConfig::echo() const {
  std::ostringstream os;
  os << "task = "
     << (task == Task::RotDigits
             ? "rot_digits"
             : task == Task::SynthInvariant ? "synth_invariant" : "xyz_regression")
     << "\n";
  os << "group = " << (group == group::GroupId::SO3 ? "SO3" : "SO2") << "\n";
  os << "pooling = "
     << (pooling == Pooling::Mean
             ? "mean"
             : pooling == Pooling::Gigp ? "gigp" : "coord_debug")
     << "\n";
  os << "channels = " << channels << "\n";
  os << "blocks = " << blocks << "\n";
  os << "k = " << nbhd_k << "\n";
  os << "mc_fraction = " << mc_fraction << "\n";
  os << "kernel_hidden = " << size_list_str(kernel_hidden) << "\n";
  os << "phi_hidden = " << size_list_str(phi_hidden) << "\n";
  if (!head_hidden.empty())
    os << "head_hidden = " << size_list_str(head_hidden) << "\n";
  os << "anchors_m = " << anchors_m << "\n";
  if (sigma_override > 0.0) os << "sigma = " << sigma_override << "\n";
  os << "lambda_orbit = " << lambda_orbit << "\n";
  os << "train_anchors = " << (train_anchors ? "true" : "false") << "\n";
  os << "lr = " << lr << "\n";
  os << "batch = " << batch << "\n";
  os << "epochs = " << epochs << "\n";
  os << "seed = " << seed << "\n";
  os << "val_fraction = " << val_fraction << "\n";
  os << "threads = " << threads << "\n";
  os << "parallel = " << (parallel ? "true" : "false") << "\n";
  if (task == Task::SynthInvariant) {
    os << "n_train = " << n_train << "\n";
    os << "n_test = " << n_test << "\n";
    os << "n_points = " << n_points << "\n";
    if (!synth_path.empty()) os << "synth_path = " << synth_path << "\n";
  }
  if (task == Task::RotDigits) {
    os << "train_images = " << train_images << "\n";
    os << "train_labels = " << train_labels << "\n";
    os << "test_images = " << test_images << "\n";
    os << "test_labels = " << test_labels << "\n";
    os << "img_threshold = " << img_threshold << "\n";
    os << "img_max_points = " << img_max_points << "\n";
    os << "rotation_seed = " << rotation_seed << "\n";
    if (digits_train_limit) os << "digits_train_limit = " << digits_train_limit << "\n";
    if (digits_test_limit) os << "digits_test_limit = " << digits_test_limit << "\n";
  }
  if (task == Task::XyzRegression) {
    os << "xyz_dir = " << xyz_dir << "\n";
    os << "xyz_targets = " << xyz_targets << "\n";
    os << "recenter = " << (recenter ? "true" : "false") << "\n";
  }
  return os.str();
}

}  // namespace gigp::harness
