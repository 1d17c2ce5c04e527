#include "gigp/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gigp::harness {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_be32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in)
    throw std::runtime_error("idx: truncated header in " + path);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<char*>(b), 4);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return a ^ (0x9E3779B97F4A7C15ULL * (b + 1));
}

}  // namespace

ImageSet load_idx_images(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("idx: cannot open " + path);
  const std::uint32_t magic = read_be32(in, path);
  if (magic != kImagesMagic) {
    std::ostringstream os;
    os << "idx: bad magic 0x" << std::hex << magic << " in " << path
       << " (expected 0x803 image file)";
    throw std::runtime_error(os.str());
  }
  ImageSet set;
  set.count = read_be32(in, path);
  set.rows = read_be32(in, path);
  set.cols = read_be32(in, path);
  const std::size_t expected = set.count * set.rows * set.cols;
  std::vector<unsigned char> raw(expected);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(expected));
  const std::size_t got = static_cast<std::size_t>(in.gcount());
  if (got != expected)
    throw std::runtime_error("idx: truncated " + path + ": expected " +
                             std::to_string(expected + 16) + " bytes, got " +
                             std::to_string(got + 16));
  set.pixels.resize(expected);
  for (std::size_t i = 0; i < expected; ++i)
    set.pixels[i] = static_cast<double>(raw[i]) / 255.0;
  return set;
}

std::vector<std::uint8_t> load_idx_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("idx: cannot open " + path);
  const std::uint32_t magic = read_be32(in, path);
  if (magic != kLabelsMagic) {
    std::ostringstream os;
    os << "idx: bad magic 0x" << std::hex << magic << " in " << path
       << " (expected 0x801 label file)";
    throw std::runtime_error(os.str());
  }
  const std::uint32_t count = read_be32(in, path);
  std::vector<std::uint8_t> labels(count);
  in.read(reinterpret_cast<char*>(labels.data()), count);
  if (static_cast<std::uint32_t>(in.gcount()) != count)
    throw std::runtime_error("idx: truncated " + path + ": expected " +
                             std::to_string(count + 8) + " bytes, got " +
                             std::to_string(in.gcount() + 8));
  return labels;
}

void write_idx_images(const std::string& path, const ImageSet& images) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("idx: cannot write " + path);
  write_be32(out, kImagesMagic);
  write_be32(out, static_cast<std::uint32_t>(images.count));
  write_be32(out, static_cast<std::uint32_t>(images.rows));
  write_be32(out, static_cast<std::uint32_t>(images.cols));
  for (double v : images.pixels) {
    const double c = std::clamp(v, 0.0, 1.0);
    out.put(static_cast<char>(std::lround(c * 255.0)));
  }
}

void write_idx_labels(const std::string& path,
                      const std::vector<std::uint8_t>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("idx: cannot write " + path);
  write_be32(out, kLabelsMagic);
  write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size()));
}

lift::RawPointCloud image_to_cloud(const double* image, std::size_t rows,
                                   std::size_t cols, double threshold,
                                   std::size_t max_points,
                                   double rotation_angle, std::uint64_t seed) {
  if (threshold <= 0.0 || threshold >= 1.0)
    throw std::invalid_argument("image_to_cloud: threshold in (0, 1)");
  std::vector<double> coords;
  std::vector<double> feats;
  const double half_r = (static_cast<double>(rows) - 1.0) / 2.0;
  const double half_c = (static_cast<double>(cols) - 1.0) / 2.0;
  const double scale_r = static_cast<double>(rows) / 2.0;
  const double scale_c = static_cast<double>(cols) / 2.0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = image[r * cols + c];
      if (v > threshold) {
        coords.push_back((static_cast<double>(c) - half_c) / scale_c);
        coords.push_back((half_r - static_cast<double>(r)) / scale_r);
        feats.push_back(v);
      }
    }
  std::size_t n = feats.size();
  if (n == 0) {
    // all-background image: sentinel origin point with zero feature
    coords = {0.0, 0.0};
    feats = {0.0};
    n = 1;
  }
  if (max_points > 0 && n > max_points) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    for (std::size_t j = 0; j < max_points; ++j) {
      std::uniform_int_distribution<std::size_t> pick(j, n - 1);
      std::swap(idx[j], idx[pick(rng)]);
    }
    idx.resize(max_points);
    std::sort(idx.begin(), idx.end());
    std::vector<double> c2, f2;
    for (std::size_t i : idx) {
      c2.push_back(coords[i * 2]);
      c2.push_back(coords[i * 2 + 1]);
      f2.push_back(feats[i]);
    }
    coords = std::move(c2);
    feats = std::move(f2);
    n = max_points;
  }
  if (rotation_angle != 0.0) {
    const group::GroupElement rot = group::so2(rotation_angle);
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = group::act(rot, {coords[i * 2], coords[i * 2 + 1]});
      coords[i * 2] = p[0];
      coords[i * 2 + 1] = p[1];
    }
  }
  lift::RawPointCloud cloud;
  cloud.n_points = n;
  cloud.dim = 2;
  cloud.feat_dim = 1;
  cloud.coords = std::move(coords);
  cloud.features = std::move(feats);
  return cloud;
}

double shell_value(double r) { return std::sin(r) + r * r / 10.0; }

std::vector<SynthSample> gen_synth_invariant(std::size_t n_samples,
                                             std::size_t n_points,
                                             std::size_t dim,
                                             std::uint64_t seed, double noise) {
  if (n_samples < 1 || n_points < 1)
    throw std::invalid_argument("gen_synth_invariant: counts >= 1");
  if (dim != 2 && dim != 3)
    throw std::invalid_argument("gen_synth_invariant: dim 2 or 3");
  std::vector<SynthSample> out;
  out.reserve(n_samples);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> shell_pick(0, 2);
  std::normal_distribution<double> radial(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (std::size_t s = 0; s < n_samples; ++s) {
    SynthSample sample;
    sample.coords.resize(n_points * dim);
    sample.shells.resize(n_points);
    for (std::size_t p = 0; p < n_points; ++p) {
      const std::size_t shell = shell_pick(rng);
      sample.shells[p] = shell;
      const double r = static_cast<double>(shell + 1) + noise * radial(rng);
      if (dim == 2) {
        const double t = angle(rng);
        sample.coords[p * 2] = r * std::cos(t);
        sample.coords[p * 2 + 1] = r * std::sin(t);
      } else {
        double d[3];
        double nrm = 0.0;
        do {
          nrm = 0.0;
          for (double& c : d) {
            c = radial(rng);
            nrm += c * c;
          }
        } while (nrm < 1e-12);
        nrm = std::sqrt(nrm);
        for (int k = 0; k < 3; ++k) sample.coords[p * 3 + k] = r * d[k] / nrm;
      }
      sample.target_raw += shell_value(static_cast<double>(shell + 1));
    }
    out.push_back(std::move(sample));
  }
  return out;
}

lift::RawPointCloud load_xyz(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("xyz: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("xyz: " + path + ":1: empty file");
  std::size_t count = 0;
  try {
    count = std::stoul(line);
  } catch (const std::exception&) {
    throw std::runtime_error("xyz: " + path + ":1: expected atom count, got '" +
                             line + "'");
  }
  if (count == 0) throw std::runtime_error("xyz: " + path + ":1: zero atoms");
  std::getline(in, line);  // comment line

  static const std::vector<std::string> kSymbols = {"H", "C", "N", "O", "F"};
  lift::RawPointCloud cloud;
  cloud.dim = 3;
  cloud.feat_dim = kSymbols.size();
  std::size_t lineno = 2;
  std::size_t atoms = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string sym;
    if (!(ls >> sym)) continue;  // blank trailing line
    double x, y, z;
    if (!(ls >> x >> y >> z))
      throw std::runtime_error("xyz: " + path + ":" + std::to_string(lineno) +
                               ": malformed atom line '" + line + "'");
    const auto it = std::find(kSymbols.begin(), kSymbols.end(), sym);
    if (it == kSymbols.end())
      throw std::runtime_error("xyz: " + path + ":" + std::to_string(lineno) +
                               ": unknown element symbol '" + sym + "'");
    cloud.coords.insert(cloud.coords.end(), {x, y, z});
    std::vector<double> onehot(kSymbols.size(), 0.0);
    onehot[static_cast<std::size_t>(it - kSymbols.begin())] = 1.0;
    cloud.features.insert(cloud.features.end(), onehot.begin(), onehot.end());
    ++atoms;
  }
  if (atoms != count)
    throw std::runtime_error("xyz: " + path + ": header declares " +
                             std::to_string(count) + " atoms, body has " +
                             std::to_string(atoms));
  cloud.n_points = atoms;
  cloud.validate();
  return cloud;
}

lift::RawPointCloud recenter(const lift::RawPointCloud& cloud) {
  cloud.validate();
  lift::RawPointCloud out = cloud;
  std::vector<double> mean(cloud.dim, 0.0);
  for (std::size_t i = 0; i < cloud.n_points; ++i)
    for (std::size_t d = 0; d < cloud.dim; ++d)
      mean[d] += cloud.coords[i * cloud.dim + d];
  for (double& m : mean) m /= static_cast<double>(cloud.n_points);
  for (std::size_t i = 0; i < cloud.n_points; ++i)
    for (std::size_t d = 0; d < cloud.dim; ++d)
      out.coords[i * cloud.dim + d] -= mean[d];
  return out;
}

namespace {

struct RadialPrimitive {
  enum Kind { Ring, Disk, Annulus } kind;
  double r0, r1, w;
};

// ten glyph classes distinguished by radial structure
const std::vector<std::vector<RadialPrimitive>>& glyph_classes() {
  using P = RadialPrimitive;
  static const std::vector<std::vector<P>> classes = {
      {{P::Disk, 0.28, 0, 0.04}},
      {{P::Ring, 0.38, 0, 0.055}},
      {{P::Ring, 0.72, 0, 0.055}},
      {{P::Ring, 0.30, 0, 0.05}, {P::Ring, 0.68, 0, 0.05}},
      {{P::Disk, 0.16, 0, 0.04}, {P::Ring, 0.62, 0, 0.05}},
      {{P::Annulus, 0.38, 0.56, 0.04}},
      {{P::Disk, 0.30, 0, 0.04}, {P::Ring, 0.80, 0, 0.05}},
      {{P::Annulus, 0.62, 0.80, 0.04}},
      {{P::Ring, 0.22, 0, 0.045},
       {P::Ring, 0.50, 0, 0.045},
       {P::Ring, 0.78, 0, 0.045}},
      {{P::Annulus, 0.18, 0.30, 0.04}, {P::Ring, 0.60, 0, 0.05}},
  };
  return classes;
}

double primitive_intensity(const RadialPrimitive& p, double r, double rscale) {
  auto sig = [](double t) { return 1.0 / (1.0 + std::exp(-t)); };
  switch (p.kind) {
    case RadialPrimitive::Ring: {
      const double d = r - p.r0 * rscale;
      return std::exp(-d * d / (2.0 * p.w * p.w));
    }
    case RadialPrimitive::Disk:
      return sig((p.r0 * rscale - r) / p.w);
    case RadialPrimitive::Annulus:
      return sig((r - p.r0 * rscale) / p.w) * sig((p.r1 * rscale - r) / p.w);
  }
  return 0.0;
}

}  // namespace

std::vector<std::uint8_t> gen_digit_labels(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed, 0xD161));
  std::uniform_int_distribution<int> pick(0, 9);
  std::vector<std::uint8_t> labels(n);
  for (auto& l : labels) l = static_cast<std::uint8_t>(pick(rng));
  return labels;
}

ImageSet gen_digit_images(const std::vector<std::uint8_t>& labels,
                          std::uint64_t seed) {
  ImageSet set;
  set.count = labels.size();
  set.rows = 28;
  set.cols = 28;
  set.pixels.assign(set.count * 28 * 28, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 9) throw std::invalid_argument("gen_digit_images: label > 9");
    std::mt19937_64 rng(mix_seed(seed, i));
    std::uniform_real_distribution<double> rj(0.92, 1.08);
    std::uniform_real_distribution<double> aj(0.75, 1.0);
    std::uniform_real_distribution<double> pix_noise(0.0, 0.06);
    const double rscale = rj(rng);
    const double amp = aj(rng);
    const auto& prims = glyph_classes()[labels[i]];
    double* img = set.pixels.data() + i * 28 * 28;
    for (std::size_t r = 0; r < 28; ++r)
      for (std::size_t c = 0; c < 28; ++c) {
        const double x = (static_cast<double>(c) - 13.5) / 14.0;
        const double y = (13.5 - static_cast<double>(r)) / 14.0;
        const double rad = std::sqrt(x * x + y * y);
        double v = 0.0;
        for (const auto& p : prims) v += primitive_intensity(p, rad, rscale);
        v = amp * std::min(v, 1.0) + pix_noise(rng);
        img[r * 28 + c] = std::clamp(v, 0.0, 1.0);
      }
  }
  return set;
}

namespace {

Dataset synth_to_dataset(const std::vector<SynthSample>& samples,
                         std::size_t dim) {
  Dataset ds;
  ds.classification = false;
  for (const auto& s : samples) {
    Sample out;
    out.cloud.n_points = s.shells.size();
    out.cloud.dim = dim;
    out.cloud.feat_dim = 1;
    out.cloud.coords = s.coords;
    out.cloud.features.assign(s.shells.size(), 1.0);
    out.target = s.target_raw;
    ds.samples.push_back(std::move(out));
  }
  return ds;
}

void standardize_targets(Dataset& train, Dataset& test) {
  double mean = 0.0;
  for (const auto& s : train.samples) mean += s.target;
  mean /= static_cast<double>(train.samples.size());
  double var = 0.0;
  for (const auto& s : train.samples) {
    const double d = s.target - mean;
    var += d * d;
  }
  var /= static_cast<double>(train.samples.size());
  const double sd = std::sqrt(std::max(var, 1e-12));
  for (auto* ds : {&train, &test}) {
    ds->norm_mean = mean;
    ds->norm_std = sd;
    for (auto& s : ds->samples) s.target = (s.target - mean) / sd;
  }
}

}  // namespace

SplitDatasets make_synth_datasets(const ExperimentConfig& cfg) {
  if (!cfg.synth_path.empty())
    return read_synth_jsonl(cfg.synth_path, cfg.n_train, cfg.n_test);
  const std::size_t dim = cfg.spatial_dim();
  SplitDatasets out;
  out.train = synth_to_dataset(
      gen_synth_invariant(cfg.n_train, cfg.n_points, dim, cfg.seed), dim);
  out.test = synth_to_dataset(
      gen_synth_invariant(cfg.n_test, cfg.n_points, dim, cfg.seed + 1), dim);
  standardize_targets(out.train, out.test);
  return out;
}

namespace {

Dataset digits_to_dataset(const ImageSet& images,
                          const std::vector<std::uint8_t>& labels,
                          const ExperimentConfig& cfg, std::uint64_t split_tag,
                          std::size_t limit) {
  if (images.count != labels.size())
    throw std::runtime_error("digits: image/label count mismatch");
  Dataset ds;
  ds.classification = true;
  ds.n_classes = 10;
  const std::size_t n = limit ? std::min(limit, images.count) : images.count;
  for (std::size_t i = 0; i < n; ++i) {
    std::mt19937_64 rng(mix_seed(cfg.rotation_seed, split_tag + i));
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    Sample s;
    s.cloud = image_to_cloud(images.image(i), images.rows, images.cols,
                             cfg.img_threshold, cfg.img_max_points, angle(rng),
                             mix_seed(cfg.rotation_seed, split_tag + i + 0x5151));
    s.label = labels[i];
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace

SplitDatasets make_digits_datasets(const ExperimentConfig& cfg) {
  SplitDatasets out;
  const ImageSet train_imgs = load_idx_images(cfg.train_images);
  const auto train_lbls = load_idx_labels(cfg.train_labels);
  const ImageSet test_imgs = load_idx_images(cfg.test_images);
  const auto test_lbls = load_idx_labels(cfg.test_labels);
  out.train = digits_to_dataset(train_imgs, train_lbls, cfg, 0x100000,
                                cfg.digits_train_limit);
  out.test = digits_to_dataset(test_imgs, test_lbls, cfg, 0x200000,
                               cfg.digits_test_limit);
  return out;
}

SplitDatasets make_xyz_datasets(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  if (cfg.xyz_dir.empty() || cfg.xyz_targets.empty())
    throw std::runtime_error("xyz task: xyz_dir and xyz_targets required");
  std::ifstream tf(cfg.xyz_targets);
  if (!tf) throw std::runtime_error("xyz: cannot open targets " + cfg.xyz_targets);
  std::map<std::string, double> targets;
  std::string name;
  double value;
  while (tf >> name >> value) targets[name] = value;

  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(cfg.xyz_dir))
    if (e.path().extension() == ".xyz") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("xyz: no .xyz files in " + cfg.xyz_dir);

  Dataset all;
  all.classification = false;
  for (const auto& f : files) {
    const std::string base = fs::path(f).filename().string();
    const auto it = targets.find(base);
    if (it == targets.end())
      throw std::runtime_error("xyz: no target for " + base);
    Sample s;
    s.cloud = load_xyz(f);
    if (cfg.recenter) s.cloud = recenter(s.cloud);
    s.target = it->second;
    all.samples.push_back(std::move(s));
  }
  // deterministic tail split for test
  SplitDatasets out;
  const std::size_t n_test = std::max<std::size_t>(1, all.samples.size() / 5);
  const std::size_t n_train = all.samples.size() - n_test;
  out.train.classification = out.test.classification = false;
  for (std::size_t i = 0; i < all.samples.size(); ++i)
    (i < n_train ? out.train : out.test).samples.push_back(std::move(all.samples[i]));
  standardize_targets(out.train, out.test);
  return out;
}

SplitDatasets make_datasets(const ExperimentConfig& cfg) {
  switch (cfg.task) {
    case Task::SynthInvariant:
      return make_synth_datasets(cfg);
    case Task::RotDigits:
      return make_digits_datasets(cfg);
    case Task::XyzRegression:
      return make_xyz_datasets(cfg);
  }
  throw std::logic_error("make_datasets: bad task");
}

void write_synth_jsonl(const std::string& path, const Dataset& train,
                       const Dataset& test) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  auto dump = [&](const Dataset& ds) {
    for (const auto& s : ds.samples) {
      nlohmann::json rec;
      for (std::size_t i = 0; i < s.cloud.n_points; ++i) {
        rec["coords"].push_back(std::vector<double>(
            s.cloud.coords.begin() + i * s.cloud.dim,
            s.cloud.coords.begin() + (i + 1) * s.cloud.dim));
        rec["features"].push_back(std::vector<double>(
            s.cloud.features.begin() + i * s.cloud.feat_dim,
            s.cloud.features.begin() + (i + 1) * s.cloud.feat_dim));
      }
      rec["target"] = s.target;
      out << rec.dump() << "\n";
    }
  };
  dump(train);
  dump(test);
}

SplitDatasets read_synth_jsonl(const std::string& path, std::size_t n_train,
                               std::size_t n_test) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<Sample> samples;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": bad json: " + e.what());
    }
    Sample s;
    const auto& coords = rec.at("coords");
    const auto& feats = rec.at("features");
    if (coords.empty() || coords.size() != feats.size())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": coords/features mismatch");
    s.cloud.n_points = coords.size();
    s.cloud.dim = coords[0].size();
    s.cloud.feat_dim = feats[0].size();
    for (const auto& row : coords)
      for (double v : row) s.cloud.coords.push_back(v);
    for (const auto& row : feats)
      for (double v : row) s.cloud.features.push_back(v);
    s.cloud.validate();
    s.target = rec.at("target").get<double>();
    samples.push_back(std::move(s));
  }
  if (samples.size() != n_train + n_test)
    throw std::runtime_error(path + ": has " + std::to_string(samples.size()) +
                             " records, config expects " +
                             std::to_string(n_train + n_test));
  SplitDatasets out;
  for (std::size_t i = 0; i < samples.size(); ++i)
    (i < n_train ? out.train : out.test).samples.push_back(std::move(samples[i]));
  return out;
}

std::vector<double> orbit_radius_sample(const Dataset& ds, group::GroupId g,
                                        std::size_t max_clouds) {
  std::vector<double> radii;
  const std::size_t n = std::min(max_clouds, ds.samples.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = ds.samples[i].cloud;
    for (std::size_t p = 0; p < c.n_points; ++p)
      radii.push_back(lift::orbit_of(c.coord_vec(p), g));
  }
  return radii;
}

}  // namespace gigp::harness
