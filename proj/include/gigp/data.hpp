#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gigp/config.hpp"
#include "gigp/lift.hpp"

namespace gigp::harness {

// ---- IDX image/label files (big-endian, standard MNIST layout) ----

struct ImageSet {
  std::size_t count = 0, rows = 0, cols = 0;
  std::vector<double> pixels;  // count * rows * cols, intensities in [0, 1]

  const double* image(std::size_t i) const { return pixels.data() + i * rows * cols; }
};

ImageSet load_idx_images(const std::string& path);
std::vector<std::uint8_t> load_idx_labels(const std::string& path);
void write_idx_images(const std::string& path, const ImageSet& images);
void write_idx_labels(const std::string& path,
                      const std::vector<std::uint8_t>& labels);

// Thresholded pixels become points at centered coordinates
// ((col-13.5)/14, (13.5-row)/14) carrying their intensity as the feature,
// rotated about the origin, subsampled to max_points. An all-background
// image yields a single origin point with feature 0.
lift::RawPointCloud image_to_cloud(const double* image, std::size_t rows,
                                   std::size_t cols, double threshold,
                                   std::size_t max_points,
                                   double rotation_angle, std::uint64_t seed);

// ---- synthetic radial-shell regression ----

// per-point contribution of a shell with nominal radius r
double shell_value(double r);

struct SynthSample {
  std::vector<double> coords;       // n_points x dim
  std::vector<std::size_t> shells;  // nominal shell index per point (0..2)
  double target_raw = 0.0;
};

// Points on shells of radius {1, 2, 3} with gaussian radial noise; the raw
// target is sum over points of shell_value(nominal radius).
std::vector<SynthSample> gen_synth_invariant(std::size_t n_samples,
                                             std::size_t n_points,
                                             std::size_t dim,
                                             std::uint64_t seed,
                                             double noise = 0.05);

// ---- XYZ molecular geometry ----

// "symbol x y z" atoms with a count header; features are one-hot over
// {H, C, N, O, F}
lift::RawPointCloud load_xyz(const std::string& path);

// shifts coordinates by minus their unweighted mean
lift::RawPointCloud recenter(const lift::RawPointCloud& cloud);

// ---- synthetic digit glyphs ----

// Ten classes of 28x28 glyphs with distinct radial structure (rings, disks,
// annuli) plus per-sample jitter; stand-ins for rotated-digit images with the
// same file format, so real MNIST IDX files drop in unchanged.
ImageSet gen_digit_images(const std::vector<std::uint8_t>& labels,
                          std::uint64_t seed);
std::vector<std::uint8_t> gen_digit_labels(std::size_t n, std::uint64_t seed);

// ---- dataset assembly ----

struct Sample {
  lift::RawPointCloud cloud;
  double target = 0.0;  // regression
  int label = -1;       // classification
};

struct Dataset {
  std::vector<Sample> samples;
  bool classification = false;
  std::size_t n_classes = 0;
  // standardization of regression targets, from the training split
  double norm_mean = 0.0;
  double norm_std = 1.0;
};

struct SplitDatasets {
  Dataset train, test;
};

SplitDatasets make_synth_datasets(const ExperimentConfig& cfg);
SplitDatasets make_digits_datasets(const ExperimentConfig& cfg);
SplitDatasets make_xyz_datasets(const ExperimentConfig& cfg);
SplitDatasets make_datasets(const ExperimentConfig& cfg);

// JSON-lines records {"coords": [[..]], "features": [[..]], "target": y}
void write_synth_jsonl(const std::string& path, const Dataset& train,
                       const Dataset& test);
SplitDatasets read_synth_jsonl(const std::string& path, std::size_t n_train,
                               std::size_t n_test);

// orbit radii over every point of the training split (anchor initialization)
std::vector<double> orbit_radius_sample(const Dataset& ds, group::GroupId g,
                                        std::size_t max_clouds = 512);

}  // namespace gigp::harness
