#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "ucp/types.hpp"

namespace ucp {

// Instances plus (optionally) their labels. Immutable after construction.
class Dataset {
 public:
  Dataset() = default;

  // Labeled dataset; labels are 0-based and must lie in [0, num_classes).
  Dataset(Matrix instances, std::vector<Label> labels, int num_classes);

  static Dataset unlabeled(Matrix instances, int num_classes);

  std::size_t size() const noexcept { return static_cast<std::size_t>(instances_.rows()); }
  int num_features() const noexcept { return static_cast<int>(instances_.cols()); }
  int num_classes() const noexcept { return num_classes_; }
  bool labeled() const noexcept { return labeled_; }

  const Matrix& instances() const noexcept { return instances_; }
  // Throws ValidationError on unlabeled data.
  std::span<const Label> labels() const;

  Dataset subset(std::span<const std::size_t> indices) const;

 private:
  Matrix instances_;
  std::vector<Label> labels_;
  int num_classes_ = 0;
  bool labeled_ = false;
};

class Evaluator;

// Calibration split. Instances are public; labels exist only for assessment
// and can be read through Evaluator alone, so the unsupervised pipeline has no
// path to them.
class CalibrationSet {
 public:
  CalibrationSet() = default;
  explicit CalibrationSet(Dataset labeled);

  std::size_t size() const noexcept { return data_.size(); }
  int num_classes() const noexcept { return data_.num_classes(); }
  int num_features() const noexcept { return data_.num_features(); }
  const Matrix& instances() const noexcept { return data_.instances(); }

 private:
  friend class Evaluator;
  Dataset data_;
};

class Evaluator {
 public:
  static std::span<const Label> true_labels(const CalibrationSet& cal) { return cal.data_.labels(); }
  static const Dataset& labeled_view(const CalibrationSet& cal) { return cal.data_; }
};

struct SplitSpec {
  std::size_t train_size = 0;
  std::size_t cal_size = 0;
  std::size_t test_size = 0;
  std::uint64_t seed = 0;
};

struct Partition {
  Dataset train;
  CalibrationSet cal;
  Dataset test;
  // Source rows of train, cal, and test, in that order.
  std::array<std::vector<std::size_t>, 3> indices;
};

// Seeded Fisher-Yates permutation; the first train_size rows go to train, the
// next cal_size to calibration, the next test_size to test.
Partition split_dataset(const Dataset& data, const SplitSpec& spec);

// First `count` entries of a seeded uniform permutation of [0, n).
std::vector<std::size_t> random_indices(std::size_t n, std::size_t count, std::uint64_t seed);

// CSV with one header row `f1,...,fd[,label]`. The label column may declare its
// class count as `label:C`; otherwise C is the largest observed label (or
// `num_classes` when given). File labels are 1-based.
Dataset load_csv_dataset(const std::filesystem::path& path, bool labeled,
                         std::optional<int> num_classes = std::nullopt);

struct SyntheticConfig {
  std::vector<std::vector<double>> means;  // one row per class
  double covariance_scale = 1.0;            // covariance is scale * I
  std::vector<double> priors;

  int num_classes() const noexcept { return static_cast<int>(means.size()); }
  int num_features() const noexcept { return means.empty() ? 0 : static_cast<int>(means.front().size()); }
  void validate() const;
};

// Exact Bayes posterior of a spherical Gaussian mixture.
class PosteriorOracle {
 public:
  PosteriorOracle() = default;
  explicit PosteriorOracle(SyntheticConfig cfg);

  Vector posterior(std::span<const double> x) const;
  Vector posterior(const Eigen::Ref<const Vector>& x) const;
  const SyntheticConfig& config() const noexcept { return cfg_; }

 private:
  SyntheticConfig cfg_;
};

struct SyntheticSample {
  Dataset data;
  PosteriorOracle oracle;
};

SyntheticSample generate_synthetic(const SyntheticConfig& cfg, long count, std::uint64_t seed);

}  // namespace ucp
