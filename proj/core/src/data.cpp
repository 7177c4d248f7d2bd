#include "ucp/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "ucp/error.hpp"
#include "ucp/rng.hpp"

namespace ucp {

Dataset::Dataset(Matrix instances, std::vector<Label> labels, int num_classes)
    : instances_(std::move(instances)),
      labels_(std::move(labels)),
      num_classes_(num_classes),
      labeled_(true) {
  if (num_classes_ < 2) throw ValidationError("num_classes must be at least 2");
  if (static_cast<std::size_t>(instances_.rows()) != labels_.size())
    throw ShapeError("instance count " + std::to_string(instances_.rows()) +
                     " does not match label count " + std::to_string(labels_.size()));
  for (Label y : labels_)
    if (y < 0 || y >= num_classes_)
      throw ValidationError("label " + std::to_string(y + 1) + " outside 1.." + std::to_string(num_classes_));
}

Dataset Dataset::unlabeled(Matrix instances, int num_classes) {
  if (num_classes < 2) throw ValidationError("num_classes must be at least 2");
  Dataset d;
  d.instances_ = std::move(instances);
  d.num_classes_ = num_classes;
  return d;
}

std::span<const Label> Dataset::labels() const {
  if (!labeled_) throw ValidationError("dataset is unlabeled");
  return labels_;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Matrix x(static_cast<Eigen::Index>(indices.size()), instances_.cols());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= size()) throw SizeError("subset index out of range");
    x.row(static_cast<Eigen::Index>(k)) = instances_.row(static_cast<Eigen::Index>(indices[k]));
  }
  if (!labeled_) return Dataset::unlabeled(std::move(x), num_classes_);
  std::vector<Label> y(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) y[k] = labels_[indices[k]];
  return Dataset(std::move(x), std::move(y), num_classes_);
}

CalibrationSet::CalibrationSet(Dataset labeled) : data_(std::move(labeled)) {
  if (!data_.labeled()) throw ValidationError("calibration set needs labels for evaluation");
}

std::vector<std::size_t> random_indices(std::size_t n, std::size_t count, std::uint64_t seed) {
  if (count > n) throw SizeError("requested " + std::to_string(count) + " of " + std::to_string(n) + " rows");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  // Forward Fisher-Yates; only the first `count` positions are needed.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(perm[i], perm[pick(rng)]);
  }
  perm.resize(count);
  return perm;
}

Partition split_dataset(const Dataset& data, const SplitSpec& spec) {
  if (!data.labeled()) throw ValidationError("split_dataset needs a labeled dataset");
  const std::size_t total = spec.train_size + spec.cal_size + spec.test_size;
  if (total > data.size())
    throw SizeError("split sizes " + std::to_string(spec.train_size) + "+" + std::to_string(spec.cal_size) + "+" +
                    std::to_string(spec.test_size) + " exceed " + std::to_string(data.size()) + " samples");
  auto perm = random_indices(data.size(), total, spec.seed);

  Partition p;
  p.indices[0].assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(spec.train_size));
  p.indices[1].assign(perm.begin() + static_cast<std::ptrdiff_t>(spec.train_size),
                      perm.begin() + static_cast<std::ptrdiff_t>(spec.train_size + spec.cal_size));
  p.indices[2].assign(perm.begin() + static_cast<std::ptrdiff_t>(spec.train_size + spec.cal_size), perm.end());
  p.train = data.subset(p.indices[0]);
  p.cal = CalibrationSet(data.subset(p.indices[1]));
  p.test = data.subset(p.indices[2]);
  return p;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  const auto t = trim(s);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool parse_int(const std::string& s, long& out) {
  const auto t = trim(s);
  if (t.empty()) return false;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size();
}

}  // namespace

Dataset load_csv_dataset(const std::filesystem::path& path, bool labeled, std::optional<int> num_classes) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_fields(line);
      break;
    }
  }
  if (header.empty()) throw EmptyInputError(path.string() + " is empty");

  bool has_label_column = false;
  std::optional<int> declared = num_classes;
  {
    const auto last = trim(header.back());
    if (last.rfind("label", 0) == 0) {
      has_label_column = true;
      const auto colon = last.find(':');
      if (colon != std::string::npos) {
        long c = 0;
        if (!parse_int(last.substr(colon + 1), c) || c < 2)
          throw ParseError(line_no, "bad class count declaration '" + last + "'");
        if (!declared) declared = static_cast<int>(c);
      }
    }
  }
  if (labeled && !has_label_column) throw ParseError(line_no, "labeled load requested but header has no label column");
  const std::size_t d = header.size() - (has_label_column ? 1 : 0);
  if (d == 0) throw ParseError(line_no, "header declares no feature columns");

  std::vector<double> values;
  std::vector<long> raw_labels;
  std::vector<std::size_t> label_lines;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                                    std::to_string(fields.size()));
    for (std::size_t j = 0; j < d; ++j) {
      double v = 0.0;
      if (!parse_double(fields[j], v)) throw ParseError(line_no, "non-numeric feature '" + trim(fields[j]) + "'");
      values.push_back(v);
    }
    if (has_label_column) {
      long y = 0;
      if (!parse_int(fields.back(), y) || y < 1)
        throw ParseError(line_no, "bad label '" + trim(fields.back()) + "'");
      if (declared && y > *declared)
        throw ParseError(line_no, "label " + std::to_string(y) + " outside 1.." + std::to_string(*declared));
      raw_labels.push_back(y);
      label_lines.push_back(line_no);
    }
  }
  const std::size_t rows = values.size() / d;
  if (rows == 0) throw EmptyInputError(path.string() + " has no data rows");

  Matrix x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
  std::copy(values.begin(), values.end(), x.data());

  int c = 0;
  if (declared) {
    c = *declared;
  } else if (has_label_column) {
    c = static_cast<int>(*std::max_element(raw_labels.begin(), raw_labels.end()));
  }
  if (c < 2) throw ParseError(line_no, "cannot determine a class count of at least 2");

  if (!labeled) return Dataset::unlabeled(std::move(x), c);
  std::vector<Label> y(raw_labels.size());
  std::transform(raw_labels.begin(), raw_labels.end(), y.begin(), [](long v) { return static_cast<Label>(v - 1); });
  return Dataset(std::move(x), std::move(y), c);
}

void SyntheticConfig::validate() const {
  if (means.size() < 2) throw ValidationError("synthetic mixture needs at least 2 classes");
  const auto d = means.front().size();
  if (d == 0) throw ValidationError("synthetic mixture needs at least 1 feature");
  for (const auto& m : means)
    if (m.size() != d) throw ValidationError("class means have inconsistent dimension");
  if (!(covariance_scale > 0.0) || !std::isfinite(covariance_scale))
    throw ValidationError("covariance scale must be strictly positive");
  if (priors.size() != means.size()) throw ValidationError("priors length must equal class count");
  double total = 0.0;
  for (double p : priors) {
    if (!(p >= 0.0)) throw ValidationError("priors must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("priors must sum to 1");
}

PosteriorOracle::PosteriorOracle(SyntheticConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

Vector PosteriorOracle::posterior(std::span<const double> x) const {
  const int c = cfg_.num_classes();
  if (static_cast<int>(x.size()) != cfg_.num_features()) throw ShapeError("posterior: dimension mismatch");
  Vector logit(c);
  for (int y = 0; y < c; ++y) {
    double dist2 = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double diff = x[j] - cfg_.means[static_cast<std::size_t>(y)][j];
      dist2 += diff * diff;
    }
    const double prior = cfg_.priors[static_cast<std::size_t>(y)];
    logit(y) = prior > 0.0 ? std::log(prior) - dist2 / (2.0 * cfg_.covariance_scale)
                           : -std::numeric_limits<double>::infinity();
  }
  const double mx = logit.maxCoeff();
  Vector p = (logit.array() - mx).exp();
  return p / p.sum();
}

Vector PosteriorOracle::posterior(const Eigen::Ref<const Vector>& x) const {
  return posterior(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

SyntheticSample generate_synthetic(const SyntheticConfig& cfg, long count, std::uint64_t seed) {
  cfg.validate();
  if (count <= 0) throw SizeError("synthetic sample count must be positive");
  const int c = cfg.num_classes();
  const int d = cfg.num_features();
  Rng rng(seed);
  std::discrete_distribution<int> pick_label(cfg.priors.begin(), cfg.priors.end());
  std::normal_distribution<double> gauss(0.0, std::sqrt(cfg.covariance_scale));

  Matrix x(count, d);
  std::vector<Label> y(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    const int label = pick_label(rng);
    y[static_cast<std::size_t>(i)] = label;
    for (int j = 0; j < d; ++j) x(i, j) = cfg.means[static_cast<std::size_t>(label)][static_cast<std::size_t>(j)] + gauss(rng);
  }
  return {Dataset(std::move(x), std::move(y), c), PosteriorOracle(cfg)};
}

}  // namespace ucp
