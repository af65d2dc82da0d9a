#include "genrestack/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "genrestack/error.hpp"
#include "genrestack/random.hpp"

namespace genrestack {

std::uint32_t MetaClassifier::predict(std::span<const std::uint32_t> active) const {
  auto s = scores(active);
  std::uint32_t best = 0;
  for (std::uint32_t k = 1; k < s.size(); ++k)
    if (s[k] > s[best]) best = k;
  return best;
}

RegressionTree::RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw FormatError("regression tree without nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.feature < 0) continue;
    if (n.left <= i || n.right <= i || n.left >= nodes_.size() || n.right >= nodes_.size())
      throw FormatError("regression tree has an invalid child index");
  }
}

double RegressionTree::evaluate(std::span<const std::uint32_t> active) const {
  std::size_t i = 0;
  while (nodes_[i].feature >= 0) {
    const auto f = static_cast<std::uint32_t>(nodes_[i].feature);
    i = std::binary_search(active.begin(), active.end(), f) ? nodes_[i].right : nodes_[i].left;
  }
  return nodes_[i].value;
}

GbdtClassifier::GbdtClassifier(std::size_t class_count, std::size_t feature_count,
                               std::vector<RegressionTree> trees)
    : class_count_(class_count), feature_count_(feature_count), trees_(std::move(trees)) {
  if (class_count_ == 0) throw Error("classifier needs at least one class");
  if (trees_.size() % class_count_ != 0)
    throw FormatError("tree count is not a multiple of the class count");
}

std::vector<double> GbdtClassifier::scores(std::span<const std::uint32_t> active) const {
  std::vector<double> s(class_count_, 0.0);
  for (std::size_t t = 0; t < trees_.size(); ++t) s[t % class_count_] += trees_[t].evaluate(active);
  return s;
}

void GbdtClassifier::write(binary::Writer& out) const {
  out.u32(static_cast<std::uint32_t>(class_count_));
  out.u32(static_cast<std::uint32_t>(feature_count_));
  out.u32(static_cast<std::uint32_t>(trees_.size()));
  for (const auto& tree : trees_) {
    out.u32(static_cast<std::uint32_t>(tree.nodes().size()));
    for (const auto& n : tree.nodes()) {
      out.i32(n.feature);
      out.u32(n.left);
      out.u32(n.right);
      out.f64(n.value);
    }
  }
}

std::unique_ptr<GbdtClassifier> GbdtClassifier::read(binary::Reader& in) {
  auto classes = in.u32();
  auto features = in.u32();
  std::vector<RegressionTree> trees;
  for (auto t = in.count(4); t > 0; --t) {
    std::vector<TreeNode> nodes(in.count(20));
    for (auto& n : nodes) {
      n.feature = in.i32();
      n.left = in.u32();
      n.right = in.u32();
      n.value = in.f64();
      if (n.feature >= 0 && static_cast<std::uint32_t>(n.feature) >= features)
        throw CorruptFileError("corrupt model file: split feature out of range");
    }
    try {
      trees.emplace_back(std::move(nodes));
    } catch (const FormatError& e) {
      throw CorruptFileError(std::string("corrupt model file: ") + e.what());
    }
  }
  if (classes == 0 || trees.size() % classes != 0)
    throw CorruptFileError("corrupt model file: inconsistent tree count");
  return std::make_unique<GbdtClassifier>(classes, features, std::move(trees));
}

GbdtLearner::GbdtLearner(GbdtParams params) : params_(params) {
  if (params_.rounds < 1) throw Error("rounds must be at least 1");
  if (params_.max_depth < 0) throw Error("max_depth must be non-negative");
  if (!(params_.learning_rate > 0.0)) throw Error("learning_rate must be positive");
  if (!(params_.subsample > 0.0 && params_.subsample <= 1.0))
    throw Error("subsample must be in (0, 1]");
}

namespace {

constexpr double kMinGain = 1e-10;
constexpr double kMinHessian = 1e-16;

class TreeBuilder {
 public:
  TreeBuilder(const TrainingSet& data, const GbdtParams& params, const std::vector<double>& grad,
              const std::vector<double>& hess)
      : data_(data),
        params_(params),
        grad_(grad),
        hess_(hess),
        feature_grad_(data.feature_count, 0.0),
        feature_hess_(data.feature_count, 0.0),
        feature_seen_(data.feature_count, 0) {}

  RegressionTree build(std::vector<std::uint32_t> rows) {
    nodes_.clear();
    grow(std::move(rows), 0);
    return RegressionTree(std::move(nodes_));
  }

 private:
  std::uint32_t grow(std::vector<std::uint32_t> rows, int depth) {
    double g = 0.0, h = 0.0;
    for (auto r : rows) {
      g += grad_[r];
      h += hess_[r];
    }
    const auto index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});

    std::int32_t split = depth < params_.max_depth ? best_split(rows, g, h) : -1;
    if (split < 0) {
      nodes_[index].value = -g / (h + params_.l2) * params_.learning_rate;
      return index;
    }
    std::vector<std::uint32_t> left, right;
    const auto f = static_cast<std::uint32_t>(split);
    for (auto r : rows) {
      const auto& active = data_.rows[r];
      (std::binary_search(active.begin(), active.end(), f) ? right : left).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    nodes_[index].feature = split;
    const auto l = grow(std::move(left), depth + 1);
    const auto rgt = grow(std::move(right), depth + 1);
    nodes_[index].left = l;
    nodes_[index].right = rgt;
    return index;
  }

  std::int32_t best_split(const std::vector<std::uint32_t>& rows, double g, double h) {
    touched_.clear();
    for (auto r : rows) {
      for (auto f : data_.rows[r]) {
        if (!feature_seen_[f]) {
          feature_seen_[f] = 1;
          touched_.push_back(f);
        }
        feature_grad_[f] += grad_[r];
        feature_hess_[f] += hess_[r];
      }
    }
    std::sort(touched_.begin(), touched_.end());
    const double lambda = params_.l2;
    const double parent = g * g / (h + lambda);
    double best_gain = kMinGain;
    std::int32_t best = -1;
    for (auto f : touched_) {
      const double gr = feature_grad_[f], hr = feature_hess_[f];
      const double gl = g - gr, hl = h - hr;
      if (hr >= params_.min_child_weight && hl >= params_.min_child_weight) {
        const double gain = gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent;
        if (gain > best_gain) {
          best_gain = gain;
          best = static_cast<std::int32_t>(f);
        }
      }
      feature_grad_[f] = feature_hess_[f] = 0.0;
      feature_seen_[f] = 0;
    }
    return best;
  }

  const TrainingSet& data_;
  const GbdtParams& params_;
  const std::vector<double>& grad_;
  const std::vector<double>& hess_;
  std::vector<double> feature_grad_;
  std::vector<double> feature_hess_;
  std::vector<std::uint8_t> feature_seen_;
  std::vector<std::uint32_t> touched_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

std::unique_ptr<MetaClassifier> GbdtLearner::fit(const TrainingSet& data) const {
  const std::size_t n = data.rows.size();
  const std::size_t k_count = data.class_count;
  if (n == 0) throw Error("cannot fit a classifier on zero rows");
  if (k_count == 0) throw Error("cannot fit a classifier with zero classes");
  if (data.labels.size() != n) throw Error("label count does not match row count");
  for (std::size_t i = 0; i < n; ++i) {
    if (data.labels[i] >= k_count) throw Error("label outside the class range");
    const auto& row = data.rows[i];
    if (!std::is_sorted(row.begin(), row.end()) ||
        std::adjacent_find(row.begin(), row.end()) != row.end())
      throw Error("row features must be strictly ascending");
    if (!row.empty() && row.back() >= data.feature_count) throw Error("feature index out of range");
  }

  std::vector<double> margin(n * k_count, 0.0);
  std::vector<double> prob(n * k_count, 0.0);
  std::vector<double> grad(n), hess(n);
  std::vector<RegressionTree> trees;
  trees.reserve(static_cast<std::size_t>(params_.rounds) * k_count);

  for (int round = 0; round < params_.rounds; ++round) {
    std::vector<std::uint32_t> rows;
    if (params_.subsample < 1.0) {
      Rng rng(mix_seed(params_.seed, static_cast<std::uint64_t>(round)));
      for (std::uint32_t i = 0; i < n; ++i)
        if (rng.uniform() < params_.subsample) rows.push_back(i);
      if (rows.empty()) rows.push_back(static_cast<std::uint32_t>(rng.bounded(n)));
    } else {
      rows.resize(n);
      std::iota(rows.begin(), rows.end(), 0u);
    }

    for (std::size_t i = 0; i < n; ++i) {
      const double* m = &margin[i * k_count];
      const double top = *std::max_element(m, m + k_count);
      double z = 0.0;
      for (std::size_t k = 0; k < k_count; ++k) z += std::exp(m[k] - top);
      for (std::size_t k = 0; k < k_count; ++k) prob[i * k_count + k] = std::exp(m[k] - top) / z;
    }

    const std::size_t first = trees.size();
    for (std::size_t k = 0; k < k_count; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        const double p = prob[i * k_count + k];
        grad[i] = p - (data.labels[i] == k ? 1.0 : 0.0);
        hess[i] = std::max(2.0 * p * (1.0 - p), kMinHessian);
      }
      TreeBuilder builder(data, params_, grad, hess);
      trees.push_back(builder.build(rows));
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < k_count; ++k)
        margin[i * k_count + k] += trees[first + k].evaluate(data.rows[i]);
  }
  return std::make_unique<GbdtClassifier>(k_count, data.feature_count, std::move(trees));
}

}  // namespace genrestack
