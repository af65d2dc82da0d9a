#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "genrestack/binary_io.hpp"

namespace genrestack {

// Sparse binary design matrix: each row lists its active feature indices in
// ascending order.
struct TrainingSet {
  std::size_t feature_count = 0;
  std::size_t class_count = 0;
  std::vector<std::vector<std::uint32_t>> rows;
  std::vector<std::uint32_t> labels;
};

// Multiclass scorer over sparse binary rows; the predicted class is the
// argmax of scores() with ties to the lowest class index.
class MetaClassifier {
 public:
  virtual ~MetaClassifier() = default;

  virtual std::string kind() const = 0;
  virtual std::size_t class_count() const = 0;
  virtual std::vector<double> scores(std::span<const std::uint32_t> active) const = 0;
  virtual void write(binary::Writer& out) const = 0;

  std::uint32_t predict(std::span<const std::uint32_t> active) const;
};

class MetaLearner {
 public:
  virtual ~MetaLearner() = default;
  virtual std::unique_ptr<MetaClassifier> fit(const TrainingSet& data) const = 0;
};

struct GbdtParams {
  int rounds = 100;
  int max_depth = 3;
  double learning_rate = 0.3;
  double l2 = 1.0;                // leaf weight regularisation
  double min_child_weight = 1.0;  // minimum hessian sum per child
  double subsample = 1.0;         // row fraction per round, drawn with seed
  std::uint64_t seed = 1;

  bool operator==(const GbdtParams&) const = default;
};

// Depth-limited regression tree over binary features. A split on feature f
// sends rows without f left and rows with f right.
struct TreeNode {
  std::int32_t feature = -1;  // -1 for a leaf
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  double value = 0.0;  // leaf output, shrinkage already applied

  bool operator==(const TreeNode&) const = default;
};

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes);

  double evaluate(std::span<const std::uint32_t> active) const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }

 private:
  std::vector<TreeNode> nodes_;
};

// Boosted trees with one tree per class per round on softmax cross-entropy
// gradients (per-class logits are additive tree outputs). Splits are exact
// and greedy; equal gains go to the lowest feature index.
class GbdtClassifier final : public MetaClassifier {
 public:
  GbdtClassifier(std::size_t class_count, std::size_t feature_count,
                 std::vector<RegressionTree> trees);

  std::string kind() const override { return "gbdt"; }
  std::size_t class_count() const override { return class_count_; }
  std::vector<double> scores(std::span<const std::uint32_t> active) const override;
  void write(binary::Writer& out) const override;

  static std::unique_ptr<GbdtClassifier> read(binary::Reader& in);

  std::size_t feature_count() const { return feature_count_; }
  // Round-major: tree r * class_count + k adds to class k in round r.
  const std::vector<RegressionTree>& trees() const { return trees_; }

 private:
  std::size_t class_count_;
  std::size_t feature_count_;
  std::vector<RegressionTree> trees_;
};

class GbdtLearner final : public MetaLearner {
 public:
  explicit GbdtLearner(GbdtParams params = {});

  std::unique_ptr<MetaClassifier> fit(const TrainingSet& data) const override;
  const GbdtParams& params() const { return params_; }

 private:
  GbdtParams params_;
};

}  // namespace genrestack
