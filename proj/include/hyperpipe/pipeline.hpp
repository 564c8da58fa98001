#pragma once

// Pipelines: an ordered list of nodes where estimators may sit anywhere.
//
// Fitting walks the nodes on a running (X, y, extras, row ids) stream:
//   - transformers fit then transform X;
//   - target-modifying transformers (resamplers) replace X and y and may
//     duplicate or drop rows; extras and row ids follow their source rows;
//   - an estimator that is not last fits, then its predictions become the
//     new single-column X; the last estimator only fits;
//   - Switch recurses into its active child, Branch into its sub-sequence;
//   - Stack fits every child on the same input and concatenates their
//     predict-mode outputs column-wise (children in declaration order;
//     class-probability columns ascending by label);
//   - callbacks observe a copy of the stream and cannot change it.
// Prediction repeats the walk with fit-only elements turned into identity.

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hyperpipe/data.hpp"
#include "hyperpipe/digest.hpp"
#include "hyperpipe/elements/element.hpp"
#include "hyperpipe/elements/registry.hpp"
#include "hyperpipe/hyperparameters.hpp"
#include "hyperpipe/params.hpp"
#include "hyperpipe/seed.hpp"

namespace hyperpipe {

/// Flat assignment "node__param" -> value. Special parameters:
/// "node__disabled" (bool) and "switch__current_element" (child index).
using Config = ParamMap;

enum class NodeKind { element, switch_node, stack, branch, callback };

std::string to_string(NodeKind kind);

/// What a callback delegate sees. Everything is a copy.
struct CallbackContext {
  std::string node_name;
  bool fitting = false;
  FeatureMatrix x;
  std::optional<TargetVector> y;  // absent at predict time
  ExtraData extras;
};

using CallbackFn = std::function<void(CallbackContext&)>;

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// The built-in "shape_logger" delegate: logs (rows, cols) at debug level
/// and appends them to `sink` when one is given.
CallbackFn shape_logger(std::shared_ptr<std::vector<Shape>> sink = nullptr);

class Node {
 public:
  /// Leaf created from the registry by keyword; fixed params applied at creation.
  static Node element(std::string name, const std::string& keyword, ParamMap fixed_params = {},
                      HyperparameterMap hyperparameters = {}, bool test_disabled = false,
                      const Registry& registry = default_registry());
  /// Leaf around a caller-provided element instance.
  static Node element(std::string name, std::unique_ptr<Element> element, HyperparameterMap hyperparameters = {},
                      bool test_disabled = false);
  /// OR: exactly one child is active (child 0 by default).
  static Node switch_of(std::string name, std::vector<Node> children);
  /// AND: every child runs on the same input; outputs are concatenated.
  static Node stack(std::string name, std::vector<Node> children, bool use_probabilities = false);
  /// Sub-pipeline acting as one node.
  static Node branch(std::string name, std::vector<Node> children);
  /// `delegate_name` lets an archive rebind the delegate on load.
  static Node callback(std::string name, CallbackFn fn, std::string delegate_name = {});

  Node(const Node& other);
  Node& operator=(const Node& other);
  Node(Node&&) noexcept = default;
  Node& operator=(Node&&) noexcept = default;
  ~Node() = default;

  const std::string& name() const noexcept { return name_; }
  NodeKind kind() const noexcept { return kind_; }

  std::vector<Node>& children() noexcept { return children_; }
  const std::vector<Node>& children() const noexcept { return children_; }

  Element* element() noexcept { return element_.get(); }
  const Element* element() const noexcept { return element_.get(); }
  const std::string& keyword() const noexcept { return keyword_; }
  const ParamMap& fixed_params() const noexcept { return fixed_params_; }
  const HyperparameterMap& hyperparameters() const noexcept { return hyperparameters_; }

  bool test_disabled() const noexcept { return test_disabled_; }
  Node& set_test_disabled(bool on) noexcept {
    test_disabled_ = on;
    return *this;
  }
  bool disabled() const noexcept { return disabled_; }
  void set_disabled(bool on) noexcept { disabled_ = on; }

  std::size_t active_child() const noexcept { return active_child_; }
  void set_active_child(std::size_t index);
  bool use_probabilities() const noexcept { return use_probabilities_; }

  const CallbackFn& delegate() const noexcept { return delegate_; }
  const std::string& delegate_name() const noexcept { return delegate_name_; }

  /// Parameter values this node's element received from the current config.
  const ParamMap& assignments() const noexcept { return assignments_; }
  void record_assignment(const std::string& param, const ParamValue& value) { assignments_[param] = value; }

  /// Leaf transformer that is neither an estimator nor a callback.
  bool is_transformer() const;
  bool is_estimator() const;

 private:
  Node() = default;

  std::string name_;
  NodeKind kind_ = NodeKind::element;
  std::vector<Node> children_;
  std::unique_ptr<Element> element_;
  std::string keyword_;
  ParamMap fixed_params_;
  HyperparameterMap hyperparameters_;
  ParamMap assignments_;
  bool test_disabled_ = false;
  bool disabled_ = false;
  std::size_t active_child_ = 0;
  bool use_probabilities_ = false;
  CallbackFn delegate_;
  std::string delegate_name_;
};

/// A fitted transformer stage as stored in the stage cache.
struct StageOutput {
  std::string state;  // Element::save_state bytes
  Dataset data;       // training stream after the stage
};

/// Storage for fitted transformer stages, keyed by cache_key().
class StageCache {
 public:
  virtual ~StageCache() = default;
  virtual std::optional<StageOutput> load(const Digest& key) = 0;
  virtual void store(const Digest& key, const StageOutput& output) = 0;
};

enum class CacheOp { fit, transform };

/// Key for a cached stage: everything upstream, the stage itself, and the
/// identity of the data the pipeline was fitted on.
Digest cache_key(const std::string& upstream_descriptor, const std::string& element_descriptor,
                 const Digest& input_fingerprint, CacheOp op);

struct FitOptions {
  /// Called before every element fit with the original row ids it trains on.
  std::function<void(const std::string& node, std::span<const std::size_t> row_ids)> on_fit;
  /// Leading top-level transformers are served from here when set.
  StageCache* cache = nullptr;
};

class Pipeline {
 public:
  Pipeline() = default;
  explicit Pipeline(std::vector<Node> nodes);

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::vector<Node>& nodes() noexcept { return nodes_; }

  /// Depth-first lookup by node name.
  Node* find(const std::string& name);
  const Node* find(const std::string& name) const;

  /// Structural checks: non-empty, unique names without "__", non-empty
  /// composites, and a last node able to predict.
  void validate() const;

  /// Applies the config to a pipeline; throws ValidationError on unknown
  /// keys or invalid values. Leaves the pipeline unfitted.
  void apply_config(const Config& config);

  /// Seeds every element from (master, scope, node name, the node's own
  /// config assignments), so a node's seed does not depend on where else
  /// the config points.
  void assign_seeds(std::uint64_t master, const ScopePath& scope);

  void fit(const Dataset& train, const FitOptions& options = {});
  std::vector<double> predict(const FeatureMatrix& x, const ExtraData& extras = {}) const;

  bool fitted() const noexcept { return fitted_; }
  std::size_t n_features() const noexcept { return n_features_; }
  TargetKind target_kind() const noexcept { return target_kind_; }

  /// Every leaf element node in depth-first order.
  std::vector<Node*> leaves();
  std::vector<const Node*> leaves() const;

  /// Restores fit bookkeeping after leaf states were loaded externally.
  void mark_fitted(std::size_t n_features, TargetKind kind) noexcept {
    fitted_ = true;
    n_features_ = n_features;
    target_kind_ = kind;
  }

 private:
  std::vector<Node> nodes_;
  bool fitted_ = false;
  std::size_t n_features_ = 0;
  TargetKind target_kind_ = TargetKind::classification;
};

/// Canonical text identifying a node's structure, parameters, seed, and
/// routing. Used for cache keys.
std::string node_descriptor(const Node& node);

/// Number of transformer fits performed in this process (cache hits excluded).
std::uint64_t transformer_fit_count() noexcept;

}  // namespace hyperpipe
