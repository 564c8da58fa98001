#pragma once

// Configuration spaces over a pipeline and the optimizers that walk them.
//
// Grid order: nodes in declaration order, and within an element its
// parameters by name; the last factor varies fastest. An element with
// test_disabled contributes one extra configuration, {node__disabled: true},
// after its enabled ones. A Switch contributes the disjoint union over its
// children of {switch__current_element: i} x (child grid).

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hyperpipe/pipeline.hpp"

namespace hyperpipe {

std::vector<Config> grid_configurations(const Pipeline& pipeline);

/// Closed-form size of grid_configurations(pipeline).
std::size_t grid_size(const Pipeline& pipeline);

struct OptimizerSpec {
  /// "grid_search" | "random_grid_search" | "switch_optimizer"
  std::string name = "grid_search";
  /// random_grid_search: n_configurations (int). switch_optimizer:
  /// sub_strategy (name), n_configurations (per child).
  ParamMap params;
};

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void prepare(const Pipeline& pipeline, std::uint64_t seed) = 0;
  /// Next configuration, or nullopt once exhausted. Throws StateError before prepare.
  virtual std::optional<Config> ask() = 0;
  virtual void tell(const Config& config, double performance, bool greater_is_better) = 0;
};

/// Throws ValidationError for unknown names or bad parameters.
std::unique_ptr<Optimizer> make_optimizer(const OptimizerSpec& spec);
void validate_optimizer_spec(const OptimizerSpec& spec);

enum class ConstraintStrategy { first, mean, all };

std::string to_string(ConstraintStrategy s);
ConstraintStrategy parse_constraint_strategy(const std::string& text);

/// Minimum performance (maximum, for smaller-is-better metrics) an
/// inner-fold sequence must keep to continue.
struct PerformanceConstraint {
  std::string metric;
  double threshold = 0.0;
  ConstraintStrategy strategy = ConstraintStrategy::first;

  void validate() const;
};

/// False when the partial inner-fold performances violate the constraint.
bool shall_continue(const PerformanceConstraint& constraint, const std::vector<double>& performances);

}  // namespace hyperpipe
