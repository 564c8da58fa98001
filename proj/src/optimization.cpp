#include "hyperpipe/optimization.hpp"

#include <cmath>

#include "hyperpipe/error.hpp"
#include "hyperpipe/metrics.hpp"
#include "hyperpipe/rng.hpp"

namespace hyperpipe {

namespace {

constexpr std::size_t kMaxGrid = 5'000'000;

// Cartesian product of config lists; the last list varies fastest.
std::vector<Config> product(const std::vector<std::vector<Config>>& factors) {
  std::vector<Config> out{Config{}};
  for (const auto& factor : factors) {
    if (factor.empty()) return {};
    if (out.size() * factor.size() > kMaxGrid)
      throw ValidationError("configuration grid exceeds " + std::to_string(kMaxGrid) + " entries");
    std::vector<Config> next;
    next.reserve(out.size() * factor.size());
    for (const auto& prefix : out) {
      for (const auto& part : factor) {
        Config c = prefix;
        c.insert(part.begin(), part.end());
        next.push_back(std::move(c));
      }
    }
    out = std::move(next);
  }
  return out;
}

std::vector<Config> node_grid(const Node& node);

std::vector<Config> sequence_grid(const std::vector<Node>& nodes) {
  std::vector<std::vector<Config>> factors;
  for (const auto& n : nodes) factors.push_back(node_grid(n));
  return product(factors);
}

std::vector<Config> node_grid(const Node& node) {
  std::vector<Config> local;
  switch (node.kind()) {
    case NodeKind::callback:
      return {Config{}};
    case NodeKind::element: {
      std::vector<std::vector<Config>> factors;
      for (const auto& [param, spec] : node.hyperparameters()) {
        std::vector<Config> values;
        for (auto& v : expand_spec(spec)) values.push_back(Config{{node.name() + "__" + param, std::move(v)}});
        if (values.empty())
          throw ValidationError("hyperparameter '" + node.name() + "__" + param + "' has no values");
        factors.push_back(std::move(values));
      }
      local = product(factors);
      break;
    }
    case NodeKind::switch_node: {
      const auto& ch = node.children();
      for (std::size_t i = 0; i < ch.size(); ++i) {
        for (auto& c : node_grid(ch[i])) {
          c[node.name() + "__current_element"] = static_cast<std::int64_t>(i);
          local.push_back(std::move(c));
        }
      }
      break;
    }
    case NodeKind::stack:
    case NodeKind::branch:
      local = sequence_grid(node.children());
      break;
  }
  if (node.test_disabled()) {
    for (auto& c : local) c[node.name() + "__disabled"] = false;
    local.push_back(Config{{node.name() + "__disabled", true}});
  }
  return local;
}

std::size_t node_count(const Node& node) {
  std::size_t n = 1;
  switch (node.kind()) {
    case NodeKind::callback:
      return 1;
    case NodeKind::element:
      for (const auto& [param, spec] : node.hyperparameters()) n *= expand_spec(spec).size();
      break;
    case NodeKind::switch_node:
      n = 0;
      for (const auto& c : node.children()) n += node_count(c);
      break;
    case NodeKind::stack:
    case NodeKind::branch:
      for (const auto& c : node.children()) n *= node_count(c);
      break;
  }
  return n + (node.test_disabled() ? 1 : 0);
}

void require_prepared(bool prepared) {
  if (!prepared) throw StateError("optimizer asked before prepare");
}

std::size_t n_configurations(const ParamMap& params, const std::string& who) {
  auto it = params.find("n_configurations");
  if (it == params.end()) return 10;
  const auto n = as_int(it->second, who + " n_configurations");
  if (n < 1) throw ValidationError(who + " n_configurations must be at least 1");
  return static_cast<std::size_t>(n);
}

/// Walks a fixed list; the base for every strategy here.
class ListOptimizer : public Optimizer {
 public:
  std::optional<Config> ask() override {
    require_prepared(prepared_);
    if (next_ >= list_.size()) return std::nullopt;
    return list_[next_++];
  }
  void tell(const Config&, double, bool) override {}

 protected:
  void set_list(std::vector<Config> list) {
    list_ = std::move(list);
    next_ = 0;
    prepared_ = true;
  }

 private:
  std::vector<Config> list_;
  std::size_t next_ = 0;
  bool prepared_ = false;
};

class GridSearch final : public ListOptimizer {
 public:
  void prepare(const Pipeline& pipeline, std::uint64_t) override { set_list(grid_configurations(pipeline)); }
};

std::vector<Config> random_subset(std::vector<Config> grid, std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const auto order = permutation(grid.size(), rng);
  std::vector<Config> out;
  for (std::size_t i = 0; i < order.size() && out.size() < n; ++i) out.push_back(std::move(grid[order[i]]));
  return out;
}

class RandomGridSearch final : public ListOptimizer {
 public:
  explicit RandomGridSearch(std::size_t n) : n_(n) {}
  void prepare(const Pipeline& pipeline, std::uint64_t seed) override {
    set_list(random_subset(grid_configurations(pipeline), n_, seed));
  }

 private:
  std::size_t n_;
};

/// One sub-search per child of the final Switch, interleaved round-robin.
class SwitchOptimizer final : public ListOptimizer {
 public:
  SwitchOptimizer(std::string sub_strategy, std::size_t n) : sub_(std::move(sub_strategy)), n_(n) {}

  void prepare(const Pipeline& pipeline, std::uint64_t seed) override {
    const Node& last = pipeline.nodes().back();
    if (last.kind() != NodeKind::switch_node)
      throw ValidationError("switch_optimizer needs a Switch as the estimator (last) node");
    const std::string key = last.name() + "__current_element";
    const auto grid = grid_configurations(pipeline);
    std::vector<std::vector<Config>> per_child(last.children().size());
    for (const auto& c : grid) per_child[static_cast<std::size_t>(std::get<std::int64_t>(c.at(key)))].push_back(c);
    for (std::size_t i = 0; i < per_child.size(); ++i) {
      if (sub_ == "random_grid_search")
        per_child[i] = random_subset(std::move(per_child[i]), n_, derive_seed(seed, {std::string("child"),
                                                                                    static_cast<std::int64_t>(i)}));
    }
    std::vector<Config> merged;
    for (std::size_t round = 0;; ++round) {
      bool any = false;
      for (auto& list : per_child) {
        if (round < list.size()) {
          merged.push_back(list[round]);
          any = true;
        }
      }
      if (!any) break;
    }
    set_list(std::move(merged));
  }

 private:
  std::string sub_;
  std::size_t n_;
};

}  // namespace

std::vector<Config> grid_configurations(const Pipeline& pipeline) {
  auto grid = sequence_grid(pipeline.nodes());
  if (grid.empty()) throw ValidationError("configuration grid is empty");
  return grid;
}

std::size_t grid_size(const Pipeline& pipeline) {
  std::size_t n = 1;
  for (const auto& node : pipeline.nodes()) n *= node_count(node);
  return n;
}

void validate_optimizer_spec(const OptimizerSpec& spec) {
  auto allow = [&](std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : spec.params) {
      bool ok = false;
      for (const char* a : keys) ok = ok || k == a;
      if (!ok) throw ValidationError("unknown parameter '" + k + "' for optimizer '" + spec.name + "'");
    }
  };
  if (spec.name == "grid_search") {
    allow({});
  } else if (spec.name == "random_grid_search") {
    allow({"n_configurations"});
    n_configurations(spec.params, spec.name);
  } else if (spec.name == "switch_optimizer") {
    allow({"n_configurations", "sub_strategy"});
    n_configurations(spec.params, spec.name);
    if (auto it = spec.params.find("sub_strategy"); it != spec.params.end()) {
      const auto& s = as_string(it->second, "sub_strategy");
      if (s != "grid_search" && s != "random_grid_search")
        throw ValidationError("unknown switch_optimizer sub_strategy '" + s + "'");
    }
  } else {
    throw ValidationError("unknown optimizer '" + spec.name + "'");
  }
}

std::unique_ptr<Optimizer> make_optimizer(const OptimizerSpec& spec) {
  validate_optimizer_spec(spec);
  if (spec.name == "grid_search") return std::make_unique<GridSearch>();
  const auto n = n_configurations(spec.params, spec.name);
  if (spec.name == "random_grid_search") return std::make_unique<RandomGridSearch>(n);
  std::string sub = "random_grid_search";
  if (auto it = spec.params.find("sub_strategy"); it != spec.params.end()) sub = std::get<std::string>(it->second);
  return std::make_unique<SwitchOptimizer>(sub, n);
}

std::string to_string(ConstraintStrategy s) {
  switch (s) {
    case ConstraintStrategy::first: return "first";
    case ConstraintStrategy::mean: return "mean";
    case ConstraintStrategy::all: return "all";
  }
  return "first";
}

ConstraintStrategy parse_constraint_strategy(const std::string& text) {
  if (text == "first") return ConstraintStrategy::first;
  if (text == "mean") return ConstraintStrategy::mean;
  if (text == "all") return ConstraintStrategy::all;
  throw ValidationError("unknown constraint strategy '" + text + "'");
}

void PerformanceConstraint::validate() const {
  metric_info(metric);
  if (!std::isfinite(threshold)) throw ValidationError("constraint threshold must be finite");
}

bool shall_continue(const PerformanceConstraint& constraint, const std::vector<double>& performances) {
  const bool higher = greater_is_better(constraint.metric);
  if (performances.empty()) return true;
  auto below = [&](double v) { return higher ? v < constraint.threshold : v > constraint.threshold; };
  switch (constraint.strategy) {
    case ConstraintStrategy::first:
      return !below(performances.front());
    case ConstraintStrategy::mean: {
      double sum = 0.0;
      for (double v : performances) sum += v;
      return !below(sum / static_cast<double>(performances.size()));
    }
    case ConstraintStrategy::all:
      for (double v : performances)
        if (!below(v)) return true;
      return false;
  }
  return true;
}

}  // namespace hyperpipe
