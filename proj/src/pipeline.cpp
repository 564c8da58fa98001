#include "hyperpipe/pipeline.hpp"

#include <set>

#include "hyperpipe/error.hpp"
#include "hyperpipe/log.hpp"

namespace hyperpipe {

namespace {

std::atomic<std::uint64_t> g_transformer_fits{0};

void check_name(const std::string& name) {
  if (name.empty()) throw ValidationError("pipeline node names must be non-empty");
  if (name.find("__") != std::string::npos)
    throw ValidationError("pipeline node name '" + name + "' must not contain '__'");
}

}  // namespace

std::string to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::element: return "element";
    case NodeKind::switch_node: return "switch";
    case NodeKind::stack: return "stack";
    case NodeKind::branch: return "branch";
    case NodeKind::callback: return "callback";
  }
  return "element";
}

CallbackFn shape_logger(std::shared_ptr<std::vector<Shape>> sink) {
  return [sink](CallbackContext& ctx) {
    log::debug(ctx.node_name + ": " + std::to_string(ctx.x.rows()) + " x " + std::to_string(ctx.x.cols()) +
               (ctx.fitting ? " (fit)" : " (predict)"));
    if (sink) sink->push_back({ctx.x.rows(), ctx.x.cols()});
  };
}

// ------------------------------------------------------------------- Node

Node Node::element(std::string name, const std::string& keyword, ParamMap fixed_params,
                   HyperparameterMap hyperparameters, bool test_disabled, const Registry& registry) {
  auto el = registry.create(keyword, fixed_params);
  Node n = element(std::move(name), std::move(el), std::move(hyperparameters), test_disabled);
  n.fixed_params_ = std::move(fixed_params);
  return n;
}

Node Node::element(std::string name, std::unique_ptr<Element> element, HyperparameterMap hyperparameters,
                   bool test_disabled) {
  check_name(name);
  if (!element) throw ValidationError("element node '" + name + "' has no element");
  std::set<std::string> known;
  for (const auto& spec : element->schema()) known.insert(spec.name);
  for (const auto& [param, spec] : hyperparameters) {
    if (!known.count(param))
      throw ValidationError("unknown hyperparameter '" + param + "' for element '" + element->keyword() + "'");
    spec.validate();
  }
  Node n;
  n.name_ = std::move(name);
  n.kind_ = NodeKind::element;
  n.keyword_ = element->keyword();
  n.fixed_params_ = element->params();
  n.element_ = std::move(element);
  n.hyperparameters_ = std::move(hyperparameters);
  n.test_disabled_ = test_disabled;
  return n;
}

Node Node::switch_of(std::string name, std::vector<Node> children) {
  check_name(name);
  if (children.empty()) throw ValidationError("switch '" + name + "' needs at least one child");
  Node n;
  n.name_ = std::move(name);
  n.kind_ = NodeKind::switch_node;
  n.children_ = std::move(children);
  return n;
}

Node Node::stack(std::string name, std::vector<Node> children, bool use_probabilities) {
  check_name(name);
  if (children.empty()) throw ValidationError("stack '" + name + "' needs at least one child");
  Node n;
  n.name_ = std::move(name);
  n.kind_ = NodeKind::stack;
  n.children_ = std::move(children);
  n.use_probabilities_ = use_probabilities;
  return n;
}

Node Node::branch(std::string name, std::vector<Node> children) {
  check_name(name);
  if (children.empty()) throw ValidationError("branch '" + name + "' needs at least one child");
  Node n;
  n.name_ = std::move(name);
  n.kind_ = NodeKind::branch;
  n.children_ = std::move(children);
  return n;
}

Node Node::callback(std::string name, CallbackFn fn, std::string delegate_name) {
  check_name(name);
  if (!fn) throw ValidationError("callback '" + name + "' has no delegate");
  Node n;
  n.name_ = std::move(name);
  n.kind_ = NodeKind::callback;
  n.delegate_ = std::move(fn);
  n.delegate_name_ = std::move(delegate_name);
  return n;
}

Node::Node(const Node& other)
    : name_(other.name_),
      kind_(other.kind_),
      children_(other.children_),
      element_(other.element_ ? other.element_->clone() : nullptr),
      keyword_(other.keyword_),
      fixed_params_(other.fixed_params_),
      hyperparameters_(other.hyperparameters_),
      assignments_(other.assignments_),
      test_disabled_(other.test_disabled_),
      disabled_(other.disabled_),
      active_child_(other.active_child_),
      use_probabilities_(other.use_probabilities_),
      delegate_(other.delegate_),
      delegate_name_(other.delegate_name_) {}

Node& Node::operator=(const Node& other) {
  if (this != &other) {
    Node copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void Node::set_active_child(std::size_t index) {
  if (kind_ != NodeKind::switch_node) throw ValidationError("node '" + name_ + "' is not a switch");
  if (index >= children_.size())
    throw ValidationError("switch '" + name_ + "' has no child " + std::to_string(index));
  active_child_ = index;
}

bool Node::is_transformer() const {
  if (kind_ != NodeKind::element) return false;
  const auto caps = element_->capabilities();
  return caps.can_transform && !caps.can_predict;
}

bool Node::is_estimator() const { return kind_ == NodeKind::element && element_->capabilities().can_predict; }

// ------------------------------------------------------- descriptors, keys

std::string node_descriptor(const Node& node) {
  std::string d = to_string(node.kind()) + "(" + node.name();
  if (node.disabled()) return d + ";disabled)";
  switch (node.kind()) {
    case NodeKind::element:
      d += ";" + node.keyword() + ";" + canonical(node.element()->params()) + ";seed=" +
           std::to_string(node.element()->seed());
      break;
    case NodeKind::switch_node:
      d += ";active=" + std::to_string(node.active_child()) + ";" +
           node_descriptor(node.children()[node.active_child()]);
      break;
    case NodeKind::stack:
      d += node.use_probabilities() ? ";proba" : ";labels";
      [[fallthrough]];
    case NodeKind::branch:
      for (const auto& c : node.children()) d += ";" + node_descriptor(c);
      break;
    case NodeKind::callback:
      break;
  }
  return d + ")";
}

Digest cache_key(const std::string& upstream_descriptor, const std::string& element_descriptor,
                 const Digest& input_fingerprint, CacheOp op) {
  Sha256 h;
  h.update_str("hyperpipe.stage.v1");
  h.update_str(upstream_descriptor);
  h.update_str(element_descriptor);
  h.update(std::string_view(reinterpret_cast<const char*>(input_fingerprint.data()), input_fingerprint.size()));
  h.update_str(op == CacheOp::fit ? "fit" : "transform");
  return h.finish();
}

std::uint64_t transformer_fit_count() noexcept { return g_transformer_fits.load(); }

// ------------------------------------------------------------- traversal

namespace {

void invoke_callback(const Node& node, const FeatureMatrix& x, const TargetVector* y, const ExtraData& extras,
                     bool fitting) {
  CallbackContext ctx{node.name(), fitting, x, y ? std::optional<TargetVector>(*y) : std::nullopt, extras};
  try {
    node.delegate()(ctx);
  } catch (const std::exception& e) {
    throw CallbackError(node.name(), e.what());
  }
}

FeatureMatrix column_of(const std::vector<double>& values, const std::string& name) {
  return FeatureMatrix(values.size(), 1, values, {name});
}

// Predict-mode pass through one node. `proba` asks an estimator at the end of
// this node for class probabilities instead of labels.
FeatureMatrix forward(const Node& node, const FeatureMatrix& x, const ExtraData& extras, bool proba) {
  if (node.disabled()) return x;
  switch (node.kind()) {
    case NodeKind::callback:
      invoke_callback(node, x, nullptr, extras, false);
      return x;
    case NodeKind::element: {
      const Element& el = *node.element();
      const auto caps = el.capabilities();
      if (caps.applies_during == AppliesDuring::fit_only) return x;
      if (caps.can_predict) {
        if (proba && caps.can_predict_proba) {
          FeatureMatrix p = el.predict_proba(x, extras);
          std::vector<std::string> names;
          for (double c : el.classes()) names.push_back(node.name() + "_" + display(static_cast<std::int64_t>(c)));
          if (names.size() == p.cols()) p.set_column_names(std::move(names));
          return p;
        }
        return column_of(el.predict(x, extras), node.name());
      }
      return el.transform(x, extras);
    }
    case NodeKind::switch_node:
      return forward(node.children()[node.active_child()], x, extras, proba);
    case NodeKind::branch: {
      FeatureMatrix cur = x;
      const auto& ch = node.children();
      for (std::size_t i = 0; i < ch.size(); ++i) cur = forward(ch[i], cur, extras, proba && i + 1 == ch.size());
      return cur;
    }
    case NodeKind::stack: {
      std::vector<FeatureMatrix> parts;
      for (const auto& c : node.children()) parts.push_back(forward(c, x, extras, node.use_probabilities()));
      return FeatureMatrix::hconcat(parts);
    }
  }
  return x;
}

std::vector<double> terminal_predict(const Node& node, const FeatureMatrix& x, const ExtraData& extras) {
  switch (node.kind()) {
    case NodeKind::element:
      return node.element()->predict(x, extras);
    case NodeKind::switch_node:
      return terminal_predict(node.children()[node.active_child()], x, extras);
    case NodeKind::branch: {
      FeatureMatrix cur = x;
      const auto& ch = node.children();
      for (std::size_t i = 0; i + 1 < ch.size(); ++i) cur = forward(ch[i], cur, extras, false);
      return terminal_predict(ch.back(), cur, extras);
    }
    default:
      throw ValidationError("last pipeline node '" + node.name() + "' cannot predict");
  }
}

bool can_terminate(const Node& node) {
  if (node.test_disabled()) return false;
  switch (node.kind()) {
    case NodeKind::element:
      return node.is_estimator();
    case NodeKind::switch_node:
      for (const auto& c : node.children())
        if (!can_terminate(c)) return false;
      return true;
    case NodeKind::branch:
      return can_terminate(node.children().back());
    default:
      return false;
  }
}

struct Fitter {
  const FitOptions& options;

  void announce(const Node& node, const Dataset& stream) const {
    if (options.on_fit) options.on_fit(node.name(), stream.row_ids);
  }

  // `terminal`: an estimator here only needs fitting, not predictions.
  void fit(Node& node, Dataset& stream, bool terminal) const {
    if (node.disabled()) return;
    switch (node.kind()) {
      case NodeKind::callback:
        invoke_callback(node, stream.x, &stream.y, stream.extras, true);
        return;
      case NodeKind::element:
        fit_element(node, stream, terminal);
        return;
      case NodeKind::switch_node:
        fit(node.children()[node.active_child()], stream, terminal);
        return;
      case NodeKind::branch: {
        auto& ch = node.children();
        for (std::size_t i = 0; i < ch.size(); ++i) fit(ch[i], stream, terminal && i + 1 == ch.size());
        return;
      }
      case NodeKind::stack: {
        std::vector<FeatureMatrix> parts;
        for (auto& c : node.children()) {
          Dataset copy = stream;
          fit(c, copy, true);
          parts.push_back(forward(c, stream.x, stream.extras, node.use_probabilities()));
        }
        stream.x = FeatureMatrix::hconcat(parts);
        return;
      }
    }
  }

  void fit_element(Node& node, Dataset& stream, bool terminal) const {
    Element& el = *node.element();
    const auto caps = el.capabilities();
    announce(node, stream);
    if (caps.modifies_targets) {
      Resampled r = el.resample(stream.x, stream.y);
      std::vector<std::size_t> ids(r.source_rows.size());
      for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = stream.row_ids[r.source_rows[i]];
      ExtraData extras = stream.extras.select_rows(r.source_rows);
      stream = Dataset(std::move(r.x), std::move(r.y), std::move(extras), std::move(ids));
      ++g_transformer_fits;
      return;
    }
    if (caps.can_predict) {
      el.fit(stream.x, stream.y, stream.extras);
      if (!terminal) stream.x = column_of(el.predict(stream.x, stream.extras), node.name());
      return;
    }
    el.fit(stream.x, stream.y, stream.extras);
    stream.x = el.transform(stream.x, stream.extras);
    ++g_transformer_fits;
  }
};

template <typename NodeT, typename Out>
void collect_leaves(NodeT& node, Out& out) {
  if (node.kind() == NodeKind::element) out.push_back(&node);
  for (auto& c : node.children()) collect_leaves(c, out);
}

template <typename NodeT>
NodeT* find_in(std::vector<NodeT>& nodes, const std::string& name) {
  for (auto& n : nodes) {
    if (n.name() == name) return &n;
    if (auto* hit = find_in(n.children(), name)) return hit;
  }
  return nullptr;
}

template <typename NodeT>
const NodeT* find_in(const std::vector<NodeT>& nodes, const std::string& name) {
  for (const auto& n : nodes) {
    if (n.name() == name) return &n;
    if (const auto* hit = find_in(n.children(), name)) return hit;
  }
  return nullptr;
}

void gather_names(const std::vector<Node>& nodes, std::set<std::string>& seen) {
  for (const auto& n : nodes) {
    if (!seen.insert(n.name()).second) throw ValidationError("duplicate pipeline node name '" + n.name() + "'");
    gather_names(n.children(), seen);
  }
}

void seed_nodes(std::vector<Node>& nodes, std::uint64_t master, const ScopePath& scope) {
  for (auto& n : nodes) {
    if (n.kind() == NodeKind::element) {
      ScopePath path = scope;
      path.emplace_back(n.name());
      path.emplace_back(canonical(n.assignments()));
      n.element()->set_seed(derive_seed(master, path));
    }
    seed_nodes(n.children(), master, scope);
  }
}

}  // namespace

// --------------------------------------------------------------- Pipeline

Pipeline::Pipeline(std::vector<Node> nodes) : nodes_(std::move(nodes)) { validate(); }

Node* Pipeline::find(const std::string& name) { return find_in(nodes_, name); }
const Node* Pipeline::find(const std::string& name) const { return find_in(nodes_, name); }

void Pipeline::validate() const {
  if (nodes_.empty()) throw ValidationError("pipeline has no nodes");
  std::set<std::string> seen;
  gather_names(nodes_, seen);
  const Node& last = nodes_.back();
  if (last.kind() == NodeKind::callback)
    throw ValidationError("callback '" + last.name() + "' cannot be the last pipeline node");
  if (!can_terminate(last))
    throw ValidationError("last pipeline node '" + last.name() + "' cannot predict");
}

void Pipeline::apply_config(const Config& config) {
  for (const auto& [key, value] : config) {
    const auto sep = key.find("__");
    Node* node = sep == std::string::npos ? nullptr : find(key.substr(0, sep));
    if (!node) throw ValidationError("unknown config key '" + key + "'");
    const std::string param = key.substr(sep + 2);
    if (param == "disabled") {
      const bool off = as_bool(value, key);
      if (off && !node->test_disabled())
        throw ValidationError("config key '" + key + "': node '" + node->name() + "' cannot be disabled");
      node->set_disabled(off);
    } else if (param == "current_element") {
      if (node->kind() != NodeKind::switch_node) throw ValidationError("unknown config key '" + key + "'");
      const auto idx = as_int(value, key);
      if (idx < 0) throw ValidationError("config key '" + key + "': negative child index");
      node->set_active_child(static_cast<std::size_t>(idx));
    } else {
      if (node->kind() != NodeKind::element) throw ValidationError("unknown config key '" + key + "'");
      bool known = false;
      for (const auto& spec : node->element()->schema()) known = known || spec.name == param;
      if (!known) throw ValidationError("unknown config key '" + key + "'");
      node->element()->set_param(param, value);
      node->record_assignment(param, value);
    }
  }
  fitted_ = false;
}

void Pipeline::assign_seeds(std::uint64_t master, const ScopePath& scope) { seed_nodes(nodes_, master, scope); }

void Pipeline::fit(const Dataset& train, const FitOptions& options) {
  validate();
  train.validate();
  fitted_ = false;
  Fitter fitter{options};
  Dataset stream = train;

  // Leading top-level transformers are cacheable: their output depends only
  // on the pipeline input and the stages before them.
  StageCache* cache = options.cache;
  Digest input_id{};
  if (cache) {
    Sha256 h;
    h.update_str(fingerprint(train).hex());
    h.update_u64(train.row_ids.size());
    for (auto id : train.row_ids) h.update_u64(id);
    input_id = h.finish();
  }
  std::string upstream;

  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    Node& node = nodes_[i];
    const bool last = i + 1 == nodes_.size();
    const bool cacheable = cache && !node.disabled() && node.is_transformer();
    if (cache && !cacheable && !node.disabled() && node.kind() != NodeKind::callback) cache = nullptr;

    if (cacheable) {
      const std::string descriptor = node_descriptor(node);
      const Digest key = cache_key(upstream, descriptor, input_id, CacheOp::fit);
      if (auto hit = cache->load(key)) {
        ByteReader in(hit->state);
        node.element()->load_state(in);
        stream = std::move(hit->data);
      } else {
        fitter.fit(node, stream, last);
        ByteWriter out;
        node.element()->save_state(out);
        cache->store(key, StageOutput{out.take(), stream});
      }
      upstream += descriptor + "\n";
      continue;
    }
    if (cache) upstream += node_descriptor(node) + "\n";
    fitter.fit(node, stream, last);
  }
  n_features_ = train.x.cols();
  target_kind_ = train.y.kind();
  fitted_ = true;
}

std::vector<double> Pipeline::predict(const FeatureMatrix& x, const ExtraData& extras) const {
  if (!fitted_) throw StateError("pipeline is not fitted");
  if (x.cols() != n_features_)
    throw ValidationError("expected " + std::to_string(n_features_) + " feature columns, got " +
                          std::to_string(x.cols()));
  for (const auto& [name, channel] : extras.channels())
    if (channel.rows() != x.rows()) throw ValidationError("extras channel '" + name + "' row count does not match");
  FeatureMatrix cur = x;
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) cur = forward(nodes_[i], cur, extras, false);
  auto out = terminal_predict(nodes_.back(), cur, extras);
  if (out.size() != x.rows()) throw DataError("pipeline changed the number of rows at predict time");
  return out;
}

std::vector<Node*> Pipeline::leaves() {
  std::vector<Node*> out;
  for (auto& n : nodes_) collect_leaves(n, out);
  return out;
}

std::vector<const Node*> Pipeline::leaves() const {
  std::vector<const Node*> out;
  for (const auto& n : nodes_) collect_leaves(n, out);
  return out;
}

}  // namespace hyperpipe
