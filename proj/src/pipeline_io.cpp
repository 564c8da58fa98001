#include "hyperpipe/pipeline_io.hpp"

#include <set>

#include "hyperpipe/error.hpp"

namespace hyperpipe {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& message) {
  throw ValidationError(where + ": " + message);
}

const Json& require(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const Json& obj, const char* key, const std::string& where) {
  const Json& v = require(obj, key, where);
  if (!v.is_string()) fail(where + "." + key, "expected a string");
  return v.get<std::string>();
}

bool optional_bool(const Json& obj, const char* key, const std::string& where, bool fallback = false) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) fail(where + "." + key, "expected true or false");
  return it->get<bool>();
}

double require_number(const Json& obj, const char* key, const std::string& where) {
  const Json& v = require(obj, key, where);
  if (!v.is_number()) fail(where + "." + key, "expected a number");
  return v.get<double>();
}

void check_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) fail(where, "unknown field '" + it.key() + "'");
  }
}

// Rewrites a ValidationError so it names the field it came from.
template <typename F>
auto at_field(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    if (msg.rfind(where, 0) == 0) throw;
    fail(where, msg);
  }
}

Node node_from_json(const Json& j, const Registry& registry, const std::string& where);

std::vector<Node> children_from_json(const Json& j, const Registry& registry, const std::string& where) {
  const Json& arr = require(j, "children", where);
  if (!arr.is_array()) fail(where + ".children", "expected an array");
  std::vector<Node> out;
  for (std::size_t i = 0; i < arr.size(); ++i)
    out.push_back(node_from_json(arr[i], registry, where + ".children[" + std::to_string(i) + "]"));
  return out;
}

Node node_from_json(const Json& j, const Registry& registry, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  const std::string kind = j.contains("kind") ? require_string(j, "kind", where) : "element";
  const std::string name = require_string(j, "name", where);
  if (kind == "element") {
    check_keys(j,
               {"kind", "name", "keyword", "fixed_params", "hyperparameters", "test_disabled", "params", "seed",
                "disabled"},
               where);
    const std::string keyword = require_string(j, "keyword", where);
    if (!registry.contains(keyword)) fail(where + ".keyword", "unknown element '" + keyword + "'");
    ParamMap fixed;
    if (auto it = j.find("fixed_params"); it != j.end()) fixed = config_from_json(*it, where + ".fixed_params");
    HyperparameterMap hps;
    if (auto it = j.find("hyperparameters"); it != j.end()) {
      if (!it->is_object()) fail(where + ".hyperparameters", "expected an object");
      for (auto h = it->begin(); h != it->end(); ++h)
        hps[h.key()] = hyperparameter_from_json(*h, where + ".hyperparameters." + h.key());
    }
    const bool td = optional_bool(j, "test_disabled", where);
    Node node = at_field(where, [&] { return Node::element(name, keyword, fixed, hps, td, registry); });
    if (auto it = j.find("params"); it != j.end()) {
      const ParamMap params = config_from_json(*it, where + ".params");
      at_field(where + ".params", [&] {
        node.element()->set_params(params);
        return 0;
      });
    }
    if (auto it = j.find("seed"); it != j.end()) {
      if (!it->is_number_unsigned() && !it->is_number_integer()) fail(where + ".seed", "expected an integer");
      node.element()->set_seed(it->get<std::uint64_t>());
    }
    node.set_disabled(optional_bool(j, "disabled", where));
    return node;
  }
  if (kind == "switch") {
    check_keys(j, {"kind", "name", "children", "active_child"}, where);
    Node node = at_field(where, [&] { return Node::switch_of(name, children_from_json(j, registry, where)); });
    if (auto it = j.find("active_child"); it != j.end()) {
      if (!it->is_number_unsigned()) fail(where + ".active_child", "expected a child index");
      at_field(where + ".active_child", [&] {
        node.set_active_child(it->get<std::size_t>());
        return 0;
      });
    }
    return node;
  }
  if (kind == "stack") {
    check_keys(j, {"kind", "name", "children", "use_probabilities"}, where);
    const bool proba = optional_bool(j, "use_probabilities", where);
    return at_field(where, [&] { return Node::stack(name, children_from_json(j, registry, where), proba); });
  }
  if (kind == "branch") {
    check_keys(j, {"kind", "name", "children"}, where);
    return at_field(where, [&] { return Node::branch(name, children_from_json(j, registry, where)); });
  }
  if (kind == "callback") {
    check_keys(j, {"kind", "name", "delegate"}, where);
    const std::string delegate = j.contains("delegate") ? require_string(j, "delegate", where) : "shape_logger";
    // Library-API delegates have no name and are not persisted; they load as no-ops.
    CallbackFn fn = delegate.empty() ? CallbackFn([](CallbackContext&) {})
                                     : at_field(where + ".delegate", [&] { return builtin_delegate(delegate); });
    return Node::callback(name, std::move(fn), delegate);
  }
  fail(where + ".kind", "unknown node kind '" + kind + "'");
}

Json node_to_json(const Node& node, bool include_state) {
  Json j;
  j["kind"] = to_string(node.kind());
  j["name"] = node.name();
  switch (node.kind()) {
    case NodeKind::element: {
      j["keyword"] = node.keyword();
      j["fixed_params"] = config_to_json(node.fixed_params());
      Json hps = Json::object();
      for (const auto& [param, spec] : node.hyperparameters()) hps[param] = hyperparameter_to_json(spec);
      j["hyperparameters"] = hps;
      j["test_disabled"] = node.test_disabled();
      if (include_state) {
        j["params"] = config_to_json(node.element()->params());
        j["seed"] = node.element()->seed();
        j["disabled"] = node.disabled();
      }
      break;
    }
    case NodeKind::switch_node:
    case NodeKind::stack:
    case NodeKind::branch: {
      Json children = Json::array();
      for (const auto& c : node.children()) children.push_back(node_to_json(c, include_state));
      j["children"] = children;
      if (node.kind() == NodeKind::stack) j["use_probabilities"] = node.use_probabilities();
      if (node.kind() == NodeKind::switch_node && include_state) j["active_child"] = node.active_child();
      break;
    }
    case NodeKind::callback:
      j["delegate"] = node.delegate_name();
      break;
  }
  return j;
}

}  // namespace

Json to_json(const ParamValue& v) {
  return std::visit([](const auto& x) { return Json(x); }, v);
}

ParamValue param_from_json(const Json& j, const std::string& where) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  fail(where, "expected a boolean, number, or string");
}

Json config_to_json(const Config& c) {
  Json j = Json::object();
  for (const auto& [k, v] : c) j[k] = to_json(v);
  return j;
}

Config config_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  Config c;
  for (auto it = j.begin(); it != j.end(); ++it) c[it.key()] = param_from_json(*it, where + "." + it.key());
  return c;
}

Json hyperparameter_to_json(const HyperparameterSpec& spec) {
  using Kind = HyperparameterSpec::Kind;
  Json j;
  switch (spec.kind) {
    case Kind::boolean:
      j["type"] = "boolean";
      return j;
    case Kind::categorical: {
      j["type"] = "categorical";
      Json values = Json::array();
      for (const auto& v : spec.values) values.push_back(to_json(v));
      j["values"] = values;
      return j;
    }
    case Kind::float_range:
    case Kind::integer_range:
      break;
  }
  const bool integer = spec.kind == Kind::integer_range;
  j["type"] = integer ? "integer_range" : "float_range";
  if (integer) {
    j["start"] = static_cast<std::int64_t>(spec.start);
    j["stop"] = static_cast<std::int64_t>(spec.stop);
    if (spec.step) j["step"] = static_cast<std::int64_t>(*spec.step);
  } else {
    j["start"] = spec.start;
    j["stop"] = spec.stop;
    if (spec.step) j["step"] = *spec.step;
  }
  if (spec.num) {
    j["num"] = *spec.num;
    j["range_type"] = to_string(spec.range_type);
  }
  return j;
}

HyperparameterSpec hyperparameter_from_json(const Json& j, const std::string& where) {
  if (j.is_array()) {
    std::vector<ParamValue> values;
    for (std::size_t i = 0; i < j.size(); ++i)
      values.push_back(param_from_json(j[i], where + "[" + std::to_string(i) + "]"));
    return at_field(where, [&] { return HyperparameterSpec::categorical(values); });
  }
  if (!j.is_object()) fail(where, "expected an array of values or a range object");
  const std::string type = require_string(j, "type", where);
  if (type == "boolean") {
    check_keys(j, {"type"}, where);
    return HyperparameterSpec::boolean();
  }
  if (type == "categorical") {
    check_keys(j, {"type", "values"}, where);
    const Json& values = require(j, "values", where);
    if (!values.is_array()) fail(where + ".values", "expected an array");
    return hyperparameter_from_json(values, where + ".values");
  }
  if (type != "float_range" && type != "integer_range") fail(where + ".type", "unknown hyperparameter type '" + type + "'");
  check_keys(j, {"type", "start", "stop", "step", "num", "range_type"}, where);
  HyperparameterSpec s;
  s.kind = type == "float_range" ? HyperparameterSpec::Kind::float_range : HyperparameterSpec::Kind::integer_range;
  s.start = require_number(j, "start", where);
  s.stop = require_number(j, "stop", where);
  if (j.contains("step")) s.step = require_number(j, "step", where);
  if (j.contains("num")) {
    const Json& n = j["num"];
    if (!n.is_number_integer()) fail(where + ".num", "expected an integer");
    s.num = n.get<std::int64_t>();
  } else if (!s.step) {
    if (s.kind == HyperparameterSpec::Kind::integer_range)
      s.step = 1.0;
    else
      s.num = 10;
  }
  if (j.contains("range_type"))
    s.range_type = at_field(where + ".range_type", [&] { return parse_range_type(require_string(j, "range_type", where)); });
  at_field(where, [&] {
    s.validate();
    return 0;
  });
  return s;
}

Json pipeline_to_json(const Pipeline& pipeline, bool include_state) {
  Json arr = Json::array();
  for (const auto& n : pipeline.nodes()) arr.push_back(node_to_json(n, include_state));
  return arr;
}

Pipeline pipeline_from_json(const Json& nodes, const Registry& registry, const std::string& where) {
  if (!nodes.is_array()) fail(where, "expected an array of pipeline nodes");
  std::vector<Node> out;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    out.push_back(node_from_json(nodes[i], registry, where + "[" + std::to_string(i) + "]"));
  return at_field(where, [&] { return Pipeline(std::move(out)); });
}

CallbackFn builtin_delegate(const std::string& name) {
  if (name == "shape_logger") return shape_logger();
  throw ValidationError("unknown callback delegate '" + name + "' (spec files support \"shape_logger\")");
}

}  // namespace hyperpipe
