#pragma once

// JSON forms of parameters, configs, search spaces, and pipeline structure.
//
// Node objects:
//   {"kind": "element", "name": ..., "keyword": ..., "fixed_params": {...},
//    "hyperparameters": {...}, "test_disabled": bool}
//   {"kind": "switch" | "branch", "name": ..., "children": [...]}
//   {"kind": "stack", "name": ..., "children": [...], "use_probabilities": bool}
//   {"kind": "callback", "name": ..., "delegate": "shape_logger"}
// With state included, element nodes also carry "params" (every current
// value), "seed", and "disabled"; switches carry "active_child".
//
// Hyperparameter specs: a JSON array is categorical; otherwise
//   {"type": "float_range" | "integer_range", "start", "stop",
//    "step" | "num", "range_type"}, {"type": "categorical", "values": [...]},
//   {"type": "boolean"}.

#include <string>

#include <json.hpp>

#include "hyperpipe/hyperparameters.hpp"
#include "hyperpipe/pipeline.hpp"

namespace hyperpipe {

using Json = nlohmann::json;

Json to_json(const ParamValue& v);
/// `where` names the field in error messages.
ParamValue param_from_json(const Json& j, const std::string& where);

Json config_to_json(const Config& c);
Config config_from_json(const Json& j, const std::string& where);

Json hyperparameter_to_json(const HyperparameterSpec& spec);
HyperparameterSpec hyperparameter_from_json(const Json& j, const std::string& where);

Json pipeline_to_json(const Pipeline& pipeline, bool include_state);
/// Errors are ValidationErrors prefixed with the JSON path of the bad field.
Pipeline pipeline_from_json(const Json& nodes, const Registry& registry = default_registry(),
                            const std::string& where = "elements");

/// Delegate for a named built-in callback; throws for unknown names.
CallbackFn builtin_delegate(const std::string& name);

}  // namespace hyperpipe
