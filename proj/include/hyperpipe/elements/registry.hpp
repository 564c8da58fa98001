#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "hyperpipe/elements/element.hpp"

namespace hyperpipe {

using ElementFactory = std::function<std::unique_ptr<Element>()>;

struct ElementMetadata {
  Capabilities capabilities;
  std::vector<std::string> parameter_names;
  std::string description;
};

/// Keyword -> element factory.
class Registry {
 public:
  /// Throws ValidationError on a duplicate keyword.
  void register_element(const std::string& keyword, ElementFactory factory, ElementMetadata metadata);

  /// Registers `T` under `keyword`, reading metadata from a default instance.
  template <typename T>
  void register_type(const std::string& keyword, std::string description = {}) {
    ElementFactory f = [] { return std::make_unique<T>(); };
    auto probe = f();
    ElementMetadata meta{probe->capabilities(), {}, std::move(description)};
    for (const auto& spec : probe->schema()) meta.parameter_names.push_back(spec.name);
    register_element(keyword, std::move(f), std::move(meta));
  }

  /// Unfitted instance with `fixed_params` applied.
  std::unique_ptr<Element> create(const std::string& keyword, const ParamMap& fixed_params = {}) const;
  bool contains(const std::string& keyword) const;
  const ElementMetadata& metadata(const std::string& keyword) const;
  std::vector<std::string> keywords() const;

 private:
  struct Entry {
    ElementFactory factory;
    ElementMetadata metadata;
  };
  mutable std::mutex mutex_;
  std::map<std::string, Entry> entries_;
};

/// Process-wide registry with every built-in element registered.
Registry& default_registry();
void register_builtin_elements(Registry& registry);

}  // namespace hyperpipe
