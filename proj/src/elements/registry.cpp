#include "hyperpipe/elements/registry.hpp"

#include "hyperpipe/error.hpp"

namespace hyperpipe {

void Registry::register_element(const std::string& keyword, ElementFactory factory, ElementMetadata metadata) {
  std::lock_guard lock(mutex_);
  if (entries_.count(keyword) != 0) throw ValidationError("element '" + keyword + "' is already registered");
  entries_.emplace(keyword, Entry{std::move(factory), std::move(metadata)});
}

std::unique_ptr<Element> Registry::create(const std::string& keyword, const ParamMap& fixed_params) const {
  ElementFactory factory;
  {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(keyword);
    if (it == entries_.end()) throw ValidationError("unknown element '" + keyword + "'");
    factory = it->second.factory;
  }
  auto element = factory();
  element->set_params(fixed_params);
  return element;
}

bool Registry::contains(const std::string& keyword) const {
  std::lock_guard lock(mutex_);
  return entries_.count(keyword) != 0;
}

const ElementMetadata& Registry::metadata(const std::string& keyword) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(keyword);
  if (it == entries_.end()) throw ValidationError("unknown element '" + keyword + "'");
  return it->second.metadata;
}

std::vector<std::string> Registry::keywords() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [k, e] : entries_) out.push_back(k);
  return out;
}

Registry& default_registry() {
  static Registry* registry = [] {
    auto* r = new Registry();
    register_builtin_elements(*r);
    return r;
  }();
  return *registry;
}

}  // namespace hyperpipe
