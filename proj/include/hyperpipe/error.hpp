#pragma once

#include <stdexcept>
#include <string>

namespace hyperpipe {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: parameters, configs, spec files, data files.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Operation called in the wrong state (transform before fit and similar).
class StateError : public Error {
 public:
  using Error::Error;
};

/// Data-dependent numerical failure inside an element (NaN reaching an estimator, etc).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Model archive or cache entry could not be decoded.
class ArchiveError : public Error {
 public:
  using Error::Error;
};

/// A pipeline callback threw; carries the node name.
class CallbackError : public Error {
 public:
  CallbackError(std::string node, const std::string& what)
      : Error("callback '" + node + "' failed: " + what), node_(std::move(node)) {}
  const std::string& node() const noexcept { return node_; }

 private:
  std::string node_;
};

}  // namespace hyperpipe
