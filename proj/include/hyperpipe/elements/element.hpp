#pragma once

// The uniform contract every pipeline element implements.
//
// Transformers see targets only while fitting; `transform` has no access to
// y. Elements that change the targets (resamplers) implement `resample`,
// which both fits and produces the new training rows, and are skipped at
// predict time.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hyperpipe/bytes.hpp"
#include "hyperpipe/data.hpp"
#include "hyperpipe/params.hpp"

namespace hyperpipe {

enum class AppliesDuring { always, fit_only };

struct Capabilities {
  bool can_transform = false;
  bool can_predict = false;
  bool can_predict_proba = false;
  bool modifies_targets = false;
  AppliesDuring applies_during = AppliesDuring::always;
  bool stochastic = false;
};

/// Declared parameter: name, default, and a validity check on new values.
struct ParamSpec {
  std::string name;
  ParamValue default_value;
  std::function<void(const ParamValue&)> check;
};

/// Resampler output; source_rows[i] is the input row that output row i came
/// from (for synthetic rows, the row they were interpolated from).
struct Resampled {
  FeatureMatrix x;
  TargetVector y;
  std::vector<std::size_t> source_rows;
};

class Element {
 public:
  virtual ~Element() = default;

  virtual std::string keyword() const = 0;
  virtual Capabilities capabilities() const = 0;
  virtual const std::vector<ParamSpec>& schema() const = 0;

  const ParamMap& params() const noexcept { return params_; }
  /// Validates every entry before applying any; marks the element unfitted.
  void set_params(const ParamMap& updates);
  void set_param(const std::string& name, const ParamValue& value);

  std::uint64_t seed() const noexcept { return seed_; }
  void set_seed(std::uint64_t seed) noexcept { seed_ = seed; }

  virtual void fit(const FeatureMatrix& x, const TargetVector& y, const ExtraData& extras);
  virtual FeatureMatrix transform(const FeatureMatrix& x, const ExtraData& extras) const;
  virtual Resampled resample(const FeatureMatrix& x, const TargetVector& y);
  virtual std::vector<double> predict(const FeatureMatrix& x, const ExtraData& extras) const;
  /// One column per class, classes ascending.
  virtual FeatureMatrix predict_proba(const FeatureMatrix& x, const ExtraData& extras) const;
  virtual std::vector<double> classes() const { return {}; }

  bool fitted() const noexcept { return fitted_; }

  /// Learned state only; parameters travel separately.
  void save_state(ByteWriter& out) const;
  void load_state(ByteReader& in);

  virtual std::unique_ptr<Element> clone() const = 0;

 protected:
  Element() = default;
  Element(const Element&) = default;
  Element& operator=(const Element&) = default;

  /// Fills params from the schema defaults; call from derived constructors.
  void init_params();
  void mark_fitted() noexcept { fitted_ = true; }
  void require_fitted() const;

  const ParamValue& param(const std::string& name) const;
  double real_param(const std::string& name) const { return as_double(param(name), name); }
  std::int64_t int_param(const std::string& name) const { return as_int(param(name), name); }
  bool bool_param(const std::string& name) const { return as_bool(param(name), name); }
  const std::string& string_param(const std::string& name) const { return as_string(param(name), name); }

  virtual void write_state(ByteWriter& out) const = 0;
  virtual void read_state(ByteReader& in) = 0;

 private:
  ParamMap params_;
  std::uint64_t seed_ = 0;
  bool fitted_ = false;
};

/// Supplies clone() for a concrete element.
template <typename Derived>
class ElementBase : public Element {
 public:
  std::unique_ptr<Element> clone() const override {
    return std::make_unique<Derived>(static_cast<const Derived&>(*this));
  }
};

/// Throws DataError naming the element when x contains NaN.
void require_finite(const FeatureMatrix& x, const std::string& who);
/// Throws when x has a different column count than seen at fit.
void require_columns(const FeatureMatrix& x, std::size_t expected, const std::string& who);

// Common parameter checks.
std::function<void(const ParamValue&)> check_one_of(std::vector<std::string> allowed);
std::function<void(const ParamValue&)> check_int_at_least(std::int64_t lo);
std::function<void(const ParamValue&)> check_real_positive();
std::function<void(const ParamValue&)> check_real_nonnegative();
std::function<void(const ParamValue&)> check_bool();

}  // namespace hyperpipe
