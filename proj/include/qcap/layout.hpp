// SystemLayout: an ordered list of labeled tensor factors. Every multipartite
// operation addresses subsystems through one of these.

#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qcap/linalg.hpp"

namespace qcap {

struct Factor {
  std::string label;
  Index dim = 0;

  friend bool operator==(const Factor& a, const Factor& b) {
    return a.label == b.label && a.dim == b.dim;
  }
};

class SystemLayout {
 public:
  SystemLayout() = default;  // scalar layout, total dim 1

  explicit SystemLayout(std::vector<Factor> factors)
      : factors_(std::move(factors)) {
    std::set<std::string> labels;
    total_dim_ = 1;
    for (const auto& f : factors_) {
      if (f.dim < 1)
        throw PreconditionError("SystemLayout: factor dim must be positive");
      if (!labels.insert(f.label).second)
        throw PreconditionError("SystemLayout: duplicate label '" + f.label +
                                "'");
      total_dim_ *= f.dim;
    }
  }

  static SystemLayout single(std::string label, Index dim) {
    return SystemLayout({{std::move(label), dim}});
  }

  std::size_t size() const { return factors_.size(); }
  const Factor& factor(std::size_t i) const { return factors_.at(i); }
  const std::vector<Factor>& factors() const { return factors_; }
  Index total_dim() const { return total_dim_; }

  std::vector<Index> dims() const {
    std::vector<Index> d;
    d.reserve(factors_.size());
    for (const auto& f : factors_) d.push_back(f.dim);
    return d;
  }

  std::optional<std::size_t> index_of(const std::string& label) const {
    for (std::size_t i = 0; i < factors_.size(); ++i)
      if (factors_[i].label == label) return i;
    return std::nullopt;
  }

  bool contains(const std::string& label) const {
    return index_of(label).has_value();
  }

  // Concatenation; label collisions are an error.
  SystemLayout concat(const SystemLayout& other) const {
    std::vector<Factor> fs = factors_;
    for (const auto& f : other.factors_) {
      if (contains(f.label))
        throw PreconditionError("SystemLayout: label collision on '" +
                                f.label + "'");
      fs.push_back(f);
    }
    return SystemLayout(std::move(fs));
  }

  SystemLayout subset(const std::vector<Index>& indices) const {
    std::vector<Factor> fs;
    fs.reserve(indices.size());
    for (Index i : indices) fs.push_back(factor(check_index(i)));
    return SystemLayout(std::move(fs));
  }

  SystemLayout without(const std::vector<Index>& indices) const {
    std::set<Index> drop(indices.begin(), indices.end());
    for (Index i : indices) check_index(i);
    std::vector<Factor> fs;
    for (std::size_t i = 0; i < factors_.size(); ++i)
      if (!drop.count(static_cast<Index>(i))) fs.push_back(factors_[i]);
    return SystemLayout(std::move(fs));
  }

  SystemLayout permuted(const std::vector<Index>& order) const {
    std::vector<Factor> fs;
    fs.reserve(order.size());
    for (Index o : order) fs.push_back(factor(check_index(o)));
    return SystemLayout(std::move(fs));
  }

  SystemLayout relabeled(const std::vector<std::string>& labels) const {
    if (labels.size() != factors_.size())
      throw PreconditionError("SystemLayout: relabel count mismatch");
    std::vector<Factor> fs = factors_;
    for (std::size_t i = 0; i < fs.size(); ++i) fs[i].label = labels[i];
    return SystemLayout(std::move(fs));
  }

  SystemLayout with_suffix(const std::string& suffix) const {
    std::vector<Factor> fs = factors_;
    for (auto& f : fs) f.label += suffix;
    return SystemLayout(std::move(fs));
  }

  bool same_dims(const SystemLayout& other) const {
    if (size() != other.size()) return false;
    for (std::size_t i = 0; i < size(); ++i)
      if (factors_[i].dim != other.factors_[i].dim) return false;
    return true;
  }

  friend bool operator==(const SystemLayout& a, const SystemLayout& b) {
    return a.factors_ == b.factors_;
  }

  std::string to_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (i) s += ", ";
      s += factors_[i].label + ":" + std::to_string(factors_[i].dim);
    }
    return s + ")";
  }

 private:
  std::size_t check_index(Index i) const {
    if (i < 0 || static_cast<std::size_t>(i) >= factors_.size())
      throw PreconditionError("SystemLayout: factor index out of range");
    return static_cast<std::size_t>(i);
  }

  std::vector<Factor> factors_;
  Index total_dim_ = 1;
};

// Returns `base` if it does not collide with `taken`, else base with enough
// primes appended to make it fresh.
inline std::string fresh_label(std::string base, const SystemLayout& taken) {
  while (taken.contains(base)) base += "'";
  return base;
}

}  // namespace qcap
