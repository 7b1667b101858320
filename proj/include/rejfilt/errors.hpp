#pragma once

#include <stdexcept>
#include <string>

namespace rejfilt {

/// Covariance is not factorizable even after jitter escalation, or a model
/// violates its structural invariants.
class CorruptedModelError : public std::runtime_error {
 public:
  explicit CorruptedModelError(const std::string& what) : std::runtime_error(what) {}
};

/// A likelihood evaluation returned a negative or non-finite value.
class InvalidLikelihoodError : public std::runtime_error {
 public:
  explicit InvalidLikelihoodError(const std::string& what) : std::runtime_error(what) {}
};

class DimensionMismatchError : public std::invalid_argument {
 public:
  explicit DimensionMismatchError(const std::string& what) : std::invalid_argument(what) {}
};

/// Two log-likelihood registers fed from different update counts cannot form
/// a Bayes factor.
class IncomparableRegistersError : public std::invalid_argument {
 public:
  explicit IncomparableRegistersError(const std::string& what) : std::invalid_argument(what) {}
};

/// A class carries posterior mass but the corpus holds no vectors of it.
class CorpusIntegrityError : public std::runtime_error {
 public:
  explicit CorpusIntegrityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rejfilt
