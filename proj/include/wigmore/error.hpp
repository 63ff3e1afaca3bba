#pragma once

#include <stdexcept>
#include <string>

namespace wigmore {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input document (case file, model file, spec file).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Structurally invalid Bayes net or unresolved variable/state reference.
class ModelError : public Error {
 public:
  using Error::Error;
};

// Evidence assignment with probability zero under the model.
class ImpossibleEvidenceError : public Error {
 public:
  using Error::Error;
};

// Joint state space beyond the brute-force enumeration guard.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Likelihood ratio of the form 0/0.
class UndefinedForceError : public Error {
 public:
  using Error::Error;
};

// A conditioning event has probability zero on one hypothesis branch.
class ConditioningError : public Error {
 public:
  using Error::Error;
};

// Compilation spec lacks a likelihood or credibility entry it needs.
class CompletenessError : public Error {
 public:
  using Error::Error;
};

// Evidence node that is both directly relevant and ancillary.
class AmbiguityError : public Error {
 public:
  using Error::Error;
};

// Parameter outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Invalid sweep or story specification.
class SpecError : public Error {
 public:
  using Error::Error;
};

}  // namespace wigmore
