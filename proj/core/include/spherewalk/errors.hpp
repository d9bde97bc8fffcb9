// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace spherewalk {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input or configuration: bad layer specs, out-of-range
/// parameters, dimension mismatches, missing files.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A structurally invalid model description (dimension chain, bad kind).
class SpecError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Malformed or incompatible file content.
class FormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Geometry that has no well-defined answer (zero vector, antipodal slerp).
class GeometryError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// NaN/Inf during training or a walk, non-convergence of an iteration.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A forward cache used against a model it was not produced by.
class StaleCacheError : public Error {
 public:
  using Error::Error;
};

}  // namespace spherewalk
