#pragma once

#include <stdexcept>
#include <string>

namespace stunet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor extents.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A forward operation produced NaN or Inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Precondition of an API call violated by the caller.
class UsageError : public Error {
 public:
  using Error::Error;
};

class GraphError : public Error {
 public:
  using Error::Error;
};

class PartitionError : public Error {
 public:
  using Error::Error;
};

class ModelError : public Error {
 public:
  using Error::Error;
};

// Malformed input files; messages carry "path:line:" context when available.
class DataError : public Error {
 public:
  using Error::Error;
};

class MetricError : public Error {
 public:
  using Error::Error;
};

// Checkpoint container could not be read back.
class LoadError : public Error {
 public:
  using Error::Error;
};

}  // namespace stunet
