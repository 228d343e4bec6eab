/* Copyright 2026 The photonlim Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace photonlim {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters, basis sizes or scenario settings.
class ConfigurationError : public Error {
public:
  using Error::Error;
};

/// Channel or frequency index out of range.
class IndexError : public Error {
public:
  using Error::Error;
};

/// Operation requires a single-channel (Lambda) system.
class UnsupportedConfiguration : public Error {
public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Mismatched dimensions or an unknown enumerator.
class UsageError : public Error {
public:
  using Error::Error;
};

/// A root search or refinement failed; carries the residual trace.
class NumericalFailure : public Error {
public:
  NumericalFailure(const std::string &what, std::vector<double> trace = {})
      : Error(what), residual_trace(std::move(trace)) {}
  std::vector<double> residual_trace;
};

/// Constraint vectors are (nearly) linearly dependent.
class DegeneracyError : public Error {
public:
  using Error::Error;
};

/// Zero vector handed to a normalised quantity.
class DegenerateVectorError : public Error {
public:
  using Error::Error;
};

/// Time grid too coarse for the requested accuracy.
class AccuracyError : public Error {
public:
  using Error::Error;
};

/// Drive reconstruction hit a vanishing initial-state amplitude.
class ReconstructionSingularity : public Error {
public:
  ReconstructionSingularity(const std::string &what, double time)
      : Error(what), failure_time(time) {}
  double failure_time;
};

/// CSV or plot specification does not match.
class SchemaError : public Error {
public:
  using Error::Error;
};

/// Output or input file could not be accessed.
class IoError : public Error {
public:
  using Error::Error;
};

} // namespace photonlim
