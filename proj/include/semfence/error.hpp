/* Copyright 2024 The Semfence Authors. All Rights Reserved.

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
#ifndef SEMFENCE_ERROR_HPP
#define SEMFENCE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace semfence {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files or query text; message carries an offset when known.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Structural constraint broken: dangling key references, bad spans,
// ill-formed marker sets.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// An annotation fragment could not be located in its question/target.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

// preprocess/postprocess failure (unbalanced quote).
class PreprocessError : public Error {
 public:
  using Error::Error;
};

// A column or table reference that does not resolve against the schema.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

// SQL construct outside the supported subset; names the construct.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Missing database file or similar non-input failure.
class EnvironmentError : public Error {
 public:
  using Error::Error;
};

// Inconsistent options, e.g. marking requested without alignments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Gold-side data is unusable (gold query fails to execute).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace semfence

#endif  // SEMFENCE_ERROR_HPP
