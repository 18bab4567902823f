// Copyright 2026 The followup-extractor Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FOLLOWUP_ERRORS_HPP_
#define FOLLOWUP_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace followup {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file or string.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Structurally valid input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Bug guard: the generator assembled a note that fails its own invariants.
class GenerationInvariantError : public Error {
 public:
  using Error::Error;
};

// A split target cannot be met with the available notes.
class InsufficientNotesError : public Error {
 public:
  using Error::Error;
};

// A time phrase matched no rule of the temporal grammar.
class NormalizationError : public Error {
 public:
  explicit NormalizationError(const std::string& phrase)
      : Error("no temporal rule matches phrase: \"" + phrase + "\""),
        phrase_(phrase) {}
  const std::string& phrase() const { return phrase_; }

 private:
  std::string phrase_;
};

// Evaluation over zero notes.
class EmptyEvaluation : public Error {
 public:
  using Error::Error;
};

// A predictions or baseline file references a note id absent from the corpus.
class UnknownNoteId : public Error {
 public:
  using Error::Error;
};

// Metric reports being compared were computed on different splits.
class SplitMismatch : public Error {
 public:
  using Error::Error;
};

// A training step produced a non-finite loss.
class NonFiniteLoss : public Error {
 public:
  using Error::Error;
};

// Loss stayed non-finite for an entire epoch.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace followup

#endif  // FOLLOWUP_ERRORS_HPP_
