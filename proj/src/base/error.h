// src/base/error.h

// Copyright 2026  The seqdistill Authors

// See ../../COPYING for clarification regarding multiple authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef SEQDISTILL_BASE_ERROR_H_
#define SEQDISTILL_BASE_ERROR_H_

#include <sstream>
#include <stdexcept>
#include <string>

namespace seqdistill {

// Raised when two operands of a primitive or loss disagree in shape.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised by forward-backward when a graph accepts no path of the
// requested length.
class EmptyCompositionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The numerator side of an MMI objective could not be composed with the
// utterance; the supervision does not fit the audio.
class SupervisionMismatchError : public EmptyCompositionError {
 public:
  using EmptyCompositionError::EmptyCompositionError;
};

// Small helper so call sites can build messages with operator<<.
class MessageBuilder {
 public:
  template <typename T>
  MessageBuilder& operator<<(const T& value) {
    stream_ << value;
    return *this;
  }
  std::string str() const { return stream_.str(); }

 private:
  std::ostringstream stream_;
};

}  // namespace seqdistill

#define SEQDISTILL_THROW(ExceptionType, msg) \
  throw ExceptionType((::seqdistill::MessageBuilder() << msg).str())

#endif  // SEQDISTILL_BASE_ERROR_H_
