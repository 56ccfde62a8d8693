// Copyright 2026 The qtomo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QTOMO_ERRORS_HPP
#define QTOMO_ERRORS_HPP

#include <stdexcept>

namespace qtomo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An input violates a mathematical precondition (not PSD, Hessian not
/// negative definite, zero-probability outcome, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative routine hit its iteration or subdivision budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Malformed JSON or a file that does not follow the expected schema.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// The maximizer failed certification, or a hypothesis needed by the
/// asymptotic variance (positive gap, positive definite Fisher form) does not
/// hold.
class CertificateError : public Error {
 public:
  using Error::Error;
};

/// Monte-Carlo estimate refused because importance weights collapsed.
class SamplingError : public Error {
 public:
  using Error::Error;
};

}  // namespace qtomo

#endif  // QTOMO_ERRORS_HPP
