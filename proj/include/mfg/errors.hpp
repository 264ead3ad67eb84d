// Copyright 2026 The mfglab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace mfg {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on shapes, sizes or parameters does not hold.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// The explicit HJB scheme would not be monotone at the requested step.
class CflViolation : public Error {
 public:
  CflViolation(double dt, double required_dt)
      : Error("CFL condition violated: dt = " + std::to_string(dt) +
              " exceeds the required dt <= " + std::to_string(required_dt)),
        dt_(dt),
        required_dt_(required_dt) {}

  double dt() const { return dt_; }
  double required_dt() const { return required_dt_; }

 private:
  double dt_;
  double required_dt_;
};

// A coefficient, value or state became NaN or infinite.
class NumericalError : public Error {
 public:
  using Error::Error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace mfg
