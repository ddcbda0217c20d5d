// Copyright 2026 The dubins_smc Authors
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

#ifndef DUBINS_SMC__ERRORS_HPP_
#define DUBINS_SMC__ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace dubins_smc
{

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A query point lies farther from the reference path than the allowed corridor.
class CorridorExceeded : public Error
{
public:
  using Error::Error;
};

/// Invalid construction input (path specs, parameter sets, configs).
class InvalidSpec : public Error
{
public:
  using Error::Error;
};

/// A state left the domain in which a law is defined (e.g. |delta| >= pi/2).
class DomainViolation : public Error
{
public:
  using Error::Error;
};

/// The parameter scheduler found no admissible parameter set.
class Infeasible : public Error
{
public:
  using Error::Error;
};

/// The optimal reaching solver found no admissible profile within its budget.
class NoSolution : public Error
{
public:
  using Error::Error;
};

}  // namespace dubins_smc

#endif  // DUBINS_SMC__ERRORS_HPP_
