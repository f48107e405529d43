/*
   Copyright 2026 The ldlab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>

namespace ldlab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A point or parameter lies outside the domain of the object it is passed to.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Requested operation is not defined for this kind of system (e.g. 2D Ulam).
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// Division by a vanishing invariant density on bins the input touches.
class ConditioningError : public Error {
public:
    using Error::Error;
};

/// A pipeline stage was invoked before the stage it depends on.
class DependencyError : public Error {
public:
    using Error::Error;
};

/// Geometric series ratio r >= 1: the exponential-moment bound does not close.
class DivergentSeriesError : public Error {
public:
    using Error::Error;
};

/// Curve carries no usable decay information (flat, or non-positive values).
class DegenerateCurveError : public Error {
public:
    using Error::Error;
};

/// Configuration problem; `where` carries "file:line field" diagnostics.
class ConfigError : public Error {
public:
    ConfigError(const std::string& where, const std::string& what)
        : Error(where.empty() ? what : where + ": " + what) {}
};

}  // namespace ldlab
