// Copyright (c) 2026 the netpoison authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace netpoison {

// Process exit codes used by the command line driver. Library errors carry
// the code they should map to so the driver stays a thin translation layer.
enum class ExitCode : int {
  ok = 0,
  validation = 2,  // bad input data, malformed files, inconsistent arguments
  capacity = 3,    // request exceeds what the graph or machine can provide
  solver = 4,      // numerical routine failed or produced invalid output
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ExitCode::validation, what) {}
};

// Input file could not be parsed. Remembers where.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : ValidationError(path + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Asked for more than the instance has (e.g. more candidate flips than pairs).
class CapacityError : public Error {
 public:
  explicit CapacityError(const std::string& what)
      : Error(ExitCode::capacity, what) {}
};

// A memory budget would be exceeded. Reports how much would be needed.
class ResourceError : public Error {
 public:
  ResourceError(const std::string& what, std::size_t required_bytes)
      : Error(ExitCode::capacity,
              what + " (required " + std::to_string(required_bytes) +
                  " bytes)"),
        required_bytes_(required_bytes) {}
  std::size_t required_bytes() const noexcept { return required_bytes_; }

 private:
  std::size_t required_bytes_;
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what)
      : Error(ExitCode::solver, what) {}
};

}  // namespace netpoison
