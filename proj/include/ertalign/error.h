/*
 * Copyright 2026 The ertalign Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ERTALIGN_ERROR_H_
#define ERTALIGN_ERROR_H_

#include <stdexcept>
#include <string>

namespace ertalign {

// Root of every error raised by the library. The CLI maps the two families
// below onto exit codes 2 (data) and 3 (numeric); anything else is a usage
// problem (exit code 1).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class IoError : public DataError {
 public:
  using DataError::DataError;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, int line)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class ArityError : public NumericError {
 public:
  using NumericError::NumericError;
};

class RankError : public NumericError {
 public:
  using NumericError::NumericError;
};

class InitError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace ertalign

#endif  // ERTALIGN_ERROR_H_
