// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace erupoint {

// Bad caller input: violated preconditions, malformed values, unknown ids.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Filesystem / stream failures and format violations of on-disk data.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed record inside an otherwise readable file.
class ParseError : public IoError {
public:
  ParseError(const std::string& what, size_t line) : IoError(what), line_(line) {}
  size_t line() const { return line_; }

private:
  size_t line_;
};

} // namespace erupoint
