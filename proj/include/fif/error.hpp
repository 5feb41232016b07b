#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fif {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset()` is the byte offset of the offending token.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Evaluation left the real domain of a node (log of nonpositive, sqrt of negative, ...).
class DomainError : public Error {
 public:
  DomainError(const std::string& what, std::string node)
      : Error(what + " in '" + node + "'"), node_(std::move(node)) {}
  const std::string& node() const noexcept { return node_; }

 private:
  std::string node_;
};

/// Input violates a construction invariant (join-up, contraction, lengths, grid shape).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to meet its certified bound.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace fif
