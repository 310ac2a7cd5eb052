#pragma once

#include <stdexcept>
#include <string>

namespace moodtune {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violated a documented range or shape constraint.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class UnknownMoodError : public Error {
 public:
  explicit UnknownMoodError(std::string label)
      : Error("unknown mood label: '" + label + "'"), label_(std::move(label)) {}

  const std::string& label() const noexcept { return label_; }

 private:
  std::string label_;
};

/// Raised when a selection asks for more tracks than the pool holds.
class InsufficientTracksError : public Error {
 public:
  InsufficientTracksError(std::size_t requested, std::size_t available)
      : Error("requested " + std::to_string(requested) + " tracks but only " +
              std::to_string(available) + " available"),
        requested_(requested),
        available_(available) {}

  std::size_t requested() const noexcept { return requested_; }
  std::size_t available() const noexcept { return available_; }

 private:
  std::size_t requested_;
  std::size_t available_;
};

}  // namespace moodtune
