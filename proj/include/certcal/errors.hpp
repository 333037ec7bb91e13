#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace certcal {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularInput : public Error {
 public:
  using Error::Error;
};

class InvalidRotation : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class TooShort : public Error {
 public:
  using Error::Error;
};

/// The translation block of the data matrix is numerically singular; this is
/// the unobservable-translation failure mode (all sensor-b rotations share an
/// axis).
class SingularQtt : public Error {
 public:
  using Error::Error;
};

class NotObservable : public Error {
 public:
  using Error::Error;
};

class SdpFailure : public Error {
 public:
  using Error::Error;
};

class RankDeficiencyAmbiguous : public Error {
 public:
  using Error::Error;
};

class MaxIterReached : public Error {
 public:
  using Error::Error;
};

}  // namespace certcal
