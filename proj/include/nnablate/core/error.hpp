#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nnablate {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller violated a documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Layer shapes do not chain, or an input does not match the network.
class ShapeError : public Error {
 public:
  ShapeError(std::size_t layer, const std::string& what)
      : Error("layer " + std::to_string(layer) + ": " + what), layer_(layer), detail_(what) {}

  std::size_t layer() const noexcept { return layer_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t layer_;
  std::string detail_;
};

// A NaN or infinity appeared in an intermediate value.
class NumericError : public Error {
 public:
  NumericError(std::size_t layer, const std::string& what)
      : Error("layer " + std::to_string(layer) + ": " + what), layer_(layer) {}

  std::size_t layer() const noexcept { return layer_; }

 private:
  std::size_t layer_;
};

// A serialized file could not be parsed.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A serialized file carries an unsupported format version.
class VersionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t epoch, const std::string& what)
      : Error("diverged at epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

}  // namespace nnablate
