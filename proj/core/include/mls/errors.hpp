#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mls {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A parameter is outside its documented range (non-positive cell size, ...).
class InvalidParameter : public Error {
public:
  using Error::Error;
};

/// An operation that needs at least one element received none.
class EmptyInput : public Error {
public:
  using Error::Error;
};

/// A documented precondition does not hold (e.g. smoothing a raster with holes).
class PreconditionViolation : public Error {
public:
  using Error::Error;
};

/// Inputs are structurally inconsistent (mismatched universes, unmapped class, ...).
class InvalidInput : public Error {
public:
  using Error::Error;
};

/// PLY parse or decode failure. offset() is the byte position in the stream
/// at which the problem was detected.
class PlyError : public Error {
public:
  PlyError(const std::string& what, std::size_t offset)
      : Error(what + " (byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

/// Class-tree XML failure: malformed document, duplicate id, dangling parent,
/// cyclic hierarchy.
class XmlError : public Error {
public:
  using Error::Error;
};

/// Model file failure: bad magic, version mismatch, truncated stream, or a
/// descriptor layout that does not match the model.
class ModelError : public Error {
public:
  using Error::Error;
};

}  // namespace mls
