#pragma once

#include <stdexcept>
#include <string>

namespace jigsaw {

// Base of every error raised by the library. kind() is a stable machine-readable tag
// that the CLI reports verbatim.
class Error : public std::runtime_error {
 public:
  Error(const char* kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  const char* kind() const noexcept { return kind_; }

 private:
  const char* kind_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what) : Error("invalid_input", what) {}
};

class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what) : Error("parameter", what) {}
};

class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::string path)
      : Error("format", what + ": " + path), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class NoOverlap : public Error {
 public:
  explicit NoOverlap(const std::string& what) : Error("no_overlap", what) {}
};

class NoSeam : public Error {
 public:
  explicit NoSeam(const std::string& what) : Error("no_seam", what) {}
};

class ImbalanceError : public Error {
 public:
  explicit ImbalanceError(const std::string& what) : Error("imbalance", what) {}
};

class MalformedLoop : public Error {
 public:
  explicit MalformedLoop(const std::string& what) : Error("malformed_loop", what) {}
};

class NotMergeable : public Error {
 public:
  explicit NotMergeable(const std::string& what) : Error("not_mergeable", what) {}
};

}  // namespace jigsaw
