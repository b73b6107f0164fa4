#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace jointmap {

// Base of every error raised by the library. kind() is a short stable tag
// used by the CLI to print machine-parseable failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept = 0;
};

#define JOINTMAP_DEFINE_ERROR(Name, Tag)                          \
  class Name : public Error {                                     \
   public:                                                        \
    using Error::Error;                                           \
    const char* kind() const noexcept override { return Tag; }    \
  };

JOINTMAP_DEFINE_ERROR(ShapeError, "shape")
JOINTMAP_DEFINE_ERROR(ConfigError, "config")
JOINTMAP_DEFINE_ERROR(InputError, "input")
JOINTMAP_DEFINE_ERROR(FileError, "file")
JOINTMAP_DEFINE_ERROR(ProtocolError, "protocol")
JOINTMAP_DEFINE_ERROR(ConsistencyError, "consistency")
JOINTMAP_DEFINE_ERROR(LookupError, "lookup")
JOINTMAP_DEFINE_ERROR(NumericError, "numeric")

#undef JOINTMAP_DEFINE_ERROR

class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  const char* kind() const noexcept override { return "parse"; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace jointmap
