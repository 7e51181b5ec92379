#pragma once

#include <stdexcept>
#include <string>

namespace ops {

// Base for every domain error raised by the workbench. `code()` is a stable
// uppercase identifier that the service maps onto ApiError machine codes.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define OPS_DEFINE_ERROR(Name, Code)                                   \
  class Name : public ::ops::Error {                                   \
   public:                                                             \
    explicit Name(const std::string& message) : Error(Code, message) {} \
  }

OPS_DEFINE_ERROR(DocumentError, "BAD_DOCUMENT");
OPS_DEFINE_ERROR(NotFoundError, "NOT_FOUND");

}  // namespace ops
