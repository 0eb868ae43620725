#pragma once

#include <stdexcept>
#include <string>

namespace qtraj {

/// Failure raised by any library operation. Carries the module and the
/// operation that rejected the input so front ends can report both.
class Error : public std::runtime_error {
 public:
  Error(std::string module, std::string operation, const std::string& message)
      : std::runtime_error(module + "::" + operation + ": " + message),
        module_(std::move(module)),
        operation_(std::move(operation)),
        detail_(message) {}

  const std::string& module() const noexcept { return module_; }
  const std::string& operation() const noexcept { return operation_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string module_;
  std::string operation_;
  std::string detail_;
};

}  // namespace qtraj
