#pragma once

#include <stdexcept>
#include <string>

namespace lmc {

// Every failure carries the module that raised it and a short machine-readable
// code; the CLI prints these as "ERROR <module> <code>".
class Error : public std::runtime_error {
 public:
  Error(std::string module, std::string code, const std::string& detail)
      : std::runtime_error(module + " " + code + ": " + detail),
        module_(std::move(module)),
        code_(std::move(code)) {}

  const std::string& module() const noexcept { return module_; }
  const std::string& code() const noexcept { return code_; }

 private:
  std::string module_;
  std::string code_;
};

}  // namespace lmc
