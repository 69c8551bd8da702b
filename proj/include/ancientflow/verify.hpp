#pragma once
#include <string>
#include <vector>

#include <json.hpp>

namespace af {

struct CheckResult {
  std::string name;
  int criterion = 0;  // 0 marks a supplementary check
  bool pass = false;
  std::string detail;
  double seconds = 0.0;  // console diagnostics only, never serialized
};

struct VerifyOptions {
  std::string filter;        // substring of check names; empty runs everything
  std::string inject_fault;  // "e-sign" flips the nonlinearity inside error-expansion
  int n_grid = 256;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return !checks.empty();
  }
  nlohmann::json to_json() const;
};

std::vector<std::string> verification_names();

VerifyReport run_verification(const VerifyOptions& opts = {});

}  // namespace af
