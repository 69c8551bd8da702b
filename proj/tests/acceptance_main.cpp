#include <cstdio>
#include <string>

#include "ancientflow/verify.hpp"

// Runs the complete verification registry, printing one verdict line per
// check, then confirms the fault-injection hook has teeth: the e-sign fault
// must flip exactly the error-expansion check that passed in the clean run.
int main() {
  af::VerifyReport report = af::run_verification(af::VerifyOptions{});

  bool ok = !report.checks.empty();
  bool clean_expansion = false;
  for (const auto& c : report.checks) {
    char tag[16];
    if (c.criterion > 0)
      std::snprintf(tag, sizeof tag, "criterion %2d", c.criterion);
    else
      std::snprintf(tag, sizeof tag, "supplement  ");
    std::printf("[%s] %s %-28s (%7.2fs) %s\n", c.pass ? "PASS" : "FAIL", tag, c.name.c_str(),
                c.seconds, c.detail.c_str());
    ok = ok && c.pass;
    if (c.name == "error-expansion") clean_expansion = c.pass;
  }

  af::VerifyOptions fault;
  fault.filter = "error-expansion";
  fault.inject_fault = "e-sign";
  af::VerifyReport faulted = af::run_verification(fault);
  bool harness = clean_expansion && faulted.checks.size() == 1 && !faulted.checks[0].pass;
  std::printf("[%s] harness      %-28s (       ) clean run passes, e-sign fault fails\n",
              harness ? "PASS" : "FAIL", "fault-injection");
  ok = ok && harness;

  std::printf("%s\n", ok ? "ALL CHECKS PASSED" : "VERIFICATION FAILED");
  return ok ? 0 : 1;
}
