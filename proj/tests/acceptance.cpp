#include <cstdio>

#include "acceptance_suite.hpp"

int main(int argc, char** argv) {
  ltc::acceptance::Options opt;
  if (argc > 1) opt.seed = std::stoull(argv[1]);
  ltc::acceptance::Suite suite(opt);
  int failed = 0;
  suite.run([&](const ltc::acceptance::CriterionResult& r) {
    std::printf("%s %s (%.1fs): %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.seconds, r.detail.c_str());
    std::fflush(stdout);
    failed += !r.pass;
  });
  std::printf("%d/12 criteria passed\n", 12 - failed);
  return failed == 0 ? 0 : 1;
}
