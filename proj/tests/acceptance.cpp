// Runs the twelve acceptance criteria and prints one line per criterion.
#include "varan_app/suites.hpp"

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
  varan::app::SuiteOptions opt;
  if (argc > 1) opt.seed = std::strtoull(argv[1], nullptr, 10);
  opt.on_row = [](const varan::app::CriterionRow& r) {
    varan::app::SuiteReport one;
    one.rows.push_back(r);
    std::cout << one.table() << std::flush;
  };
  const varan::app::SuiteReport rep = varan::app::run_acceptance(opt);
  int passed = 0;
  for (const auto& r : rep.rows) passed += r.pass ? 1 : 0;
  std::cout << passed << "/" << rep.rows.size() << " criteria passed\n";
  return rep.all_pass() && rep.rows.size() == varan::app::kAcceptanceCriteria ? 0 : 1;
}
