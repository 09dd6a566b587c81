// Standalone acceptance battery at the reference configuration (p = 3, l = 11).
// Exit 0 when no row FAILs; the extended touching row is gated behind
// HALO_EXTENDED=1 or --extended.
#include <cstdlib>
#include <cstring>
#include <iostream>

#include "acceptance_suite.hpp"

int main(int argc, char** argv) {
  bool extended = false;
  if (const char* env = std::getenv("HALO_EXTENDED"))
    if (*env && std::strcmp(env, "0") != 0) extended = true;
  for (int i = 1; i < argc; i++)
    if (std::strcmp(argv[i], "--extended") == 0) extended = true;
  auto rows = halo::run_acceptance(extended);
  std::cout << halo::acceptance_table(rows);
  return halo::acceptance_ok(rows) ? 0 : 1;
}
