// Acceptance suite: one pass/fail line per criterion. Placeholder until the
// library is calibrated.
#include <iostream>

int main() {
  std::cout << "acceptance suite not yet implemented\n";
  return 1;
}
