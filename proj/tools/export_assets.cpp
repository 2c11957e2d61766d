#include <iostream>

#include "graspme/assets.hpp"
#include "graspme/error.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: export_assets <dir>\n";
    return 1;
  }
  try {
    graspme::export_assets(graspme::complex_templates(), argv[1]);
  } catch (const graspme::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
