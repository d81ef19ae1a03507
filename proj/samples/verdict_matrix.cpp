// Prints the (a), (a_f), (t_f), (a_f^s) verdict matrix for every gallery scene.
#include <iomanip>
#include <iostream>

#include "strathom/strathom.hpp"

int main() {
  using namespace strathom;
  std::cout << std::left << std::setw(24) << "scene" << std::setw(6) << "inc";
  for (const char* c : {"a", "af", "tf", "afs"}) std::cout << std::setw(14) << c;
  std::cout << "\n";
  for (const auto& sc : gallery()) {
    if (sc.incidences.empty()) continue;
    const auto ctx = build_context(sc);
    const auto vs = check_scene(sc, ctx, CheckOptions{});
    for (std::size_t i = 0; i < vs.size(); i += 4) {
      std::cout << std::setw(24) << sc.name << std::setw(6) << i / 4;
      for (std::size_t k = i; k < i + 4; ++k) std::cout << std::setw(14) << short_name(vs[k].status);
      std::cout << "\n";
    }
  }
}
