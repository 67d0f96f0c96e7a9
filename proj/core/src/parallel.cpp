#include "varan/parallel.hpp"

#include <cstdlib>
#include <string>

namespace varan {

int worker_count() {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("VARAN_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1) return std::min<int>(cap, static_cast<int>(hw));
    } catch (const std::exception&) {
      // unparsable value: fall back to hardware count
    }
  }
  return static_cast<int>(hw);
}

}  // namespace varan
