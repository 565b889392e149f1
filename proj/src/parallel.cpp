#include "lowdeg/parallel.hpp"

#include <cstdlib>
#include <string>

namespace lowdeg {

unsigned default_workers() {
  if (const char* env = std::getenv("LOWDEG_WORKERS")) {
    try {
      long value = std::stol(env);
      if (value >= 1) return static_cast<unsigned>(value);
    } catch (...) {
    }
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace lowdeg
