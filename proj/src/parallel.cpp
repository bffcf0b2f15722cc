#include "cmv/parallel.hpp"

#include <cstdlib>
#include <string>

namespace cmv {

unsigned default_workers(const char* env_var) {
  if (const char* v = std::getenv(env_var)) {
    try {
      const long n = std::stol(v);
      if (n > 0) return static_cast<unsigned>(n);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace cmv
