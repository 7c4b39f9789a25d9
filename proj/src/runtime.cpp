#include "stunet/runtime.hpp"

#include <cstdlib>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace stunet {

void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 32 << 20);  // glibc rejects larger values
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
#endif
}

}  // namespace stunet
