#pragma once

#include <thread>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#endif

namespace pimstm::detail {

// Busy-wait step: a few pause instructions, then hand the core to whoever
// holds what we are waiting for.
inline void spin_wait(unsigned& round) {
  if (round < 4) {
#if defined(__x86_64__) || defined(__i386__)
    for (unsigned i = 0; i < (1u << round); ++i) _mm_pause();
#endif
    ++round;
    return;
  }
  std::this_thread::yield();
}

}  // namespace pimstm::detail
