#pragma once

namespace stunet {

// Keeps large tape buffers on the heap rather than in fresh mmap'd pages;
// training otherwise spends a third of its time in page faults. No-op
// outside glibc.
void tune_allocator();

}  // namespace stunet
