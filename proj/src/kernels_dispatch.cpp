#include "sdmqkd/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace sdmqkd::kernels {

#ifndef SDMQKD_BUILD_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

bool avx2_available() {
#ifdef SDMQKD_BUILD_AVX2
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

namespace {

const KernelTable* g_forced = nullptr;

const KernelTable* resolve() {
  if (const char* env = std::getenv("SDMQKD_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return &scalar_table();
    if (std::strcmp(env, "avx2") == 0 && avx2_available()) return avx2_table();
  }
  if (avx2_available()) return avx2_table();
  return &scalar_table();
}

}  // namespace

const KernelTable& active() {
  if (g_forced != nullptr) return *g_forced;
  static const KernelTable* auto_table = resolve();
  return *auto_table;
}

void force(const char* name) {
  if (name == nullptr) {
    g_forced = nullptr;
  } else if (std::strcmp(name, "scalar") == 0) {
    g_forced = &scalar_table();
  } else if (std::strcmp(name, "avx2") == 0 && avx2_available()) {
    g_forced = avx2_table();
  }
}

}  // namespace sdmqkd::kernels
