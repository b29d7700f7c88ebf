// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.
#include <cstdio>
#include <cstdlib>

#include "lemni/parallel.hpp"
#include "lemni/verify.hpp"

int main(int argc, char** argv) {
    std::uint64_t seed = 2026;
    if (argc > 1) seed = std::strtoull(argv[1], nullptr, 10);
    lemni::thread_cap().store(0); // use all cores
    try {
        return lemni::verify::run_and_print(seed) ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "acceptance: aborted by exception: %s\n", e.what());
        return 1;
    }
}
