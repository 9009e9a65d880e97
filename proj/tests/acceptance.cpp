#include <iostream>

#include "wgm/acceptance.hpp"

int main() {
    int failed = 0;
    for (const auto& r : wgm::run_acceptance()) {
        std::cout << (r.passed ? "PASS" : "FAIL") << " criterion " << r.id << " (" << r.name << "): " << r.detail
                  << " [" << r.seconds << " s]\n";
        failed += r.passed ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
