// Acceptance suite: one numbered criterion per function, each printing a
// single [PASS]/[FAIL] line. Run all with no arguments or a single criterion
// by number (exit status reflects the outcome).

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

namespace acc {
bool criterion(int id); // defined below
inline const int criterion_count = 13;
}

int main(int argc, char** argv) {
    std::vector<int> ids;
    if (argc > 1) {
        for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
    } else {
        for (int i = 1; i <= acc::criterion_count; ++i) ids.push_back(i);
    }
    bool all_ok = true;
    for (int id : ids) {
        if (id < 1 || id > acc::criterion_count) {
            std::fprintf(stderr, "unknown criterion %d\n", id);
            return 2;
        }
        all_ok &= acc::criterion(id);
    }
    return all_ok ? 0 : 1;
}

#include "criteria.ipp"
