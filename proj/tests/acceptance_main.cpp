// Acceptance battery driver: one pass/fail line per criterion, nonzero exit
// when any criterion fails.
//
//   acceptance [--fast] [--out DIR] [--seed U64]

#include <cstring>
#include <iostream>
#include <string>

#include "slowbond/acceptance.hpp"

int main(int argc, char** argv) {
    slowbond::acceptance::Options opt;
    opt.out_dir = "acceptance-out";
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--fast") {
            opt.full = false;
        } else if (arg == "--out" && i + 1 < argc) {
            opt.out_dir = argv[++i];
        } else if (arg == "--seed" && i + 1 < argc) {
            opt.seed = std::stoull(argv[++i]);
        } else {
            std::cerr << "usage: acceptance [--fast] [--out DIR] [--seed U64]\n";
            return 2;
        }
    }

    const auto reports = slowbond::acceptance::run(opt, std::cout);
    std::size_t fails = 0;
    for (const auto& r : reports) fails += r.pass ? 0 : 1;
    std::cout << "----\n"
              << (reports.size() - fails) << "/" << reports.size() << " criteria passed\n";
    return fails == 0 ? 0 : 1;
}
