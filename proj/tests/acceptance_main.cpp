#include <iostream>

#include "flocksim/acceptance.hpp"

int main() {
    std::vector<flocksim::CriterionResult> rows = flocksim::run_acceptance(0);
    bool ok = flocksim::print_acceptance(std::cout, rows);
    return ok ? 0 : 1;
}
