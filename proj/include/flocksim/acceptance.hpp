#pragma once

#include <iosfwd>
#include <vector>

#include "flocksim/ensemble.hpp"

namespace flocksim {

// Runs the standing verification suite: the eight builtin scenarios with
// their declared bands, plus the deterministic property bundle. Each entry
// reports measured values in `detail`; an exception inside a criterion marks
// it failed rather than aborting the suite.
std::vector<CriterionResult> run_acceptance(int workers);

// One line per criterion; returns true when every criterion passed.
bool print_acceptance(std::ostream& os, const std::vector<CriterionResult>& rows);

} // namespace flocksim
