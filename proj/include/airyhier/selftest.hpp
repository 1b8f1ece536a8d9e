#pragma once

#include <ostream>
#include <string>

namespace airyhier::selftest {

/// Run the acceptance suite, printing one "[PASS]/[FAIL] criterion k ..."
/// line per criterion to `out`. `quick` trims the expensive criteria to a
/// subset that completes in well under a minute. If `golden_dir` is
/// non-empty, criterion 1 compares hierarchy renders byte-exactly against
/// the files in it; otherwise embedded copies of the golden strings are
/// used. Returns the number of failed criteria.
int run_acceptance(bool quick, std::ostream& out,
                   const std::string& golden_dir = "");

}  // namespace airyhier::selftest
