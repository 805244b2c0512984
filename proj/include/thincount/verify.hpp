#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace thincount {

struct CheckResult
{
    std::string name;
    bool passed = false;
    std::string detail;
};

struct SuiteResult
{
    std::string suite;
    std::vector<CheckResult> checks;
    double seconds = 0.0;

    bool passed() const noexcept;
};

//! Built-in suites, in the order `all` runs them.
std::vector<std::string_view> suite_names();

/// Runs one named suite. Raises InvalidArgument for an unknown name.
SuiteResult run_suite(std::string_view name);

//! One "[PASS]"/"[FAIL]" line per check followed by a suite footer.
std::string format(SuiteResult const& result);

}  // namespace thincount
