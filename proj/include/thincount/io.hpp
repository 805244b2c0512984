#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include <json.hpp>

#include "thincount/inference.hpp"
#include "thincount/model.hpp"

namespace thincount {

//! A case table as read from disk, with observed counts if the file had them.
struct CaseData
{
    CaseTable table;
    std::optional<Counts> observed;
};

// CSV layout: header row naming x1..xd (contiguous, any order), optional N
// (true counts) and optional n (observed counts); one row per case.
CaseData read_case_csv(std::istream& in);
// JSON layout: {"features": [[...], ...], "true_counts": [...], "observed_counts": [...]}
// with "N" and "n" accepted as aliases for the two count arrays.
CaseData read_case_json(std::istream& in);
//! Dispatches on the extension: .json is JSON, anything else CSV.
CaseData load_case_file(std::string const& path);

void write_case_csv(std::ostream& out, CaseTable const& table,
                    std::optional<std::span<std::int64_t const>> observed = std::nullopt);

//! Counts CSV: header `n`, one count per row.
Counts read_counts_csv(std::istream& in);
Counts load_counts_file(std::string const& path);
void write_counts_csv(std::ostream& out, std::span<std::int64_t const> counts);

nlohmann::json to_json(FitResult const& result);

//! Round-trip decimal representation (%.17g), identical on every IEEE platform.
std::string format_double(double value);

}  // namespace thincount
