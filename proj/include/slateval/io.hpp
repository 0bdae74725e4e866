#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "slateval/policy.hpp"
#include "slateval/slate.hpp"

namespace slateval {

/// Logged data: one "context_id<TAB>a0,a1,...<TAB>reward" line per example.
/// Blank lines and lines starting with '#' are skipped.
std::vector<LoggedExample> read_logged_examples(std::istream& in);
void write_logged_examples(std::ostream& out, std::span<const LoggedExample> data);

/// Explicit policy: one "context_id<TAB>a0,a1,...<TAB>probability" line per slate.
ExplicitTable read_explicit_table(std::istream& in);
void write_explicit_table(std::ostream& out, const ExplicitTable& table);

std::vector<LoggedExample> load_logged_examples(const std::string& path);
Policy load_explicit_policy(const std::string& path);

}  // namespace slateval
