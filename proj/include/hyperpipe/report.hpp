#pragma once

// Static single-file HTML report rendered purely from a ResultTree.
//
// Sections (element ids in parentheses):
//   A performance bars with the dummy baseline      (section-performance)
//   B confusion matrix / true-vs-predicted scatter  (section-confusion | section-scatter)
//   C optimization progress per outer fold          (section-progress)
//   D pipeline structure with best values           (section-pipeline)
//   E parallel coordinates of tested configs        (section-parallel)
//   F all tested configs, pre-sorted                (section-configs)
//
// Every number in the visible text is a value from the tree, printed as an
// integer when integral and with four decimals otherwise (format_number).
// The tree itself is embedded as JSON in <script id="hyperpipe-results">.

#include <filesystem>
#include <string>

#include "hyperpipe/results.hpp"

namespace hyperpipe {

std::string format_number(double v);

/// Throws ValidationError for an incomplete tree.
std::string emit_html_report(const ResultTree& tree);
void write_html_report(const ResultTree& tree, const std::filesystem::path& path);

}  // namespace hyperpipe
