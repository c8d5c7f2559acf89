#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "kreinlab/convergence_lab.hpp"

namespace kreinlab::report {

/// n,spec,vector_id,sre_error,norm_resolvent_est,admissibility_plus,
/// admissibility_minus,eig1,eig2,eig3 with reals in %.17g and "nan" for
/// missing values. No timestamps: identical reports give identical bytes.
std::string to_csv(const lab::ConvergenceReport& report);

/// Config echo, warnings, library version, config hash and the report's
/// derived metadata.
nlohmann::json sidecar(const lab::ConvergenceReport& report);

/// Writes every (path, content) pair to a temporary sibling first and
/// renames only after all writes succeeded, so a failure leaves no partial
/// report behind.
void write_files_atomically(const std::vector<std::pair<std::string, std::string>>& files);

/// <dir>/<stem>.csv and <dir>/<stem>.json. Returns the two paths.
std::pair<std::string, std::string> write_report(const lab::ConvergenceReport& report, const std::string& directory,
                                                 const std::string& stem);

std::string library_version();

}  // namespace kreinlab::report
