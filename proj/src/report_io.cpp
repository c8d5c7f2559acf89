#include "kreinlab/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "kreinlab/errors.hpp"

#ifndef KREINLAB_VERSION
#define KREINLAB_VERSION "0.0.0"
#endif

namespace kreinlab::report {

namespace {

std::string real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string library_version() { return KREINLAB_VERSION; }

std::string to_csv(const lab::ConvergenceReport& report) {
  std::string out =
      "n,spec,vector_id,sre_error,norm_resolvent_est,admissibility_plus,admissibility_minus,eig1,eig2,eig3\n";
  for (const auto& r : report.rows) {
    out += real(r.n) + "," + r.spec + "," + r.vector_id + "," + real(r.sre_error) + "," + real(r.norm_resolvent_est) +
           "," + real(r.admissibility_plus) + "," + real(r.admissibility_minus);
    for (double e : r.eig) out += "," + real(e);
    out += "\n";
  }
  return out;
}

nlohmann::json sidecar(const lab::ConvergenceReport& report) {
  nlohmann::json j;
  j["kind"] = report.kind;
  j["config"] = to_json(report.config);
  j["config_hash"] = config_hash(report.config);
  j["library_version"] = library_version();
  j["warnings"] = report.warnings;
  j["metadata"] = report.metadata;
  return j;
}

void write_files_atomically(const std::vector<std::pair<std::string, std::string>>& files) {
  namespace fs = std::filesystem;
  std::vector<std::string> temporaries;
  auto cleanup = [&] {
    std::error_code ec;
    for (const auto& t : temporaries) fs::remove(t, ec);
  };
  for (const auto& [path, content] : files) {
    const std::string tmp = path + ".tmp";
    temporaries.push_back(tmp);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) {
      cleanup();
      throw ValidationError("out", "cannot write '" + tmp + "'");
    }
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    std::error_code ec;
    fs::rename(temporaries[i], files[i].first, ec);
    if (ec) {
      cleanup();
      throw ValidationError("out", "cannot rename into '" + files[i].first + "': " + ec.message());
    }
  }
}

std::pair<std::string, std::string> write_report(const lab::ConvergenceReport& report, const std::string& directory,
                                                 const std::string& stem) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw ValidationError("out", "cannot create '" + directory + "': " + ec.message());
  const std::string csv = (fs::path(directory) / (stem + ".csv")).string();
  const std::string json = (fs::path(directory) / (stem + ".json")).string();
  write_files_atomically({{csv, to_csv(report)}, {json, sidecar(report).dump(2) + "\n"}});
  return {csv, json};
}

}  // namespace kreinlab::report
