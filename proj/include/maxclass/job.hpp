#pragma once

// Batch jobs: a TOML description of one distribution plus sampling options,
// and the JSON/CSV reports the command-line tool writes.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "maxclass/distribution.hpp"

namespace maxclass::job {

inline constexpr int kReportVersion = 1;

struct JobSpec {
  // exactly one of these
  std::optional<dist::OdeModel> ode;
  std::vector<std::string> chart;
  std::vector<std::string> X1, X2;
  std::string label;

  std::vector<Eigen::VectorXd> points;  // explicit base points
  int random_points = 0;                // or this many drawn with the seed
  double radius = 1.0;
  std::optional<std::uint64_t> seed;
  int covector_draws = 25;

  double char_time = 0.5;  // characteristic: integrate over [0, time]
  int char_samples = 11;
  int profile_samples = 41;
  int proj_samples = 101;
  int proj_checks = 21;
  int verify_n = 0;  // report: include verify-model when > 0

  dist::Distribution2 distribution() const;
};

/// Parses TOML text; `origin` only appears in diagnostics.
JobSpec parse_job(const std::string& text, const std::string& origin = "job");
JobSpec load_job(const std::string& path);

/// Base points of the job (explicit ones, else random ones from the seed).
std::vector<Eigen::VectorXd> base_points(const JobSpec& job, int n);

using Json = nlohmann::json;  // std::map backed: keys come out sorted

Json growth(const JobSpec& job);
Json class_report(const JobSpec& job);
Json characteristic(const JobSpec& job);
/// rho along the Jacobi curve of the first base point; `profile` gets (t, rho).
Json rho_profile(const JobSpec& job, std::vector<std::pair<double, double>>* profile = nullptr);
/// psi samples on the window plus the recomputed rho residual.
Json projectivize(const JobSpec& job, std::vector<std::pair<double, double>>* psi = nullptr);
Json verify_model(int n);
/// Every section above; numerical failures are recorded per section.
Json report(const JobSpec& job);

/// Wraps a section with the version and command fields.
Json envelope(const std::string& command, Json body);
/// `t,value` with 17 significant digits.
std::string to_csv(const std::vector<std::pair<double, double>>& rows);
std::string dump(const Json& j);

}  // namespace maxclass::job
