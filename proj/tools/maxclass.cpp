// maxclass <command> --job <file> [--seed S] [--out DIR]

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "maxclass/error.hpp"
#include "maxclass/job.hpp"

using namespace maxclass;
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out || !(out << text)) throw InputError("cli.io", "cannot write " + p.string());
}

int status_of(const Error& e) { return e.kind() == ErrorKind::Input ? 1 : 2; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Invariants of rank-2 distributions of maximal class"};
  app.require_subcommand(1);
  std::string job_path, out_dir;
  std::int64_t seed = -1;
  int n = 0;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"growth", "small growth vector at the base points"},
      {"class", "class m(q) from sampled covectors"},
      {"characteristic", "samples of the characteristic curve through a regular covector"},
      {"rho-profile", "density rho along the Jacobi curve (CSV t,value)"},
      {"projectivize", "projective parameter psi and the recomputed rho"},
      {"report", "all of the above as one JSON report"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--job", job_path, "TOML job file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "overrides the job seed")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", out_dir, "directory for <command>.json (and .csv)");
  }
  CLI::App* verify = app.add_subcommand("verify-model", "symmetry algebra of z' = (y^(n-3))^2");
  verify->add_option("--n", n, "dimension of the model")->required();
  verify->add_option("--out", out_dir, "directory for verify-model.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    job::Json body;
    std::vector<std::pair<double, double>> rows;
    bool numerical_failure = false;
    if (command == "verify-model") {
      body = job::verify_model(n);
    } else {
      job::JobSpec spec = job::load_job(job_path);
      if (seed >= 0) spec.seed = static_cast<std::uint64_t>(seed);
      if (command == "growth") body = job::growth(spec);
      else if (command == "class") body = job::class_report(spec);
      else if (command == "characteristic") body = job::characteristic(spec);
      else if (command == "rho-profile") body = job::rho_profile(spec, &rows);
      else if (command == "projectivize") body = job::projectivize(spec, &rows);
      else {
        body = job::report(spec);
        numerical_failure = !body["errors"].empty();
      }
    }
    std::string text = job::dump(job::envelope(command, std::move(body)));
    if (out_dir.empty()) {
      std::cout << text;
    } else {
      fs::create_directories(out_dir);
      write_file(fs::path(out_dir) / (command + ".json"), text);
      if (!rows.empty()) write_file(fs::path(out_dir) / (command + ".csv"), job::to_csv(rows));
    }
    return numerical_failure ? 2 : 0;
  } catch (const Error& e) {
    std::cerr << "maxclass " << command << ": " << e.what() << "\n";
    return status_of(e);
  } catch (const std::exception& e) {
    std::cerr << "maxclass " << command << ": " << e.what() << "\n";
    return 2;
  }
}
