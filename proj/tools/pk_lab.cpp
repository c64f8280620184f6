// pk-lab: build catalog triples, run verification suites, write reports.
//
// exit codes: 0 all checks pass, 1 a check failed, 2 bad configuration,
// 3 constructor precondition failed on the box

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "pklab/ad_check.hpp"
#include "pklab/errors.hpp"
#include "pklab/suite.hpp"

using namespace pklab;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::pair<std::string, std::string> key_value(const std::string& s, const char* what) {
  auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(std::string(what) + " '" + s + "' is not NAME=VALUE");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f << text;
}

struct RunArgs {
  std::string family, preset = "default", box, checks = "all", json, csv;
  std::vector<std::string> params, tols;
  int points = 20;
  std::uint64_t seed = 1;
  bool timing = false;
};

int cmd_run(const RunArgs& a) {
  SuiteConfig c;
  c.form = preset(parse_family(a.family), a.preset);
  for (const auto& p : a.params) {
    auto [k, v] = key_value(p, "--param");
    set_param(c.form, k, v);
  }
  if (!a.box.empty()) c.form.box = Box::parse(a.box);
  if (a.checks != "all") c.checks = split(a.checks, ',');
  for (const auto& t : a.tols) {
    auto [k, v] = key_value(t, "--tol");
    try {
      std::size_t used = 0;
      c.tolerances[k] = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
    } catch (const std::logic_error&) {
      throw ConfigError("--tol " + k + ": '" + v + "' is not a number");
    }
  }
  c.points = a.points;
  c.seed = a.seed;

  SuiteResult r = run(c);
  std::cout << family_name(c.form.family) << " / " << c.form.preset << " on " << c.form.box.to_string() << "\n";
  std::cout << r.report.to_text();
  if (!a.json.empty()) write_file(a.json, r.report.to_json(a.timing).dump(2) + "\n");
  if (!a.csv.empty()) {
    if (r.curves.empty()) throw ConfigError("--csv needs the geodesic check");
    std::ostringstream os;
    write_csv(os, r.curves.front());
    write_file(a.csv, os.str());
  }
  return r.report.all_pass() ? 0 : 1;
}

int cmd_demo(int points, std::uint64_t seed, const std::string& json) {
  EinsteinDemo d = demo_einstein(points, seed);
  std::cout << "lambda = " << d.lambda << ", lambda~ against lambda alpha^3\n";
  std::cout << " alpha  beta      lambda~    expected   discrepancy  points  note\n";
  for (const auto& r : d.rows) {
    std::cout << std::setw(6) << r.alpha << std::setw(6) << r.beta;
    if (r.skipped) {
      std::cout << "  " << std::setw(10) << "-" << "  " << std::setw(10) << r.expected << "  " << std::setw(12) << "-";
    } else {
      std::cout << std::fixed << std::setprecision(6) << "  " << std::setw(10) << r.lambda_tilde << "  " << std::setw(10)
                << r.expected << std::scientific << std::setprecision(2) << "  " << std::setw(12) << r.discrepancy;
    }
    std::cout << std::defaultfloat << "  " << std::setw(6) << r.points << "  " << r.note << "\n";
  }
  VerificationReport rep = d.report();
  std::cout << rep.to_text();
  if (!json.empty()) {
    auto j = rep.to_json();
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : d.rows) {
      nlohmann::ordered_json o;
      o["alpha"] = r.alpha;
      o["beta"] = r.beta;
      o["skipped"] = r.skipped;
      if (!r.skipped) {
        o["lambda_tilde"] = r.lambda_tilde;
        o["discrepancy"] = r.discrepancy;
        o["spread"] = r.spread;
        o["ricci_residual"] = r.ricci_residual;
      }
      o["expected"] = r.expected;
      o["points"] = r.points;
      if (!r.note.empty()) o["note"] = r.note;
      rows.push_back(o);
    }
    j["rows"] = rows;
    write_file(json, j.dump(2) + "\n");
  }
  return rep.all_pass() ? 0 : 1;
}

int cmd_list() {
  std::cout << "families (presets; parameters):\n";
  for (Family f : all_families()) {
    std::cout << "  " << family_name(f) << " (";
    auto ps = preset_names(f);
    for (size_t i = 0; i < ps.size(); ++i) std::cout << (i ? ", " : "") << ps[i];
    std::cout << "; ";
    auto ap = allowed_params(f);
    for (size_t i = 0; i < ap.size(); ++i) std::cout << (i ? " " : "") << ap[i];
    std::cout << ")\n";
  }
  std::cout << "checks:";
  for (const auto& c : check_groups()) std::cout << " " << c;
  std::cout << "\n";
  return 0;
}

int cmd_ad(int n, std::uint64_t seed) {
  AdCheckResult r = jet_fd_agreement(n, seed);
  bool ok = r.max_error < 1e-6;
  std::cout << (ok ? "PASS" : "FAIL") << " jet vs finite differences: " << r.comparisons << " comparisons over "
            << r.compositions << " compositions, max relative error " << r.max_error << "\n";
  if (!ok) std::cout << "  worst: " << r.worst << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pk-lab: para-Kahler / pc-projective verification runner"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "build a normal form and run verification checks");
  run_cmd->add_option("--family", ra.family, "family name (see `pk-lab list`)")->required();
  run_cmd->add_option("--preset", ra.preset, "named parameter set")->capture_default_str();
  run_cmd->add_option("--param", ra.params, "NAME=EXPR override, repeatable");
  run_cmd->add_option("--box", ra.box, "lo:hi,lo:hi,lo:hi,lo:hi");
  run_cmd->add_option("--checks", ra.checks, "comma list of check groups, or all")->capture_default_str();
  run_cmd->add_option("--points", ra.points, "sample points per check")->capture_default_str();
  run_cmd->add_option("--seed", ra.seed, "sampling seed")->capture_default_str();
  run_cmd->add_option("--tol", ra.tols, "NAME=VALUE tolerance override (entry, prefix or group), repeatable");
  run_cmd->add_option("--json", ra.json, "write the JSON report here");
  run_cmd->add_option("--csv", ra.csv, "write the first companion geodesic here");
  run_cmd->add_flag("--timing", ra.timing, "include runtime in the JSON report");

  int demo_points = 20;
  std::uint64_t demo_seed = 1;
  std::string demo_json;
  auto* demo_cmd = app.add_subcommand("demo-einstein", "Einstein constant of the (alpha, beta) family on a 5x5 grid");
  demo_cmd->add_option("--points", demo_points, "sample points")->capture_default_str();
  demo_cmd->add_option("--seed", demo_seed, "sampling seed")->capture_default_str();
  demo_cmd->add_option("--json", demo_json, "write the JSON report here");

  auto* list_cmd = app.add_subcommand("list", "families, presets, parameters and check groups");

  int ad_n = 200;
  std::uint64_t ad_seed = 1;
  auto* ad_cmd = app.add_subcommand("ad-check", "randomized jet vs finite-difference comparison");
  ad_cmd->add_option("--count", ad_n, "random compositions")->capture_default_str();
  ad_cmd->add_option("--seed", ad_seed, "seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) return cmd_run(ra);
    if (*demo_cmd) return cmd_demo(demo_points, demo_seed, demo_json);
    if (*list_cmd) return cmd_list();
    if (*ad_cmd) return cmd_ad(ad_n, ad_seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ConstraintError& e) {
    std::cerr << "constraint violated: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
