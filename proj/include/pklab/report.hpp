// Named residuals with tolerances and verdicts; JSON serialization.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace pklab {

inline constexpr int kReportSchemaVersion = 1;

struct CheckEntry {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  int points = 0;
  int errors = 0;  // points where evaluation threw
  std::string anchor;  // short statement of the identity being checked
  std::string note;    // errors, flags, indeterminate points
};

struct VerificationReport {
  std::vector<CheckEntry> entries;
  double runtime_seconds = 0.0;
  nlohmann::ordered_json config;  // echoed into the JSON report when set

  void add(CheckEntry e) { entries.push_back(std::move(e)); }
  void merge(const VerificationReport& o);
  void sort();
  int pass_count() const;
  int fail_count() const;
  bool all_pass() const { return fail_count() == 0; }
  const CheckEntry* find(const std::string& name) const;
  // replaces the tolerance of an entry and recomputes its verdict
  void set_tolerance(CheckEntry& e, double tol) const;

  nlohmann::ordered_json to_json(bool with_runtime = false) const;
  std::string to_text() const;
};

// worst-case accumulator over sample points for one named check
class CheckAccumulator {
 public:
  CheckAccumulator(std::string name, double tolerance, std::string anchor)
      : name_(std::move(name)), tol_(tolerance), anchor_(std::move(anchor)) {}

  void add(double residual);
  void error(const std::string& msg);
  void flag(const std::string& msg);  // noted, not a failure
  void set_tolerance(double t) { tol_ = t; }
  double worst() const { return worst_; }
  CheckEntry entry() const;

 private:
  std::string name_;
  double tol_;
  std::string anchor_;
  double worst_ = 0.0;
  int points_ = 0;
  int errors_ = 0;
  std::string first_error_;
  int flags_ = 0;
  std::string first_flag_;
};

// PKLAB_THREADS caps the worker count (default: hardware concurrency)
int worker_count();
// runs f(i) for i in [0, n); results must go to per-index slots
void parallel_for(int n, const std::function<void(int)>& f);

}  // namespace pklab
