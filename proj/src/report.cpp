#include "pklab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <sstream>
#include <thread>

namespace pklab {

void VerificationReport::merge(const VerificationReport& o) {
  entries.insert(entries.end(), o.entries.begin(), o.entries.end());
  runtime_seconds += o.runtime_seconds;
}

void VerificationReport::sort() {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const CheckEntry& a, const CheckEntry& b) { return a.name < b.name; });
}

int VerificationReport::pass_count() const {
  return static_cast<int>(std::count_if(entries.begin(), entries.end(), [](const CheckEntry& e) { return e.pass; }));
}

int VerificationReport::fail_count() const { return static_cast<int>(entries.size()) - pass_count(); }

const CheckEntry* VerificationReport::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

void VerificationReport::set_tolerance(CheckEntry& e, double tol) const {
  e.tolerance = tol;
  e.pass = e.errors == 0 && e.points > 0 && e.residual < tol;
}

nlohmann::ordered_json VerificationReport::to_json(bool with_runtime) const {
  VerificationReport sorted = *this;
  sorted.sort();
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  if (!config.is_null()) j["config"] = config;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : sorted.entries) {
    nlohmann::ordered_json o;
    o["name"] = e.name;
    // non-finite residuals are not representable in JSON
    if (std::isfinite(e.residual))
      o["residual"] = e.residual;
    else
      o["residual"] = nullptr;
    o["tolerance"] = e.tolerance;
    o["verdict"] = e.pass ? "pass" : "fail";
    o["points"] = e.points;
    o["anchor"] = e.anchor;
    if (!e.note.empty()) o["note"] = e.note;
    arr.push_back(o);
  }
  j["entries"] = arr;
  nlohmann::ordered_json s;
  s["pass"] = pass_count();
  s["fail"] = fail_count();
  if (with_runtime) s["runtime_seconds"] = runtime_seconds;
  j["summary"] = s;
  return j;
}

std::string VerificationReport::to_text() const {
  VerificationReport sorted = *this;
  sorted.sort();
  std::ostringstream os;
  std::size_t w = 10;
  for (const auto& e : sorted.entries) w = std::max(w, e.name.size());
  for (const auto& e : sorted.entries) {
    os << (e.pass ? "PASS " : "FAIL ") << std::left << std::setw(static_cast<int>(w)) << e.name << "  residual "
       << std::scientific << std::setprecision(3) << e.residual << "  tol " << e.tolerance << "  points "
       << std::defaultfloat << e.points;
    if (!e.note.empty()) os << "  [" << e.note << "]";
    os << "\n";
  }
  os << pass_count() << " passed, " << fail_count() << " failed";
  if (runtime_seconds > 0) os << " in " << std::fixed << std::setprecision(2) << runtime_seconds << " s";
  os << "\n";
  return os.str();
}

void CheckAccumulator::add(double r) {
  ++points_;
  worst_ = std::isnan(r) ? INFINITY : std::max(worst_, r);
}

void CheckAccumulator::error(const std::string& msg) {
  ++points_;
  if (errors_++ == 0) first_error_ = msg;
}

void CheckAccumulator::flag(const std::string& msg) {
  if (flags_++ == 0) first_flag_ = msg;
}

CheckEntry CheckAccumulator::entry() const {
  CheckEntry e;
  e.name = name_;
  e.residual = worst_;
  e.tolerance = tol_;
  e.points = points_;
  e.anchor = anchor_;
  e.errors = errors_;
  e.pass = errors_ == 0 && points_ > 0 && worst_ < tol_;
  std::ostringstream note;
  if (errors_) note << errors_ << " point error(s): " << first_error_;
  if (flags_) note << (errors_ ? "; " : "") << flags_ << " flagged: " << first_flag_;
  if (points_ == 0 && !errors_) note << "no points evaluated";
  e.note = note.str();
  return e;
}

int worker_count() {
  int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* s = std::getenv("PKLAB_THREADS")) {
    int cap = std::atoi(s);
    if (cap >= 1) return std::min(hw, cap);
  }
  return hw;
}

void parallel_for(int n, const std::function<void(int)>& f) {
  int workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += workers) f(i);
      } catch (...) {
        errs[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

}  // namespace pklab
