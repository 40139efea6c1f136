#include "wnslab/cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "wnslab/checker.hpp"
#include "wnslab/inaccessibility.hpp"
#include "wnslab/scenario.hpp"
#include "wnslab/simulation.hpp"

namespace wnslab {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// "-" means the output stream.
template <class F>
void write_to(const std::string& path, std::ostream& out, F&& body) {
  if (path == "-") {
    body(out);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path);
  body(f);
  if (!f) throw UsageError("write to " + path + " failed");
}

Trace load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  return read_trace(in);
}

std::pair<std::uint32_t, std::uint32_t> parse_bo_range(const std::string& s) {
  const auto dots = s.find("..");
  auto num = [&](std::string_view v) {
    std::uint32_t x = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size()) throw UsageError("bad --bo-range '" + s + "', expected A..B");
    return x;
  };
  if (dots == std::string::npos) throw UsageError("bad --bo-range '" + s + "', expected A..B");
  const auto lo = num(std::string_view(s).substr(0, dots));
  const auto hi = num(std::string_view(s).substr(dots + 2));
  if (lo > hi || hi > 14) throw UsageError("--bo-range needs 0 <= A <= B <= 14");
  return {lo, hi};
}

int cmd_run(const std::string& scenario_path, std::optional<std::uint64_t> seed, const std::string& trace_out,
            std::optional<SimTime> until, std::ostream& out) {
  Scenario s = load_scenario(scenario_path);
  if (seed) s.seed = *seed;
  Simulation sim(s);
  sim.run(until);
  write_to(trace_out, out, [&](std::ostream& o) { write_trace(o, sim.trace()); });
  if (trace_out != "-") {
    const auto sum = summarize(sim.trace());
    out << "records " << sim.trace().size() << ", frames " << sum.frames << ", messages " << sum.messages_ok << "/"
        << sum.messages << " delivered" << (sim.segment_failed() ? ", segment failed" : "") << "\n";
  }
  return 0;
}

int cmd_check(const std::string& trace_path, const std::string& scenario_path, const std::string& report_path,
              std::ostream& out) {
  const Scenario s = load_scenario(scenario_path);
  const Trace t = load_trace(trace_path);
  const PropertyReport r = check(t, s);
  for (const auto& p : r.properties) {
    out << p.name << " " << (p.pass ? "pass" : "FAIL");
    if (!p.pass) {
      out << " at";
      for (std::size_t n = 0; n < std::min<std::size_t>(p.counterexample.size(), 8); ++n) out << " " << p.counterexample[n];
      if (p.counterexample.size() > 8) out << " ...";
      out << ": " << p.detail;
    }
    out << "\n";
  }
  if (!report_path.empty()) write_to(report_path, out, [&](std::ostream& o) { o << to_json(r); });
  return r.all_pass() ? 0 : 1;
}

int cmd_analyze(const std::string& range, const std::string& csv, std::ostream& out) {
  const auto [lo, hi] = parse_bo_range(range);
  write_to(csv, out, [&](std::ostream& o) {
    o << "scenario,BO,SO,unmitigated_symbols,mitigated_symbols,ratio\n";
    for (const auto& row : analysis_rows(lo, hi)) {
      o << to_string(row.scenario) << "," << row.BO << "," << row.SO << "," << row.unmitigated << ","
        << row.mitigated << "," << std::fixed << std::setprecision(6) << row.ratio() << "\n";
    }
  });
  return 0;
}

int cmd_report(const std::string& trace_path, const std::string& csv, std::ostream& out) {
  const Trace t = load_trace(trace_path);
  const TraceSummary s = summarize(t);
  std::vector<SimTime> elapsed;
  std::uint32_t rounds = 0;
  for (const auto& r : t) {
    if (const auto* d = std::get_if<ev::MsgDone>(&r.event); d && d->success) {
      elapsed.push_back(d->elapsed);
      rounds = std::max(rounds, d->rounds);
    }
  }
  write_to(csv, out, [&](std::ostream& o) {
    o << "metric,value\n";
    o << "records," << t.size() << "\n";
    o << "frames," << s.frames << "\n";
    o << "deliveries," << s.deliveries << "\n";
    o << "omissions," << s.omissions << "\n";
    o << "signals," << s.signals << "\n";
    o << "switches," << s.switches << "\n";
    o << "periods," << s.periods << "\n";
    o << "messages," << s.messages << "\n";
    o << "messages_ok," << s.messages_ok << "\n";
    if (!elapsed.empty()) {
      SimTime total = 0;
      for (SimTime e : elapsed) total += e;
      o << "elapsed_min," << *std::min_element(elapsed.begin(), elapsed.end()) << "\n";
      o << "elapsed_max," << *std::max_element(elapsed.begin(), elapsed.end()) << "\n";
      o << "elapsed_mean," << std::fixed << std::setprecision(1)
        << static_cast<double>(total) / static_cast<double>(elapsed.size()) << "\n";
      o << "rounds_max," << rounds << "\n";
    }
  });
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discrete-event lab for wireless network segments"};
  app.require_subcommand(1);

  std::string scenario, trace, trace_out = "-", report, csv = "-", range = "0..14";
  std::optional<std::uint64_t> seed;
  std::optional<SimTime> until;

  auto* run = app.add_subcommand("run", "simulate a scenario and write its trace");
  run->add_option("--scenario", scenario, "scenario file")->required();
  run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--trace-out", trace_out, "trace file ('-' for stdout)");
  run->add_option("--until", until, "stop time in symbols (default: scenario horizon)");

  auto* chk = app.add_subcommand("check", "verify WnS1-WnS7 over a trace");
  chk->add_option("--trace", trace, "trace file")->required();
  chk->add_option("--scenario", scenario, "scenario the trace came from")->required();
  chk->add_option("--report", report, "JSON report file ('-' for stdout)");

  auto* ana = app.add_subcommand("analyze", "worst-case inaccessibility table");
  ana->add_option("--bo-range", range, "beacon orders A..B");
  ana->add_option("--csv", csv, "output CSV ('-' for stdout)");

  auto* rep = app.add_subcommand("report", "summary statistics of a trace");
  rep->add_option("--trace", trace, "trace file")->required();
  rep->add_option("--csv", csv, "output CSV ('-' for stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (*run) return cmd_run(scenario, seed, trace_out, until, out);
    if (*chk) return cmd_check(trace, scenario, report, out);
    if (*ana) return cmd_analyze(range, csv, out);
    if (*rep) return cmd_report(trace, csv, out);
  } catch (const ScenarioError& e) {
    err << "scenario error: " << e.what() << "\n";
  } catch (const TraceFormatError& e) {
    err << "malformed trace: " << e.what() << "\n";
  } catch (const InaAccountError& e) {
    err << "malformed trace: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return 2;
}

}  // namespace wnslab
