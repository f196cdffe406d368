// byzset: certify graphs, check redundancy, run scenarios.
//
// Exit status: 0 all holds/converged, 1 a condition failed or a run did not
// converge, 2 usage, parse or validation error.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "byzset/cli.hpp"
#include "byzset/error.hpp"

using namespace byzset;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Common {
  std::string format = "text";
  std::size_t jobs = 1;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--format", c.format, "text or structured")->check(CLI::IsMember({"text", "structured"}));
  sub->add_option("--jobs", c.jobs, "parallel sub-runs")->check(CLI::PositiveNumber);
}

int finish(const Scenario& s, const Common& c) {
  auto report = run_scenario(s, c.jobs);
  std::cout << emit_report(report, c.format == "structured" ? ReportFormat::Structured : ReportFormat::Text);
  return exit_code(report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Byzantine set intersection toolkit"};
  app.require_subcommand(1);

  Common common;
  std::string file, graph_file, property;
  std::optional<std::size_t> f;

  auto* certify = app.add_subcommand("certify", "check the graph conditions");
  certify->add_option("graph", file, "graph file")->required();
  certify->add_option("--f", f, "fault bound (default: from the file)");
  add_common(certify, common);

  auto* check = app.add_subcommand("check", "check an instance redundancy property");
  check->add_option("instance", file, "instance file")->required();
  check->add_option("--property", property, "b, c, 3f or d")->required()->check(CLI::IsMember({"b", "c", "3f", "d"}));
  check->add_option("--graph", graph_file, "graph file (property d)");
  add_common(check, common);

  auto* run = app.add_subcommand("run", "run a scenario file");
  run->add_option("scenario", file, "scenario file")->required();
  add_common(run, common);

  auto* optimize = app.add_subcommand("optimize", "run the optimization reduction over every fault placement");
  optimize->add_option("profile", file, "cost profile file")->required();
  optimize->add_option("--graph", graph_file, "graph file")->required();
  add_common(optimize, common);

  auto* replay = app.add_subcommand("replay", "re-run every record of a structured report and compare");
  replay->add_option("report", file, "structured report file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*certify) {
      auto g = parse_graph_text(slurp(file));
      Scenario s;
      s.mode = Mode::Certify;
      s.graph = g.graph;
      s.f = f.value_or(g.f);
      validate_scenario(s);
      return finish(s, common);
    }
    if (*check) {
      Scenario s;
      s.mode = Mode::CheckRedundancy;
      s.instance = parse_instance_text(slurp(file));
      s.f = s.instance->f;
      if (!graph_file.empty()) s.graph = parse_graph_text(slurp(graph_file)).graph;
      for (Property p : {Property::B, Property::C, Property::ThreeF, Property::D})
        if (property_name(p) == property) s.property = p;
      validate_scenario(s);
      return finish(s, common);
    }
    if (*run) return finish(parse_scenario(slurp(file)), common);
    if (*optimize) {
      Scenario s;
      s.mode = Mode::Optimize;
      s.profile = parse_profile_text(slurp(file));
      s.f = s.profile->f;
      s.graph = parse_graph_text(slurp(graph_file)).graph;
      s.faults = std::nullopt;
      validate_scenario(s);
      return finish(s, common);
    }
    if (*replay) {
      auto report = parse_report(slurp(file));
      std::size_t mismatches = 0;
      for (const auto& rec : report.records) {
        auto again = replay_record(rec);
        if (!(again == rec)) {
          ++mismatches;
          std::cout << "mismatch: " << rec.replay << "\n";
        }
      }
      std::cout << report.runs() << " records replayed, " << mismatches << " mismatches\n";
      return mismatches == 0 ? 0 : 1;
    }
  } catch (const ParseError& e) {
    std::cerr << "byzset: " << file << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "byzset: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
