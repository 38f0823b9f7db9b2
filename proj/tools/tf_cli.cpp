// Command line driver: run a named experiment from a key=value config,
// list the available experiments, or describe one of them.
// Exit codes: 0 success, 1 failed checks or internal invariant errors,
// 2 configuration problems (bad usage, bad config, unknown experiment).

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "tf/experiment.hpp"

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_csv(std::ostream& os, const tf::Table& t) {
  for (std::size_t c = 0; c < t.cols.size(); ++c)
    os << (c ? "," : "") << csv_escape(t.cols[c]);
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c)
      os << (c ? "," : "") << csv_escape(row[c]);
    os << "\n";
  }
}

int run_config(const std::string& path) {
  tf::detail::thread_count();  // validate TF_THREADS up front
  tf::Config cfg = tf::Config::parse_file(path);
  tf::RunResult res = tf::run_experiment(cfg);
  std::string out = cfg.get("out", "");
  if (out.empty()) {
    write_csv(std::cout, res.table);
  } else {
    std::ofstream ofs(out);
    if (!ofs) throw tf::ConfigError("cannot open output file " + out);
    write_csv(ofs, res.table);
    std::cout << "table written to " << out << "\n";
  }
  for (const auto& line : res.summary) std::cout << line << "\n";
  std::cout << (res.ok ? "result: ok" : "result: FAILED") << "\n";
  return res.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"time-frequency experiment driver"};
  app.require_subcommand(1);

  std::string config_path, kind;
  CLI::App* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("config", config_path, "key=value config file")->required();
  CLI::App* list = app.add_subcommand("list-experiments", "list known experiment kinds");
  CLI::App* desc = app.add_subcommand("describe", "describe one experiment kind");
  desc->add_option("kind", kind, "experiment kind")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return run_config(config_path);
    if (list->parsed()) {
      for (const auto& e : tf::experiment_registry()) std::cout << e.kind << "\n";
      return 0;
    }
    if (desc->parsed()) {
      for (const auto& e : tf::experiment_registry())
        if (e.kind == kind) {
          std::cout << e.kind << "\n  " << e.blurb << "\n  keys: " << e.keys
                    << " (plus seed=<int>, out=<csv path>)\n";
          return 0;
        }
      throw tf::ConfigError("unknown experiment kind: " + kind);
    }
  } catch (const tf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
