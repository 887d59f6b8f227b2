// Copyright 2026 The ftmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// ftmpc run | suite | table

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ftmpc/report.hpp"

namespace fs = std::filesystem;

namespace {

void write_table_files(const fs::path& dir, const std::vector<ftmpc::ScenarioResult>& rows) {
  std::ofstream txt(dir / "table.txt");
  ftmpc::render_table(txt, rows);
  std::ofstream csv(dir / "table.csv");
  ftmpc::write_metrics_header(csv);
  for (const auto& r : rows) ftmpc::write_metrics_row(csv, r);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive MPC fault-tolerant trajectory tracking"};
  app.require_subcommand(1);

  std::string scenario, out_dir = "out", suite_dir = "scenarios", in_dir = "out";
  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("--scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory");

  auto* suite = app.add_subcommand("suite", "Run every scenario in a directory");
  suite->add_option("--dir", suite_dir, "Scenario directory")->check(CLI::ExistingDirectory);
  suite->add_option("--out", out_dir, "Output directory");

  auto* table = app.add_subcommand("table", "Render the metrics table of a suite");
  table->add_option("--in", in_dir, "Suite output directory")->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const ftmpc::ScenarioResult r =
          ftmpc::run_and_write(ftmpc::load_scenario(scenario), out_dir);
      ftmpc::render_table(std::cout, {r});
      return r.aborted ? 1 : 0;
    }
    if (*suite) {
      const auto rows = ftmpc::run_suite(suite_dir, out_dir);
      write_table_files(out_dir, rows);
      ftmpc::render_table(std::cout, rows);
      for (const auto& r : rows) {
        if (r.aborted) return 1;
      }
      return 0;
    }
    std::ifstream is(fs::path(in_dir) / "metrics.csv");
    if (!is) {
      std::cerr << "ftmpc: no metrics.csv in " << in_dir << '\n';
      return 2;
    }
    const auto rows = ftmpc::read_metrics_csv(is);
    write_table_files(in_dir, rows);
    ftmpc::render_table(std::cout, rows);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "ftmpc: " << e.what() << '\n';
    return 2;
  }
}
