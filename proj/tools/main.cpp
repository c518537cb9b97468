#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "mfddm/study.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitMemory = 4;

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  mfddm::RunConfig config;
  try {
    std::string help;
    auto parsed = mfddm::parse_config(args, &help);
    if (!parsed) {
      std::cout << help;
      return 0;
    }
    config = *parsed;
  } catch (const mfddm::ConfigError& e) {
    std::cerr << "mfddm: " << e.what() << "\nRun 'mfddm solve --help' for usage.\n";
    return kExitConfig;
  }

  std::vector<mfddm::StudyRow> rows;
  try {
    rows = mfddm::run_study(config, &std::cerr);
  } catch (const mfddm::MemoryCapExceeded& e) {
    std::cerr << "mfddm: " << e.what() << '\n';
    return kExitMemory;
  } catch (const mfddm::ConfigError& e) {
    std::cerr << "mfddm: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "mfddm: solver failure: " << e.what() << '\n';
    return kExitSolver;
  }

  if (config.output_path.empty()) {
    mfddm::write_csv(std::cout, rows);
  } else {
    std::ofstream out(config.output_path, std::ios::binary);
    if (!out) {
      std::cerr << "mfddm: cannot open " << config.output_path << " for writing\n";
      return kExitConfig;
    }
    mfddm::write_csv(out, rows);
  }
  return 0;
}
