#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace saddle::cli {

/// One compared quantity of a reproduction table.
struct BenchRow {
  std::string table;
  std::string row;       // case label
  std::string quantity;
  double reference_value = 0.0;
  double reproduced_value = 0.0;
  std::string tolerance;
  bool pass = false;
};

struct BenchOptions {
  int seeds = 10;
  std::uint64_t base_seed = 0;
  int jobs = 1;
};

/// Table names accepted by run_bench, plus "all".
const std::vector<std::string>& bench_tables();

/// Throws std::invalid_argument for an unknown table.
std::vector<BenchRow> run_bench(const std::string& table, const BenchOptions& options);

void print_bench(std::ostream& out, const std::vector<BenchRow>& rows);
nlohmann::json bench_to_json(const std::vector<BenchRow>& rows);

}  // namespace saddle::cli
