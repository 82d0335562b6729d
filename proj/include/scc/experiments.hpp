#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "scc/metrology.hpp"

namespace scc {

/// Flat key=value configuration: a text file of `key = value` lines with
/// `#` comments, plus command-line overrides. Numeric values accept plain
/// decimals and exact fractions like 4/3.
class KeyValueConfig {
  public:
    static KeyValueConfig from_file(const std::string& path);
    static double parse_number(const std::string& text, const std::string& key);

    void set(const std::string& key, const std::string& value);
    void apply_override(const std::string& key_equals_value);

    bool has(const std::string& key) const;
    std::string str(const std::string& key, const std::string& fallback) const;
    double number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    int integer_or(const std::string& key, int fallback) const;
    bool flag_or(const std::string& key, bool fallback) const;
    std::vector<double> number_list(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

  private:
    std::map<std::string, std::string> entries_;
};

/// One output table: resolved settings, column names, and rows of cells.
/// A cell is a number, a string (labels, flags), or empty; flagged rows
/// leave the affected numeric cells empty rather than carrying values.
using Cell = std::variant<std::monostate, double, std::string>;

struct Table {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

/// CSV: `# key=value` metadata lines, a header row, UTF-8, comma separator,
/// 17 significant digits. JSON: one document with "config" and "rows".
void write_csv(const Table& table, const std::string& path);
void write_json(const Table& table, const std::string& path);

struct ExperimentResult {
    Table table;
    std::vector<std::pair<std::string, std::string>> summary;
    std::string output_path;  // empty when nothing was written
};

/// Runs one named experiment (spectrum, seed-sweep, dwell-sweep,
/// phase-sweep, eta1-sweep) and writes <output_dir>/<name>.<format>.
ExperimentResult run_experiment(const std::string& name, const KeyValueConfig& cfg);

struct PropertyCheck {
    std::string name;
    bool pass = false;
    double worst = 0.0;      // measured worst-case value
    double tolerance = 0.0;  // the bound it was held against
    std::string detail;
};

struct ValidationReport {
    std::vector<PropertyCheck> checks;
    bool all_pass() const;
};

/// Full property suite for the configured model and sequence: solver
/// residuals, oracle matches, orthogonality, normalisation, derivative and
/// information-theoretic identities. `corrupt_state >= 0` perturbs that
/// state's rapidities first (a self-test that the suite catches damage).
ValidationReport validate_model(const KeyValueConfig& cfg, int corrupt_state = -1);

}  // namespace scc
