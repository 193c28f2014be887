#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ptlab/ensembles.hpp"

namespace ptlab::io {

enum class Command { Sample, Transition, Spacing, Density, MScaling, Ginibre, Scales };

std::string command_name(Command c);
Command parse_command(const std::string& name);

enum class MuUnit { Raw, Mu0, ET };

/// A rate with an explicit unit tag. Text forms: "0.2" (raw), "0.2raw",
/// "5mu0", "2ET". The paper switches units between sections; silent
/// conversion invites errors, so tags stay attached until resolution.
struct MuValue {
  double value = 0.0;
  MuUnit unit = MuUnit::Raw;
  bool operator==(const MuValue&) const = default;
};

MuValue parse_mu(const std::string& text);
std::string format_mu(const MuValue& mu);
double mu_to_raw(const MuValue& mu, const EnsembleSpec& spec);

struct RunConfig {
  Command command = Command::Scales;
  std::string ensemble = "GOOE";
  int M = 200;
  int N = 40;
  double T = 1.0;                      // single-T commands
  std::vector<double> T_values;        // transition / spacing sweeps
  MuValue mu{0.0, MuUnit::Raw};        // sample / density
  MuValue mu_min{0.05, MuUnit::Mu0};   // transition grid
  MuValue mu_max{5.0, MuUnit::Mu0};
  int mu_points = 25;
  bool include_mu_zero = true;
  int n_samples = 200;
  std::uint64_t master_seed = 1;
  std::string output_dir;
  int workers = 0;                     // 0 = all hardware threads
  // spacing
  std::string spacing_mode = "superposed";
  int bins = 40;
  double s_max = 4.0;
  // density
  double re_min = -3.0, re_max = 3.0, im_min = -0.5, im_max = 0.5;
  int nx = 121, ny = 81;
  double lambda = 1e-3;
  // mscaling / ginibre
  std::vector<int> M_values;
  double alpha = 0.2;
  MuValue mu_scaling{1.0, MuUnit::ET};

  bool operator==(const RunConfig&) const = default;

  /// Resolved ensemble spec for single-(T, mu) commands.
  EnsembleSpec spec() const;
  /// Per-command schema checks; throws ConfigError with the field name.
  void validate() const;
};

/// Parse a JSON config document. Unknown keys are rejected with their path;
/// when `expect` is set, a "command" key must agree with it.
RunConfig parse_config(const std::string& json_text, std::optional<Command> expect = {});
/// Emit the JSON form; parse_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& config);

std::string sha256_hex(const std::string& data);
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

void print_scales(const RunConfig& config, std::ostream& os);

/// Execute the configured run, write result CSVs plus manifest.json into
/// output_dir. Returns the process exit code: 0 success, 2 config error,
/// 3 partial cell failure, 4 solver failure.
int run(const RunConfig& config, std::ostream& log);

}  // namespace ptlab::io
