#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lqs/gaussian.hpp"
#include "lqs/network.hpp"
#include "lqs/photon.hpp"
#include "lqs/system.hpp"

namespace lqs::io {

using Json = nlohmann::json;
namespace fs = std::filesystem;

inline constexpr int kSchemaVersion = 1;

// 17 significant digits, round-trips every double.
std::string fmt17(double x);

// Matrices are arrays of rows. Complex entries are [re, im]; a plain number is read as real.
Json to_json(const CMat& X);
Json to_json(const RMat& X);
Json to_json(const RVec& x);
Json to_json(const CVec& x);
CMat cmat_from_json(const Json& j, const std::string& path, Eigen::Index rows, Eigen::Index cols);
RMat rmat_from_json(const Json& j, const std::string& path, Eigen::Index rows, Eigen::Index cols);
CVec cvec_from_json(const Json& j, const std::string& path, Eigen::Index size);
RVec rvec_from_json(const Json& j, const std::string& path, Eigen::Index size);

// Missing file or unreadable -> IoError; malformed JSON -> SchemaError.
Json read_json(const fs::path& path);
// Checks schema_version and, when given, the "kind" tag.
void check_header(const Json& j, const std::string& kind);

Json params_to_json(const PhysicalParams& p);
PhysicalParams params_from_json(const Json& j);
PhysicalParams parse_system_file(const fs::path& path);

Json state_to_json(const GaussianState& s);
GaussianState state_from_json(const Json& j);
GaussianState parse_state_file(const fs::path& path);

// Pulse file: either explicit samples or {"shape": "gaussian", center, width, t0, dt, L}.
Json pulse_to_json(const PulseShape& p);
PulseShape pulse_from_json(const Json& j);
PulseShape parse_pulse_file(const fs::path& path);

struct CascadeStage {
  std::string description;
  RMat H_interaction;
  RVec h_interaction;
  std::vector<std::string> modes;
};

struct NetworkDescription {
  std::map<std::string, SLHNode> nodes;
  std::optional<SLHNode> cascade;
  std::vector<CascadeStage> stages;
  std::optional<PartitionedSystem> plant, controller;
  std::optional<DirectCoupling> coupling;
};

// Node "system" entries are paths relative to the network file's directory.
NetworkDescription network_from_json(const Json& j, const fs::path& base_dir);
NetworkDescription parse_network_file(const fs::path& path);

Json node_to_json(const SLHNode& g);
Json quadrature_to_json(const QuadratureSystem& qs);
Json realizability_to_json(const RealizabilityReport& r);
Json closed_loop_to_json(const ClosedLoopSystem& cl);

// Writes to a sibling temporary file and renames it into place.
void write_text_atomic(const fs::path& path, const std::string& content);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::string to_string() const;
};
void write_csv(const fs::path& path, const CsvTable& table);

// Tracks files written by one command so they can be removed if a later step fails.
class OutputSet {
 public:
  void write(const fs::path& path, const std::string& content);
  void rollback() noexcept;
  const std::vector<fs::path>& written() const { return written_; }

 private:
  std::vector<fs::path> written_;
};

}  // namespace lqs::io
