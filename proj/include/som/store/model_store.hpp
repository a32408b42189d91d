#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "som/agents/som_agent.hpp"

namespace som::store {

inline constexpr std::string_view kMagic = "SOMMODEL";
inline constexpr int kFormatVersion = 1;
inline constexpr std::string_view kExtension = ".somm";

struct Provenance {
  std::string builder;  // agent id that built the model
  std::string backend;  // backend name used while building
  std::string game;
  std::string created;  // UTC, ISO 8601
  bool operator==(const Provenance&) const = default;
};

struct ModelArchive {
  agents::OpponentModel model;
  Provenance provenance;
  bool operator==(const ModelArchive&) const = default;
};

struct SaveOptions {
  bool include_graph = true;
  bool include_pools = true;
};

/// Raised on load; `invariant` names what the payload violated
/// ("version", "format", "acyclic", "pool-ids", ...).
class ArchiveError : public std::runtime_error {
 public:
  ArchiveError(std::string invariant, const std::string& detail)
      : std::runtime_error(invariant + ": " + detail), invariant_(std::move(invariant)) {}
  const std::string& invariant() const { return invariant_; }

 private:
  std::string invariant_;
};

/// Canonical bytes: a magic line, then sorted-key JSON with explicit order
/// indices. Equal archives give equal bytes.
std::string save_model(const ModelArchive& archive, const SaveOptions& options = {});

/// Inverse of save_model. An excluded graph loads as the initial graph of
/// the game; excluded pools load empty.
ModelArchive load_model(std::string_view bytes);

void write_archive(const std::filesystem::path& path, const ModelArchive& archive, const SaveOptions& options = {});
ModelArchive read_archive(const std::filesystem::path& path);

/// SOURCE_DATE_EPOCH when set, else the current time; ISO 8601 UTC.
std::string creation_timestamp();

}  // namespace som::store
