#pragma once

// Dataset model for offline-profiled traces: which candidate models exist,
// how each one behaved on each input, and the feature vector of each input.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace adasel {

struct CandidateModel {
  std::string model_id;
  std::string display_name;
  std::optional<double> memory_mb;

  friend bool operator==(const CandidateModel&, const CandidateModel&) = default;
};

enum class TraceMode { BooleanGoal, Scored };

const char* to_string(TraceMode mode);

/// One (input, model) observation. Exactly one of goal_met / score is set,
/// matching the dataset mode.
struct TraceRecord {
  std::string input_id;
  std::string model_id;
  std::optional<bool> goal_met;
  std::optional<double> score;
  double latency_ms = 0.0;
  std::optional<double> energy_mj;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// Sparse nonnegative counts, indices strictly ascending, zero entries omitted.
struct SparseCounts {
  std::vector<std::uint32_t> index;
  std::vector<std::uint32_t> count;

  std::uint32_t at(std::uint32_t i) const;

  friend bool operator==(const SparseCounts&, const SparseCounts&) = default;
};

struct FeatureRow {
  std::string input_id;
  std::vector<double> dense;
  SparseCounts counts;

  friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

struct Dataset {
  std::vector<CandidateModel> models;
  std::vector<TraceRecord> records;
  std::vector<FeatureRow> features;
  TraceMode mode = TraceMode::BooleanGoal;
  std::vector<std::string> dense_names;  // without the f_ prefix
  std::uint32_t vocab_size = 0;          // number of c_ columns

  bool has_energy() const;
  std::size_t dense_width() const { return dense_names.size(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct Violation {
  enum class Kind {
    DuplicateModel,
    DuplicateRecord,
    DuplicateInput,
    NonPositiveLatency,
    NegativeEnergy,
    ScoreOutOfRange,
    ModeMismatch,
    DenseWidth,
    CountIndex,
    UnknownModel,
    UnknownInput,
    MissingRecord,
  };
  Kind kind;
  std::string location;
  std::string message;
};

const char* to_string(Violation::Kind kind);

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Every invariant violation in `dataset`. Violations are data, never thrown.
ValidationReport validate(const Dataset& dataset);

/// Parses the CSV files without checking dataset invariants. Syntax errors
/// throw ParseError; a file mixing goal_met and score rows throws
/// ModeConflictError. When `models_path` is empty, models are derived from the
/// trace and listed in ascending model_id order.
Dataset read_dataset(const std::filesystem::path& trace_path,
                     const std::filesystem::path& features_path,
                     const std::filesystem::path& models_path = {});

/// Feature file alone, for inputs that have no trace yet. Only features,
/// dense_names and vocab_size are filled.
Dataset read_features_file(const std::filesystem::path& features_path);

/// read_dataset followed by the completeness check (CompletenessError names
/// the first missing pair in feature-row then model order) and the remaining
/// invariants (InvariantError).
Dataset load_dataset(const std::filesystem::path& trace_path,
                     const std::filesystem::path& features_path,
                     const std::filesystem::path& models_path = {});

/// Writes the three CSV files. Floating values use shortest round-trip form,
/// so loading the result reproduces `dataset` exactly.
void save_dataset(const Dataset& dataset, const std::filesystem::path& trace_path,
                  const std::filesystem::path& features_path,
                  const std::filesystem::path& models_path = {});

/// Copy with records and feature rows in a canonical order (by id) so that
/// datasets read from permuted files compare equal.
Dataset canonicalized(Dataset dataset);

}  // namespace adasel
