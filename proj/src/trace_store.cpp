#include "adasel/trace_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "adasel/csv.hpp"
#include "adasel/errors.hpp"

namespace adasel {

namespace {

constexpr std::string_view kTraceHeader =
    "input_id,model_id,goal_met,score,latency_ms,energy_mj";
constexpr std::string_view kModelsHeader = "model_id,display_name,memory_mb";

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t") == std::string::npos;
}

std::string pair_key(const std::string& input, const std::string& model) {
  std::string key = input;
  key.push_back('\0');
  key += model;
  return key;
}

std::string record_location(std::size_t i, const TraceRecord& r) {
  return "record " + std::to_string(i) + " (input=" + r.input_id + ", model=" + r.model_id +
         ")";
}

std::vector<TraceRecord> read_trace(const std::string& path, TraceMode& mode) {
  auto lines = csv::read_lines(path);
  if (lines.empty() || lines.front() != kTraceHeader)
    throw ParseError(path, 1, "expected header '" + std::string(kTraceHeader) + "'");

  std::vector<TraceRecord> records;
  std::optional<TraceMode> seen;
  std::size_t first_mode_line = 0;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (blank(lines[ln])) continue;
    const std::size_t line_no = ln + 1;
    auto f = csv::split(lines[ln]);
    if (f.size() != 6)
      throw ParseError(path, line_no, "expected 6 fields, found " + std::to_string(f.size()));
    TraceRecord r;
    r.input_id = std::string(f[0]);
    r.model_id = std::string(f[1]);
    if (r.input_id.empty() || r.model_id.empty())
      throw ParseError(path, line_no, "empty input_id or model_id");
    if (!f[2].empty()) {
      if (f[2] == "0")
        r.goal_met = false;
      else if (f[2] == "1")
        r.goal_met = true;
      else
        throw ParseError(path, line_no, "goal_met must be 0 or 1");
    }
    if (!f[3].empty()) {
      r.score = csv::parse_double(f[3]);
      if (!r.score) throw ParseError(path, line_no, "score is not a number");
    }
    if (r.goal_met.has_value() == r.score.has_value())
      throw ParseError(path, line_no, "exactly one of goal_met and score must be set");
    auto latency = csv::parse_double(f[4]);
    if (!latency) throw ParseError(path, line_no, "latency_ms is not a number");
    r.latency_ms = *latency;
    if (!f[5].empty()) {
      r.energy_mj = csv::parse_double(f[5]);
      if (!r.energy_mj) throw ParseError(path, line_no, "energy_mj is not a number");
    }

    const TraceMode row_mode = r.goal_met ? TraceMode::BooleanGoal : TraceMode::Scored;
    if (!seen) {
      seen = row_mode;
      first_mode_line = line_no;
    } else if (*seen != row_mode) {
      throw ModeConflictError(path + ":" + std::to_string(line_no) + ": " +
                              to_string(row_mode) + " row conflicts with " +
                              to_string(*seen) + " row at line " +
                              std::to_string(first_mode_line));
    }
    records.push_back(std::move(r));
  }
  mode = seen.value_or(TraceMode::BooleanGoal);
  return records;
}

void read_features(const std::string& path, Dataset& ds) {
  auto lines = csv::read_lines(path);
  if (lines.empty()) throw ParseError(path, 1, "missing header");
  auto header = csv::split(lines.front());
  if (header.empty() || header.front() != "input_id")
    throw ParseError(path, 1, "first column must be input_id");

  // Column -> (is_count, dense position or count index).
  std::vector<std::pair<bool, std::uint32_t>> columns;
  std::set<std::uint32_t> count_indices;
  for (std::size_t c = 1; c < header.size(); ++c) {
    auto name = header[c];
    if (name.starts_with("f_") && name.size() > 2) {
      columns.emplace_back(false, static_cast<std::uint32_t>(ds.dense_names.size()));
      ds.dense_names.emplace_back(name.substr(2));
    } else if (name.starts_with("c_")) {
      auto idx = csv::parse_uint(name.substr(2));
      if (!idx || !count_indices.insert(static_cast<std::uint32_t>(*idx)).second)
        throw ParseError(path, 1, "bad or duplicate count column '" + std::string(name) + "'");
      columns.emplace_back(true, static_cast<std::uint32_t>(*idx));
    } else {
      throw ParseError(path, 1, "column '" + std::string(name) + "' lacks f_ or c_ prefix");
    }
  }
  ds.vocab_size = static_cast<std::uint32_t>(count_indices.size());
  if (!count_indices.empty() && *count_indices.rbegin() != ds.vocab_size - 1)
    throw ParseError(path, 1, "count columns must cover indices 0..n-1");

  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (blank(lines[ln])) continue;
    const std::size_t line_no = ln + 1;
    auto f = csv::split(lines[ln]);
    if (f.size() != header.size())
      throw ParseError(path, line_no,
                       "expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(f.size()));
    FeatureRow row;
    row.input_id = std::string(f[0]);
    if (row.input_id.empty()) throw ParseError(path, line_no, "empty input_id");
    row.dense.resize(ds.dense_names.size());
    std::vector<std::pair<std::uint32_t, std::uint32_t>> counts;
    for (std::size_t c = 1; c < f.size(); ++c) {
      auto [is_count, pos] = columns[c - 1];
      if (is_count) {
        auto v = csv::parse_uint(f[c]);
        if (!v) throw ParseError(path, line_no, "count is not a nonnegative integer");
        if (*v) counts.emplace_back(pos, static_cast<std::uint32_t>(*v));
      } else {
        auto v = csv::parse_double(f[c]);
        if (!v) throw ParseError(path, line_no, "dense value is not a number");
        row.dense[pos] = *v;
      }
    }
    std::sort(counts.begin(), counts.end());
    for (auto [i, n] : counts) {
      row.counts.index.push_back(i);
      row.counts.count.push_back(n);
    }
    ds.features.push_back(std::move(row));
  }
}

std::vector<CandidateModel> read_models(const std::string& path) {
  auto lines = csv::read_lines(path);
  if (lines.empty() || lines.front() != kModelsHeader)
    throw ParseError(path, 1, "expected header '" + std::string(kModelsHeader) + "'");
  std::vector<CandidateModel> models;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (blank(lines[ln])) continue;
    auto f = csv::split(lines[ln]);
    if (f.size() != 3) throw ParseError(path, ln + 1, "expected 3 fields");
    CandidateModel m{std::string(f[0]), std::string(f[1]), std::nullopt};
    if (m.model_id.empty()) throw ParseError(path, ln + 1, "empty model_id");
    if (!f[2].empty()) {
      m.memory_mb = csv::parse_double(f[2]);
      if (!m.memory_mb || *m.memory_mb < 0)
        throw ParseError(path, ln + 1, "memory_mb must be a nonnegative number");
    }
    models.push_back(std::move(m));
  }
  return models;
}

std::string opt_double(const std::optional<double>& v) {
  return v ? csv::format_double(*v) : std::string();
}

}  // namespace

const char* to_string(TraceMode mode) {
  return mode == TraceMode::BooleanGoal ? "goal_met" : "score";
}

const char* to_string(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::DuplicateModel: return "duplicate-model";
    case Violation::Kind::DuplicateRecord: return "duplicate-record";
    case Violation::Kind::DuplicateInput: return "duplicate-input";
    case Violation::Kind::NonPositiveLatency: return "nonpositive-latency";
    case Violation::Kind::NegativeEnergy: return "negative-energy";
    case Violation::Kind::ScoreOutOfRange: return "score-out-of-range";
    case Violation::Kind::ModeMismatch: return "mode-mismatch";
    case Violation::Kind::DenseWidth: return "dense-width";
    case Violation::Kind::CountIndex: return "count-index";
    case Violation::Kind::UnknownModel: return "unknown-model";
    case Violation::Kind::UnknownInput: return "unknown-input";
    case Violation::Kind::MissingRecord: return "missing-record";
  }
  return "unknown";
}

std::uint32_t SparseCounts::at(std::uint32_t i) const {
  auto it = std::lower_bound(index.begin(), index.end(), i);
  if (it == index.end() || *it != i) return 0;
  return count[static_cast<std::size_t>(it - index.begin())];
}

bool Dataset::has_energy() const {
  return !records.empty() &&
         std::all_of(records.begin(), records.end(),
                     [](const TraceRecord& r) { return r.energy_mj.has_value(); });
}

ValidationReport validate(const Dataset& ds) {
  ValidationReport report;
  auto add = [&](Violation::Kind k, std::string loc, std::string msg) {
    report.violations.push_back({k, std::move(loc), std::move(msg)});
  };

  std::unordered_set<std::string> model_ids;
  for (const auto& m : ds.models)
    if (!model_ids.insert(m.model_id).second)
      add(Violation::Kind::DuplicateModel, "model " + m.model_id, "model_id is not unique");

  std::unordered_set<std::string> input_ids;
  for (std::size_t i = 0; i < ds.features.size(); ++i) {
    const auto& row = ds.features[i];
    const std::string loc = "feature row " + std::to_string(i) + " (input=" + row.input_id + ")";
    if (!input_ids.insert(row.input_id).second)
      add(Violation::Kind::DuplicateInput, loc, "input_id appears in more than one feature row");
    if (row.dense.size() != ds.dense_width())
      add(Violation::Kind::DenseWidth, loc,
          "dense width " + std::to_string(row.dense.size()) + " != " +
              std::to_string(ds.dense_width()));
    bool counts_ok = row.counts.index.size() == row.counts.count.size();
    for (std::size_t k = 0; counts_ok && k < row.counts.index.size(); ++k)
      counts_ok = row.counts.index[k] < ds.vocab_size &&
                  (k == 0 || row.counts.index[k - 1] < row.counts.index[k]);
    if (!counts_ok)
      add(Violation::Kind::CountIndex, loc,
          "count indices must be ascending and below vocabulary size " +
              std::to_string(ds.vocab_size));
  }

  std::unordered_set<std::string> pairs;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto& r = ds.records[i];
    const std::string loc = record_location(i, r);
    if (!model_ids.count(r.model_id))
      add(Violation::Kind::UnknownModel, loc, "model_id not among dataset models");
    if (!input_ids.count(r.input_id))
      add(Violation::Kind::UnknownInput, loc, "input_id has no feature row");
    if (!pairs.insert(pair_key(r.input_id, r.model_id)).second)
      add(Violation::Kind::DuplicateRecord, loc, "duplicate (input_id, model_id)");
    if (!(r.latency_ms > 0.0) || !std::isfinite(r.latency_ms))
      add(Violation::Kind::NonPositiveLatency, loc,
          "latency_ms must be positive, got " + csv::format_double(r.latency_ms));
    if (r.energy_mj && !(*r.energy_mj >= 0.0))
      add(Violation::Kind::NegativeEnergy, loc, "energy_mj must be nonnegative");
    if (r.score && !(*r.score >= 0.0 && *r.score <= 1.0))
      add(Violation::Kind::ScoreOutOfRange, loc, "score must lie in [0,1]");
    const bool mode_ok = ds.mode == TraceMode::BooleanGoal
                             ? (r.goal_met.has_value() && !r.score.has_value())
                             : (r.score.has_value() && !r.goal_met.has_value());
    if (!mode_ok)
      add(Violation::Kind::ModeMismatch, loc,
          std::string("record does not carry exactly the ") + to_string(ds.mode) + " column");
  }

  std::unordered_set<std::string> reported;
  for (const auto& row : ds.features) {
    if (!reported.insert(row.input_id).second) continue;
    for (const auto& m : ds.models)
      if (!pairs.count(pair_key(row.input_id, m.model_id)))
        add(Violation::Kind::MissingRecord, "input=" + row.input_id + ", model=" + m.model_id,
            "no trace record for this pair");
  }
  return report;
}

Dataset read_dataset(const std::filesystem::path& trace_path,
                     const std::filesystem::path& features_path,
                     const std::filesystem::path& models_path) {
  Dataset ds;
  ds.records = read_trace(trace_path.string(), ds.mode);
  read_features(features_path.string(), ds);
  if (!models_path.empty()) {
    ds.models = read_models(models_path.string());
  } else {
    std::set<std::string> ids;
    for (const auto& r : ds.records) ids.insert(r.model_id);
    for (const auto& id : ids) ds.models.push_back({id, id, std::nullopt});
  }
  return ds;
}

Dataset read_features_file(const std::filesystem::path& features_path) {
  Dataset ds;
  read_features(features_path.string(), ds);
  return ds;
}

Dataset load_dataset(const std::filesystem::path& trace_path,
                     const std::filesystem::path& features_path,
                     const std::filesystem::path& models_path) {
  Dataset ds = read_dataset(trace_path, features_path, models_path);
  auto report = validate(ds);
  for (const auto& v : report.violations) {
    if (v.kind != Violation::Kind::MissingRecord) continue;
    // location is "input=<id>, model=<id>"
    const auto comma = v.location.find(", model=");
    throw CompletenessError(v.location.substr(6, comma - 6), v.location.substr(comma + 8));
  }
  if (!report.ok()) {
    const auto& v = report.violations.front();
    throw InvariantError(std::string(to_string(v.kind)) + " at " + v.location + ": " +
                         v.message);
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& trace_path,
                  const std::filesystem::path& features_path,
                  const std::filesystem::path& models_path) {
  {
    std::ofstream out(trace_path);
    if (!out) throw IoError("cannot write '" + trace_path.string() + "'");
    out << kTraceHeader << '\n';
    for (const auto& r : ds.records) {
      out << r.input_id << ',' << r.model_id << ','
          << (r.goal_met ? (*r.goal_met ? "1" : "0") : "") << ',' << opt_double(r.score) << ','
          << csv::format_double(r.latency_ms) << ',' << opt_double(r.energy_mj) << '\n';
    }
  }
  {
    std::ofstream out(features_path);
    if (!out) throw IoError("cannot write '" + features_path.string() + "'");
    out << "input_id";
    for (const auto& n : ds.dense_names) out << ",f_" << n;
    for (std::uint32_t c = 0; c < ds.vocab_size; ++c) out << ",c_" << c;
    out << '\n';
    for (const auto& row : ds.features) {
      out << row.input_id;
      for (double v : row.dense) out << ',' << csv::format_double(v);
      for (std::uint32_t c = 0; c < ds.vocab_size; ++c) out << ',' << row.counts.at(c);
      out << '\n';
    }
  }
  if (!models_path.empty()) {
    std::ofstream out(models_path);
    if (!out) throw IoError("cannot write '" + models_path.string() + "'");
    out << kModelsHeader << '\n';
    for (const auto& m : ds.models)
      out << m.model_id << ',' << m.display_name << ',' << opt_double(m.memory_mb) << '\n';
  }
}

Dataset canonicalized(Dataset ds) {
  std::sort(ds.records.begin(), ds.records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.input_id, a.model_id) < std::tie(b.input_id, b.model_id);
  });
  std::sort(ds.features.begin(), ds.features.end(),
            [](const auto& a, const auto& b) { return a.input_id < b.input_id; });
  std::sort(ds.models.begin(), ds.models.end(),
            [](const auto& a, const auto& b) { return a.model_id < b.model_id; });
  return ds;
}

}  // namespace adasel
