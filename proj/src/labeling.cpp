#include "adasel/labeling.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include "adasel/csv.hpp"
#include "adasel/errors.hpp"
#include "adasel/kernels.hpp"

namespace adasel {

Criterion Criterion::score_at_least(double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw DomainError("score threshold must lie in [0,1]");
  return {Kind::ScoreThreshold, threshold};
}

Label Label::parse(std::string_view token) {
  if (token == kFailureToken) return failure();
  return model(std::string(token));
}

const std::string& Label::model_id() const {
  if (!id_) throw LookupError("Failure label has no model_id");
  return *id_;
}

bool meets_goal(const TraceRecord& record, const Criterion& criterion) {
  if (criterion.kind == Criterion::Kind::BooleanGoal) {
    if (!record.goal_met)
      throw CriterionModeError("boolean-goal criterion applied to a scored record");
    return *record.goal_met;
  }
  if (!record.score)
    throw CriterionModeError("score-threshold criterion applied to a goal_met record");
  return *record.score >= criterion.threshold;
}

std::optional<std::size_t> OutcomeTable::model_index(std::string_view id) const {
  auto it = std::lower_bound(model_ids.begin(), model_ids.end(), id);
  if (it == model_ids.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - model_ids.begin());
}

std::optional<std::size_t> OutcomeTable::input_index(std::string_view id) const {
  for (std::size_t i = 0; i < input_ids.size(); ++i)
    if (input_ids[i] == id) return i;
  return std::nullopt;
}

OutcomeTable build_outcomes(const Dataset& ds, const Criterion& criterion) {
  const bool want_bool = criterion.kind == Criterion::Kind::BooleanGoal;
  if (want_bool != (ds.mode == TraceMode::BooleanGoal))
    throw CriterionModeError(std::string("criterion does not match dataset mode '") +
                             to_string(ds.mode) + "'");

  OutcomeTable t;
  for (const auto& m : ds.models) t.model_ids.push_back(m.model_id);
  std::sort(t.model_ids.begin(), t.model_ids.end());
  std::unordered_map<std::string, std::size_t> input_pos;
  for (const auto& row : ds.features) {
    input_pos.emplace(row.input_id, t.input_ids.size());
    t.input_ids.push_back(row.input_id);
  }
  const std::size_t cells = t.n_inputs() * t.n_models();
  t.met.assign(cells, 0);
  t.latency_ms.assign(cells, 0.0);
  const bool energy = ds.has_energy();
  if (energy) t.energy_mj.assign(cells, 0.0);
  std::vector<std::uint8_t> filled(cells, 0);

  for (const auto& r : ds.records) {
    auto in = input_pos.find(r.input_id);
    auto mi = t.model_index(r.model_id);
    if (in == input_pos.end() || !mi)
      throw InvariantError("record (" + r.input_id + ", " + r.model_id +
                           ") refers to an unknown input or model");
    const std::size_t cell = in->second * t.n_models() + *mi;
    if (filled[cell])
      throw InvariantError("duplicate record (" + r.input_id + ", " + r.model_id + ")");
    filled[cell] = 1;
    t.met[cell] = meets_goal(r, criterion) ? 1 : 0;
    t.latency_ms[cell] = r.latency_ms;
    if (energy) t.energy_mj[cell] = *r.energy_mj;
  }
  for (std::size_t c = 0; c < cells; ++c)
    if (!filled[c])
      throw CompletenessError(t.input_ids[c / t.n_models()], t.model_ids[c % t.n_models()]);
  return t;
}

std::vector<int> optimum_indices(const OutcomeTable& table, std::span<const std::uint8_t> allowed) {
  if (!allowed.empty() && allowed.size() != table.n_models())
    throw ShapeError("optimum_indices: mask width != model count");
  kernels::OutcomeView view{table.met, table.latency_ms, table.n_inputs(), table.n_models()};
  return kernels::omp::optimum_labels(view, allowed);
}

Label optimum_model(const std::string& input_id, const Dataset& ds, const Criterion& criterion) {
  bool known = std::any_of(ds.features.begin(), ds.features.end(),
                           [&](const FeatureRow& r) { return r.input_id == input_id; });
  if (!known) throw LookupError("unknown input '" + input_id + "'");
  const TraceRecord* best = nullptr;
  for (const auto& r : ds.records) {
    if (r.input_id != input_id || !meets_goal(r, criterion)) continue;
    if (!best || r.latency_ms < best->latency_ms ||
        (r.latency_ms == best->latency_ms && r.model_id < best->model_id))
      best = &r;
  }
  return best ? Label::model(best->model_id) : Label::failure();
}

std::vector<LabeledExample> label_dataset(const Dataset& ds, const Criterion& criterion) {
  const auto table = build_outcomes(ds, criterion);
  const auto optimum = optimum_indices(table);
  std::vector<LabeledExample> out;
  out.reserve(ds.features.size());
  for (std::size_t i = 0; i < ds.features.size(); ++i)
    out.push_back({ds.features[i].input_id, ds.features[i], table.label_of(optimum[i])});
  return out;
}

std::map<std::string, double> optimal_share(std::span<const LabeledExample> labeled) {
  if (labeled.empty()) throw EmptyInputError("optimal_share: no labeled examples");
  std::map<std::string, std::size_t> counts;
  for (const auto& ex : labeled) ++counts[ex.label.str()];
  std::map<std::string, double> share;
  for (const auto& [k, n] : counts)
    share[k] = static_cast<double>(n) / static_cast<double>(labeled.size());
  return share;
}

OracleSummary oracle_metrics(const OutcomeTable& t) {
  OracleSummary s;
  if (t.n_inputs() == 0) return s;
  const auto optimum = optimum_indices(t);
  double hits = 0.0, latency = 0.0, energy = 0.0;
  for (std::size_t i = 0; i < t.n_inputs(); ++i) {
    if (optimum[i] < 0) continue;
    const auto m = static_cast<std::size_t>(optimum[i]);
    hits += 1.0;
    latency += t.latency(i, m);
    if (t.has_energy()) energy += t.energy(i, m);
  }
  const double n = static_cast<double>(t.n_inputs());
  s.accuracy = hits / n;
  s.mean_latency_ms = latency / n;
  if (t.has_energy()) s.mean_energy_mj = energy / n;
  return s;
}

OracleSummary oracle_metrics(const Dataset& ds, const Criterion& criterion) {
  return oracle_metrics(build_outcomes(ds, criterion));
}

void write_labels_csv(std::span<const LabeledExample> labeled, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "input_id,label\n";
  for (const auto& ex : labeled) out << ex.input_id << ',' << ex.label.str() << '\n';
}

std::vector<std::pair<std::string, Label>> read_labels_csv(const std::filesystem::path& path) {
  auto lines = csv::read_lines(path.string());
  if (lines.empty() || lines.front() != "input_id,label")
    throw ParseError(path.string(), 1, "expected header 'input_id,label'");
  std::vector<std::pair<std::string, Label>> out;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    auto f = csv::split(lines[ln]);
    if (f.size() != 2 || f[0].empty() || f[1].empty())
      throw ParseError(path.string(), ln + 1, "expected input_id,label");
    out.emplace_back(std::string(f[0]), Label::parse(f[1]));
  }
  return out;
}

}  // namespace adasel
