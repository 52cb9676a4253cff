#include "etd/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace etd {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

namespace {

template <typename T>
std::size_t intersection_size(const std::vector<T>& a, const std::vector<T>& b) {
  std::size_t count = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

double harmonic_f1(double p, double r) {
  return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

template <typename K, typename V>
void check_keys_align(const std::map<K, V>& predictions, const std::map<K, V>& golds) {
  if (predictions.size() != golds.size()) {
    throw ContractError("metric inputs have different key counts");
  }
  auto ip = predictions.begin();
  auto ig = golds.begin();
  for (; ip != predictions.end(); ++ip, ++ig) {
    if (ip->first != ig->first) {
      throw ContractError("metric inputs disagree on example ids (" + ip->first +
                          " vs " + ig->first + ")");
    }
  }
}

std::vector<TypeId> restrict_to_tier(const std::vector<TypeId>& types,
                                     const TypeVocabulary& vocab, Tier tier) {
  std::vector<TypeId> out;
  for (TypeId id : types) {
    if (vocab.tier(id) == tier) out.push_back(id);
  }
  return out;
}

}  // namespace

PrfScores macro_prf(const TypeSetMap& predictions, const TypeSetMap& golds,
                    const TypeVocabulary& vocab, std::optional<Tier> scope) {
  check_keys_align(predictions, golds);
  PrfScores scores;
  double precision_sum = 0.0;
  double recall_sum = 0.0;
  auto ip = predictions.begin();
  auto ig = golds.begin();
  for (; ip != predictions.end(); ++ip, ++ig) {
    std::vector<TypeId> p = ip->second;
    std::vector<TypeId> g = ig->second;
    if (scope) {
      p = restrict_to_tier(p, vocab, *scope);
      g = restrict_to_tier(g, vocab, *scope);
    }
    const auto common = static_cast<double>(intersection_size(p, g));
    if (!p.empty()) {
      precision_sum += common / static_cast<double>(p.size());
      ++scores.precision_count;
    }
    if (!g.empty()) {
      recall_sum += common / static_cast<double>(g.size());
      ++scores.recall_count;
    }
  }
  if (scores.precision_count > 0) {
    scores.precision = precision_sum / static_cast<double>(scores.precision_count);
  }
  if (scores.recall_count > 0) {
    scores.recall = recall_sum / static_cast<double>(scores.recall_count);
  }
  scores.f1 = harmonic_f1(scores.precision, scores.recall);
  return scores;
}

MetricReport full_metric_report(const TypeSetMap& predictions,
                                const TypeSetMap& golds,
                                const TypeVocabulary& vocab) {
  MetricReport report;
  report.total = macro_prf(predictions, golds, vocab);
  report.general = macro_prf(predictions, golds, vocab, Tier::kGeneral);
  report.fine = macro_prf(predictions, golds, vocab, Tier::kFine);
  report.ultra = macro_prf(predictions, golds, vocab, Tier::kUltra);
  return report;
}

namespace {

ordered_json prf_json(const PrfScores& scores) {
  ordered_json obj;
  obj["precision"] = scores.precision;
  obj["recall"] = scores.recall;
  obj["f1"] = scores.f1;
  obj["precision_count"] = scores.precision_count;
  obj["recall_count"] = scores.recall_count;
  return obj;
}

}  // namespace

std::string MetricReport::to_json() const {
  ordered_json obj;
  obj["total"] = prf_json(total);
  obj["general"] = prf_json(general);
  obj["fine"] = prf_json(fine);
  obj["ultra"] = prf_json(ultra);
  return obj.dump(2) + "\n";
}

std::string MetricReport::to_table(const std::string& label) const {
  std::ostringstream out;
  auto row_cell = [](std::ostringstream& os, const PrfScores& s) {
    os << std::setw(6) << std::fixed << std::setprecision(1) << 100.0 * s.precision
       << std::setw(6) << 100.0 * s.recall << std::setw(6) << 100.0 * s.f1;
  };
  out << std::setw(24) << std::left << "" << std::right;
  for (const char* scope : {"Total", "General", "Fine", "Ultra-Fine"}) {
    out << std::setw(18) << scope;
  }
  out << "\n" << std::setw(24) << std::left << "Model" << std::right;
  for (int i = 0; i < 4; ++i) out << std::setw(6) << "P" << std::setw(6) << "R" << std::setw(6) << "F1";
  out << "\n" << std::setw(24) << std::left << label << std::right;
  row_cell(out, total);
  row_cell(out, general);
  row_cell(out, fine);
  row_cell(out, ultra);
  out << "\n";
  return out.str();
}

OntoScores onto_metrics(const StringSetMap& predictions, const StringSetMap& golds) {
  check_keys_align(predictions, golds);
  OntoScores scores;
  if (predictions.empty()) return scores;

  const auto n = static_cast<double>(predictions.size());
  std::size_t exact = 0;
  double precision_sum = 0.0;
  double recall_sum = 0.0;
  double micro_common = 0.0;
  double micro_pred = 0.0;
  double micro_gold = 0.0;

  auto ip = predictions.begin();
  auto ig = golds.begin();
  for (; ip != predictions.end(); ++ip, ++ig) {
    const auto& p = ip->second;
    const auto& g = ig->second;
    const auto common = static_cast<double>(intersection_size(p, g));
    if (p == g) ++exact;
    if (!p.empty()) precision_sum += common / static_cast<double>(p.size());
    if (!g.empty()) recall_sum += common / static_cast<double>(g.size());
    micro_common += common;
    micro_pred += static_cast<double>(p.size());
    micro_gold += static_cast<double>(g.size());
  }
  scores.accuracy = static_cast<double>(exact) / n;
  const double macro_p = precision_sum / n;
  const double macro_r = recall_sum / n;
  scores.macro_f1 = harmonic_f1(macro_p, macro_r);
  const double micro_p = micro_pred > 0.0 ? micro_common / micro_pred : 0.0;
  const double micro_r = micro_gold > 0.0 ? micro_common / micro_gold : 0.0;
  scores.micro_f1 = harmonic_f1(micro_p, micro_r);
  return scores;
}

// ---------------------------------------------------------------------------
// OntoNotes projection
// ---------------------------------------------------------------------------

std::string ProjectionResult::accounting_line() const {
  return std::to_string(usable) + " usable examples out of " +
         std::to_string(usable + dropped);
}

ProjectionResult project_ontonotes(const Dataset& dataset, const OntoMapping& mapping) {
  // Path vocabulary: tier by depth (1 general, 2 fine, deeper ultra).
  std::vector<std::pair<std::string, Tier>> entries;
  for (const auto& path : mapping.onto_vocabulary()) {
    const auto depth = static_cast<std::size_t>(
        std::count(path.begin(), path.end(), '/'));
    Tier tier = depth <= 1 ? Tier::kGeneral : (depth == 2 ? Tier::kFine : Tier::kUltra);
    entries.emplace_back(path, tier);
  }
  auto onto_vocab = std::make_shared<TypeVocabulary>(std::move(entries));

  ProjectionResult result;
  result.projected.vocabulary = onto_vocab;
  result.projected.provenance = dataset.provenance + "+onto";
  for (const auto& example : dataset.examples) {
    std::set<std::string> paths;
    for (TypeId id : example.types) {
      const auto& mapped = mapping.paths(id);
      paths.insert(mapped.begin(), mapped.end());
    }
    if (paths.empty()) {
      ++result.dropped;
      continue;
    }
    Example projected = example;
    projected.types.clear();
    for (const auto& path : paths) projected.types.push_back(onto_vocab->id(path));
    std::sort(projected.types.begin(), projected.types.end());
    result.projected.examples.push_back(std::move(projected));
    ++result.usable;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Relabeling analysis (Table-5 shape)
// ---------------------------------------------------------------------------

AnalysisReport relabel_analysis(const Dataset& before, const DenoiseLog& log,
                                const TypeVocabulary& vocab) {
  std::map<std::string, const DenoiseRecord*> by_id;
  for (const auto& record : log.records) {
    if (!by_id.emplace(record.id, &record).second) {
      throw ContractError("denoise log repeats id: " + record.id);
    }
  }
  AnalysisReport report;
  report.total = before.examples.size();
  std::size_t filter_discards = 0;
  double added[3] = {0, 0, 0};
  double deleted[3] = {0, 0, 0};

  for (const auto& example : before.examples) {
    auto it = by_id.find(example.id);
    if (it == by_id.end()) {
      throw ContractError("denoise log does not cover example " + example.id);
    }
    const DenoiseRecord& record = *it->second;
    if (!record.kept) {
      ++filter_discards;
      continue;
    }
    if (!record.new_types.has_value()) continue;  // relabel discarded
    ++report.relabeled;
    const auto& old_types = record.old_types;
    const auto& new_types = *record.new_types;
    for (TypeId id : new_types) {
      if (!std::binary_search(old_types.begin(), old_types.end(), id)) {
        ++added[static_cast<std::size_t>(vocab.tier(id))];
      }
    }
    for (TypeId id : old_types) {
      if (!std::binary_search(new_types.begin(), new_types.end(), id)) {
        ++deleted[static_cast<std::size_t>(vocab.tier(id))];
      }
    }
  }

  if (report.total > 0) {
    report.discard_ratio =
        static_cast<double>(filter_discards) / static_cast<double>(report.total);
  }
  if (report.relabeled > 0) {
    const auto denom = static_cast<double>(report.relabeled);
    report.general = {added[0] / denom, deleted[0] / denom};
    report.fine = {added[1] / denom, deleted[1] / denom};
    report.ultra = {added[2] / denom, deleted[2] / denom};
  }
  return report;
}

std::string AnalysisReport::to_json() const {
  ordered_json obj;
  for (const auto& [name, delta] :
       std::initializer_list<std::pair<const char*, const TierDelta*>>{
           {"general", &general}, {"fine", &fine}, {"ultra", &ultra}}) {
    ordered_json tier;
    tier["avg_added"] = delta->avg_added;
    tier["avg_deleted"] = delta->avg_deleted;
    obj[name] = tier;
  }
  obj["discard_ratio"] = discard_ratio;
  obj["total"] = total;
  obj["relabeled"] = relabeled;
  return obj.dump(2) + "\n";
}

std::string AnalysisReport::to_table(const std::string& label) const {
  std::ostringstream out;
  out << std::setw(12) << std::left << "" << std::right;
  for (const char* t : {"General", "Fine", "Ultra-Fine"}) out << std::setw(14) << t;
  out << "\n" << std::setw(12) << std::left << "Data" << std::right;
  for (int i = 0; i < 3; ++i) out << std::setw(7) << "Add" << std::setw(7) << "Del";
  out << std::setw(12) << "Filter (%)";
  out << "\n" << std::setw(12) << std::left << label << std::right << std::fixed
      << std::setprecision(2);
  for (const TierDelta* d : {&general, &fine, &ultra}) {
    out << std::setw(7) << d->avg_added << std::setw(7) << d->avg_deleted;
  }
  out << std::setw(12) << std::setprecision(1) << 100.0 * discard_ratio << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// DenoiseLog io (lives here to keep denoiser.cpp focused on models)
// ---------------------------------------------------------------------------

std::size_t DenoiseLog::filter_discards() const {
  std::size_t count = 0;
  for (const auto& r : records) count += r.kept ? 0 : 1;
  return count;
}

std::size_t DenoiseLog::relabel_discards() const {
  std::size_t count = 0;
  for (const auto& r : records) count += (r.kept && !r.new_types.has_value()) ? 1 : 0;
  return count;
}

std::size_t DenoiseLog::survivors() const {
  std::size_t count = 0;
  for (const auto& r : records) count += (r.kept && r.new_types.has_value()) ? 1 : 0;
  return count;
}

void write_denoise_log(const DenoiseLog& log, const TypeVocabulary& vocab,
                       const std::string& path) {
  std::string out;
  for (const auto& record : log.records) {
    ordered_json obj;
    obj["id"] = record.id;
    obj["p_error"] = record.p_error;
    obj["kept"] = record.kept;
    obj["old_types"] = to_type_names(record.old_types, vocab);
    if (record.new_types.has_value()) {
      obj["new_types"] = to_type_names(*record.new_types, vocab);
    } else {
      obj["new_types"] = nullptr;
    }
    out += obj.dump();
    out += '\n';
  }
  write_file(path, out);
}

DenoiseLog load_denoise_log(const std::string& path, const TypeVocabulary& vocab) {
  DenoiseLog log;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json obj = json::parse(line);
      DenoiseRecord record;
      record.id = obj.at("id").get<std::string>();
      record.p_error = obj.at("p_error").get<double>();
      record.kept = obj.at("kept").get<bool>();
      record.old_types =
          to_type_ids(obj.at("old_types").get<std::vector<std::string>>(), vocab);
      if (!obj.at("new_types").is_null()) {
        record.new_types =
            to_type_ids(obj.at("new_types").get<std::vector<std::string>>(), vocab);
      }
      log.records.push_back(std::move(record));
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception& err) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": parse error: " + err.what());
    }
  }
  return log;
}

}  // namespace etd
