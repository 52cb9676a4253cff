#pragma once

#include <map>
#include <optional>

#include "etd/denoise_log.hpp"
#include "etd/resources.hpp"

namespace etd {

/// Macro-averaged precision / recall / F1 for one scope. precision_count and
/// recall_count are the examples that entered each mean (non-empty scoped
/// prediction / non-empty scoped gold respectively).
struct PrfScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t precision_count = 0;
  std::size_t recall_count = 0;
};

struct MetricReport {
  PrfScores total, general, fine, ultra;

  std::string to_json() const;
  /// Aligned table: Total / General / Fine / Ultra-Fine columns, P R F1 each.
  std::string to_table(const std::string& label) const;
};

/// id -> sorted unique type ids. Prediction and gold maps must have the same
/// key set (ContractError otherwise).
using TypeSetMap = std::map<std::string, std::vector<TypeId>>;

/// Macro P = mean over examples with a non-empty (scoped) prediction of
/// |p. g| / |p|; macro R = mean over examples with non-empty (scoped) gold of
/// |p . g| / |g|; F1 harmonic (0 when P + R = 0). `scope` restricts both sets
/// to one tier.
PrfScores macro_prf(const TypeSetMap& predictions, const TypeSetMap& golds,
                    const TypeVocabulary& vocab,
                    std::optional<Tier> scope = std::nullopt);

MetricReport full_metric_report(const TypeSetMap& predictions,
                                const TypeSetMap& golds,
                                const TypeVocabulary& vocab);

/// Strict-accuracy / macro-F1 / micro-F1 over string-labelled sets (used for
/// the projected OntoNotes data). Macro means count empty predictions as
/// precision 0 over all N examples; micro sums intersections corpus-wide.
struct OntoScores {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
};

using StringSetMap = std::map<std::string, std::vector<std::string>>;

OntoScores onto_metrics(const StringSetMap& predictions, const StringSetMap& golds);

/// Projection of ultra-fine types onto the OntoNotes hierarchy. Each
/// example's types map to the union of their target paths, closed under
/// prefixes; examples with an empty projection are dropped and counted.
struct ProjectionResult {
  Dataset projected;  // bound to a path vocabulary (tier = path depth)
  std::size_t usable = 0;
  std::size_t dropped = 0;

  /// "<usable> usable examples out of <total>"
  std::string accounting_line() const;
};

ProjectionResult project_ontonotes(const Dataset& dataset, const OntoMapping& mapping);

/// Per-tier added / deleted averages over relabeled examples plus the filter
/// discard ratio (the Table-5 shape).
struct TierDelta {
  double avg_added = 0.0;
  double avg_deleted = 0.0;
};

struct AnalysisReport {
  TierDelta general, fine, ultra;
  double discard_ratio = 0.0;
  std::size_t total = 0;
  std::size_t relabeled = 0;

  std::string to_json() const;
  std::string to_table(const std::string& label) const;
};

/// `log` must cover exactly the ids of `before` (ContractError otherwise).
AnalysisReport relabel_analysis(const Dataset& before, const DenoiseLog& log,
                                const TypeVocabulary& vocab);

}  // namespace etd
