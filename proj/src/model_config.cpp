#include "tgqa/model/config.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tgqa/error.hpp"
#include "tgqa/text/vocabulary.hpp"

namespace tgqa::model {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

void ModelConfig::validate() const {
  require(num_layers >= 1, "num_layers must be at least 1");
  require(d_model >= 2, "d_model must be at least 2");
  require(heads >= 1 && d_model % heads == 0,
          "d_model " + std::to_string(d_model) + " is not divisible by heads " + std::to_string(heads));
  require(indicator_dim >= 1 && indicator_dim < d_model, "indicator_dim must be in [1, d_model)");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must be in [0, 1)");
  require(rel_pos_clip == graph::kRelPosClip,
          "rel_pos_clip is fixed at " + std::to_string(graph::kRelPosClip));
  require(max_decode_len >= 0, "max_decode_len must be non-negative");
  require(max_columns >= 1 && max_rows >= 1 && max_rank >= 2, "feature capacities must be positive");
}

void ModelConfig::validate_domain() const {
  require(num_layers >= 3 && num_layers <= 6,
          "num_layers must be in [3, 6], got " + std::to_string(num_layers));
  require(d_model == 128 || d_model == 256 || d_model == 512,
          "d_model must be one of {128, 256, 512}, got " + std::to_string(d_model));
  require(heads == 4 || heads == 8 || heads == 16,
          "heads must be one of {4, 8, 16}, got " + std::to_string(heads));
  constexpr double kDropouts[] = {0.2, 0.4, 0.5};
  const bool dropout_ok = std::any_of(std::begin(kDropouts), std::end(kDropouts),
                                      [&](double v) { return std::abs(v - dropout) < 1e-12; });
  require(dropout_ok, "dropout must be one of {0.2, 0.4, 0.5}, got " + std::to_string(dropout));
  validate();
}

graph::GraphOptions ModelConfig::graph_options(bool numeric_relations) const {
  graph::GraphOptions o;
  o.numeric_relations = numeric_relations;
  o.max_columns = max_columns;
  o.max_rows = max_rows;
  o.max_rank = max_rank;
  return o;
}

int family_capacity(graph::FeatureFamily family, const ModelConfig& config) {
  using graph::FeatureFamily;
  switch (family) {
    case FeatureFamily::Kind: return graph::kNumNodeKinds;
    case FeatureFamily::Word: return text::kVocabularySize;
    case FeatureFamily::ColumnIndex: return config.max_columns;
    case FeatureFamily::RowIndex: return config.max_rows;
    case FeatureFamily::AlignmentBin: return graph::kNumAlignmentBins + 1;
    case FeatureFamily::Rank: return config.max_rank;
    case FeatureFamily::InverseRank: return config.max_rank;
    case FeatureFamily::AnswerFlag: return graph::kNumAnswerFlags;
  }
  return 0;
}

}  // namespace tgqa::model
