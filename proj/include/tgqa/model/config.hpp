#pragma once

#include "tgqa/graph/builder.hpp"

namespace tgqa::model {

struct ModelConfig {
  int num_layers = 3;
  int d_model = 128;
  int heads = 4;
  double dropout = 0.2;
  int rel_pos_clip = graph::kRelPosClip;
  int indicator_dim = 16;
  /// 0 means 2 + rows + columns of the graph being decoded.
  int max_decode_len = 0;
  // Embedding capacities for index-valued features.
  int max_columns = 64;
  int max_rows = 512;
  int max_rank = 512;

  int d_ff() const { return 4 * d_model; }
  int d_head() const { return d_model / heads; }
  int feature_dim() const { return d_model - indicator_dim; }

  /// Structural invariants every model needs. Throws ConfigError.
  void validate() const;
  /// The hyperparameter domains of the published search space
  /// (layers 3..6, d_model {128,256,512}, heads {4,8,16}, dropout {0.2,0.4,0.5}).
  void validate_domain() const;

  graph::GraphOptions graph_options(bool numeric_relations = true) const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Number of embedding rows for a feature family under `config`.
int family_capacity(graph::FeatureFamily family, const ModelConfig& config);

}  // namespace tgqa::model
