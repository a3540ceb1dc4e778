#pragma once

#include <vector>

#include "tgqa/autodiff/ops.hpp"
#include "tgqa/core/table.hpp"
#include "tgqa/graph/annotated_graph.hpp"
#include "tgqa/model/parameters.hpp"

namespace tgqa::model {

/// Per node: mean of its feature embeddings, concatenated with the question
/// indicator embedding (row 1 for QUESTION, TOKEN and QNUMBER nodes).
template <typename T>
ad::Var<T> embed_nodes(ParamBinder<T>& p, const graph::AnnotatedGraph& g);

/// Optional probes into the first encoder layer.
template <typename T>
struct EncoderTrace {
  std::vector<ad::Var<T>> first_layer_scores;  // per head, [n, n] before scaling
};

/// Relation-aware encoder over `x` (normally embed_nodes output). Dropout is
/// active when the graph is in train mode.
template <typename T>
ad::Var<T> encode(ParamBinder<T>& p, const graph::AnnotatedGraph& g, ad::Var<T> x,
                  EncoderTrace<T>* trace = nullptr);

template <typename T>
ad::Var<T> encode(ParamBinder<T>& p, const graph::AnnotatedGraph& g);

/// Decoder target symbols as candidate indexes: columns ascending, SEP,
/// rows ascending, EOS. Candidate k < P is pointable()[k]; P is SEP and
/// P + 1 is EOS.
std::vector<int> target_symbols(const graph::AnnotatedGraph& g, const AnswerSelection& target);

/// Mean over steps of the masked cross-entropy, with teacher forcing.
template <typename T>
ad::Var<T> decode_training_loss(ParamBinder<T>& p, ad::Var<T> encoded,
                                const graph::AnnotatedGraph& g, const AnswerSelection& target);

/// Greedy pointer decoding; always returns a selection with at least one
/// column and one row and no duplicates.
template <typename T>
AnswerSelection decode_greedy(ParamBinder<T>& p, ad::Var<T> encoded, const graph::AnnotatedGraph& g);

/// Embed, encode and decode in eval mode.
template <typename T>
AnswerSelection predict(const ModelParameters<T>& params, const graph::AnnotatedGraph& g);

/// Training loss of one example on `graph` (which sets the mode and seed).
template <typename T>
ad::Var<T> example_loss(ParamBinder<T>& p, const graph::AnnotatedGraph& g, const AnswerSelection& target);

}  // namespace tgqa::model
