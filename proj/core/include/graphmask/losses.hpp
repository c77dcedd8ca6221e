#pragma once

#include "graphmask/autodiff.hpp"
#include "graphmask/graph.hpp"
#include "graphmask/model.hpp"

namespace graphmask {

struct LossWeights {
  double lambda1 = 1.0;  // reconstruction
  double lambda2 = 1.0;  // classification
  void validate() const;
};

/// Mean over masked rows of (1 - cos(x_v, z_v))^2.
ad::Var reconstruction_loss(ad::Tape& tape, ad::Var original, ad::Var reconstructed,
                            const MaskPlan& plan);

/// For y = 1: cos(g,p0)^2 + (1 - cos(g,p1))^2, and symmetrically for y = 0.
ad::Var contrastive_loss(ad::Tape& tape, ad::Var graph_embedding, Label y, ad::Var proxy_benign,
                         ad::Var proxy_malicious);

/// lambda1 * rec + lambda2 * cl. A zero weight drops its term entirely, so the
/// result equals the other weighted term exactly.
ad::Var joint_loss(ad::Tape& tape, ad::Var rec, ad::Var cl, const LossWeights& w);
double joint_loss(double rec, double cl, const LossWeights& w);

double reconstruction_loss(const Matrix& original, const Matrix& reconstructed,
                           const MaskPlan& plan);
double contrastive_loss(const Matrix& graph_embedding, Label y, const Matrix& proxy_benign,
                        const Matrix& proxy_malicious);

}  // namespace graphmask
