#include "graphmask/losses.hpp"

#include "graphmask/error.hpp"

namespace graphmask {

void LossWeights::validate() const {
  if (lambda1 < 0.0 || lambda2 < 0.0) throw InvalidInput("loss weights must be non-negative");
  if (lambda1 == 0.0 && lambda2 == 0.0) throw InvalidInput("loss weights cannot both be zero");
}

ad::Var reconstruction_loss(ad::Tape& tape, ad::Var original, ad::Var reconstructed,
                            const MaskPlan& plan) {
  if (plan.empty()) throw InvalidInput("reconstruction loss needs at least one masked node");
  ad::Var x = tape.gather_rows(original, plan.masked);
  ad::Var z = tape.gather_rows(reconstructed, plan.masked);
  ad::Var gap = tape.scale(tape.add_scalar(tape.cosine_rows(x, z), -1.0), -1.0);
  return tape.mean(tape.square(gap));
}

ad::Var contrastive_loss(ad::Tape& tape, ad::Var g, Label y, ad::Var p0, ad::Var p1) {
  ad::Var own = y == Label::kMalicious ? p1 : p0;
  ad::Var other = y == Label::kMalicious ? p0 : p1;
  ad::Var push = tape.square(tape.cosine_rows(g, other));
  ad::Var pull = tape.square(tape.add_scalar(tape.scale(tape.cosine_rows(g, own), -1.0), 1.0));
  return tape.add(push, pull);
}

ad::Var joint_loss(ad::Tape& tape, ad::Var rec, ad::Var cl, const LossWeights& w) {
  w.validate();
  if (w.lambda1 == 0.0) return tape.scale(cl, w.lambda2);
  if (w.lambda2 == 0.0) return tape.scale(rec, w.lambda1);
  return tape.add(tape.scale(rec, w.lambda1), tape.scale(cl, w.lambda2));
}

double joint_loss(double rec, double cl, const LossWeights& w) {
  w.validate();
  if (w.lambda1 == 0.0) return w.lambda2 * cl;
  if (w.lambda2 == 0.0) return w.lambda1 * rec;
  return w.lambda1 * rec + w.lambda2 * cl;
}

double reconstruction_loss(const Matrix& original, const Matrix& reconstructed,
                           const MaskPlan& plan) {
  ad::Tape tape;
  return tape.scalar(
      reconstruction_loss(tape, tape.constant(original), tape.constant(reconstructed), plan));
}

double contrastive_loss(const Matrix& g, Label y, const Matrix& p0, const Matrix& p1) {
  ad::Tape tape;
  return tape.scalar(
      contrastive_loss(tape, tape.constant(g), y, tape.constant(p0), tape.constant(p1)));
}

}  // namespace graphmask
