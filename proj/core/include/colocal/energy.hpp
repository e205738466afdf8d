#pragma once

// Binary labeling energy over a superpixel graph and its exact minimization
// by s-t min-cut.  The energy is E(y) = sum_m u_m(y_m) + sum_(m,n) w_mn
// [y_m != y_n] with nonnegative disagreement weights, which is submodular
// and therefore solved globally by max-flow.

#include <vector>

#include "colocal/heatmap.hpp"
#include "colocal/superpixels.hpp"
#include "colocal/types.hpp"

namespace colocal {

struct UnaryCost {
  double cost0 = 0.0;  // charged when y_m = 0 (background)
  double cost1 = 0.0;  // charged when y_m = 1 (foreground)
};

struct WeightedEdge {
  int a = 0;
  int b = 0;
  double weight = 0.0;  // charged when labels disagree
};

struct EnergyModel {
  std::vector<UnaryCost> unary;
  std::vector<WeightedEdge> pairwise;
};

struct LabelAssignment {
  std::vector<int> labels;  // per node, 0 or 1
  double energy = 0.0;
};

// Foreground evidence per node: H(m) = mean normalized heat over the node's
// member pixels, clamped into [clamp_delta, 1 - clamp_delta] so the logs
// stay finite.  cost1 = -log H(m), cost0 = -log(1 - H(m)).
std::vector<UnaryCost> unary_potentials(const std::vector<Superpixel>& nodes,
                                        const HeatMap& heat, double clamp_delta);

// Disagreement weight per graph edge: exp(-beta * ||C(m) - C(n)||^2) with C
// the nodes' L1-normalized color histograms.
std::vector<WeightedEdge> pairwise_weights(const std::vector<Superpixel>& nodes,
                                           const SuperpixelGraph& graph,
                                           double beta);

// Direct evaluation of E(labels) on the model.
double energy_of(const EnergyModel& model, const std::vector<int>& labels);

// Global minimizer via max-flow on the standard construction (source->node
// capacity cost0, node->sink capacity cost1, symmetric edge capacities).
// Rejects negative pairwise weights.  The reported energy is recomputed
// from the returned labels.
LabelAssignment min_cut_segment(const EnergyModel& model);

}  // namespace colocal
