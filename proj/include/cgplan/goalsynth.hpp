#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>

#include "cgplan/cgraph.hpp"
#include "cgplan/rng.hpp"

namespace cgplan::synth {

// Accepts or rejects a candidate (child -> parent/surface) reattachment; used
// to encode task-specific structure rules (e.g. size ordering in stacking).
using StructureFilter = std::function<bool(const ContactGraphPlus&, const std::string& child,
                                           const std::string& parent, int surface)>;

struct GAConfig {
    int population_size = 64;
    int max_generations = 200;
    double crossover_prob = 0.7;
    double mutation_prob = 0.2;
    double theta = 0.8;  // area-occupation threshold
    int elite_count = 2;
    std::uint64_t rng_seed = 0;
    bool parallel = true;
    int certify_per_generation = 8;  // pose-synthesis certifications per generation
    StructureFilter structure_filter;
    void validate() const;
};

struct PoseOptConfig {
    double step = 0.01;    // update step
    double noise0 = 0.5;   // initial noise scale
    double decay = 0.95;   // per-iteration noise decay, in (0,1)
    double d_safe = 0.005; // safety margin (m)
    int max_iters = 2000;  // per layer, per restart
    int restarts = 10;
    std::uint64_t rng_seed = 0;
    void validate() const;
};

struct StructureGene {
    std::string parent;
    int surface = 0;
};

// Parent/surface assignment for every movable node; forms a rooted tree.
struct StructureIndividual {
    std::map<std::string, StructureGene> genes;
    double fitness = 0.0;    // crowding penalty, lower is better
    double crowding = 0.0;   // selection tie-break: per-surface aggregate occupancy
    bool feasible = false;   // certified by pose synthesis
    std::string key() const;
};

// Eq.-level pieces -----------------------------------------------------------

// Hinge penalty on a pairwise signed distance: 0 at sd >= d_safe, 1 at contact,
// >= 1 under penetration.
double hinge_loss(double sd, double d_safe);

// Area-occupation penalty over all supporting relations, using true overlap
// hulls (requires a posed graph).
double fitness(const ContactGraphPlus& cg, double theta);
// Same penalty with the pre-pose estimate (child base-footprint area clipped
// to the parent surface area).
double fitness_estimate(const ContactGraphPlus& cg, double theta);

// GA operators ---------------------------------------------------------------

// Valid reattachment targets for `child` within its rough-goal scope.
struct AttachTarget {
    std::string parent;
    int surface = 0;
};
std::vector<AttachTarget> valid_targets(const ContactGraphPlus& current,
                                        const ContactGraphPlus& rough, const std::string& child,
                                        const StructureFilter& filter);

// Detach one movable subtree and reattach it under a uniformly random valid
// parent/surface. No valid target -> returns the input unchanged.
StructureIndividual crossover(const StructureIndividual& ind, const ContactGraphPlus& rough,
                              const GAConfig& cfg, Rng& rng);

// Re-pick the surface used by one random node's incoming relation among its
// parent's usable surfaces. No node with an alternative -> unchanged.
StructureIndividual mutate(const StructureIndividual& ind, const ContactGraphPlus& rough,
                           const GAConfig& cfg, Rng& rng);

// Materialize an individual over the rough goal (relations whose gene matches
// the rough relation keep its pose hint; others become unposed).
ContactGraphPlus apply_structure(const ContactGraphPlus& rough, const StructureIndividual& ind);

StructureIndividual individual_from(const ContactGraphPlus& rough);

// Pose synthesis ---------------------------------------------------------------

// Jointly optimizes the poses of `parent`'s movable children (stochastic
// repulsion updates with decaying noise); writes accepted poses into cg.
// Throws layer_infeasible when every restart exhausts its iterations.
void optimize_layer(ContactGraphPlus& cg, const std::string& parent, const PoseOptConfig& cfg,
                    std::uint64_t seed);

// Breadth-first layer sweep over the parse tree; returns the posed tree and
// guarantees full validation on success.
ContactGraphPlus synthesize_poses(const ContactGraphPlus& structured, const PoseOptConfig& cfg);

// Full goal discovery ----------------------------------------------------------

struct SynthesisResult {
    ContactGraphPlus goal;        // posed, fully valid
    ContactGraphPlus structured;  // winning structure before pose synthesis
    StructureIndividual best;
    std::uint64_t pose_seed = 0;  // seed used for the winning pose synthesis
    int generations = 0;
    int certifications = 0;
};

// Genetic structure search, certifying the best candidates each generation by
// pose synthesis. Throws goal_infeasible when no candidate certifies.
SynthesisResult evolve(const ContactGraphPlus& rough_goal, const GAConfig& ga,
                       const PoseOptConfig& pose);

inline SynthesisResult synthesize_goal(const ContactGraphPlus& rough_goal, const GAConfig& ga,
                                       const PoseOptConfig& pose) {
    return evolve(rough_goal, ga, pose);
}

}  // namespace cgplan::synth
