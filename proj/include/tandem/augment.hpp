#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tandem/corpus.hpp"
#include "tandem/encoder.hpp"
#include "tandem/rng.hpp"

namespace tandem {

struct AugmentationSpec {
  double replacement_prob = 0.15;  // rho
  int copies_per_instance = 6;     // k
  uint64_t seed = 1;
};

// A tokenized instance flowing through the pipeline. Augmented copies record
// the id of the instance they were derived from.
struct EncodedInstance {
  std::string id;
  std::string source_id;  // empty for original instances
  int copy_index = -1;
  TokenSequence tokens;
  std::optional<SoftLabel> label;
};

// Replaces each non-special token by [MASK] independently with probability
// rho. Length and special-token layout are unchanged.
TokenSequence mask_augment_instance(const TokenSequence& tokens, double rho,
                                    Rng& rng);

// A_U: k masked copies per unlabeled instance, no labels attached. The rng
// stream of each copy is keyed by (seed, instance id, copy index), so results
// do not depend on processing order.
std::vector<EncodedInstance> build_augmented_unlabeled(
    const std::vector<EncodedInstance>& unlabeled, const AugmentationSpec& spec);

// B_L: k masked copies per labeled instance, each carrying its source's soft
// label unchanged.
std::vector<EncodedInstance> build_augmented_labeled(
    const std::vector<EncodedInstance>& labeled, const AugmentationSpec& spec);

}  // namespace tandem
