#include "tandem/augment.hpp"

#include <stdexcept>

#include "tandem/tokenizer.hpp"

namespace tandem {

TokenSequence mask_augment_instance(const TokenSequence& tokens, double rho,
                                    Rng& rng) {
  TokenSequence out = tokens;
  for (int i = 0; i < out.size(); ++i) {
    if (out.special[i]) continue;
    if (rng.next_double() < rho) out.ids[i] = Vocabulary::kMask;
  }
  return out;
}

namespace {

void validate_aug_spec(const AugmentationSpec& spec) {
  if (spec.replacement_prob < 0.0 || spec.replacement_prob > 1.0) {
    throw std::runtime_error("replacement probability must lie in [0, 1]");
  }
  if (spec.copies_per_instance < 1) {
    throw std::runtime_error("copies_per_instance must be >= 1");
  }
}

std::vector<EncodedInstance> augment_set(const std::vector<EncodedInstance>& source,
                                         const AugmentationSpec& spec,
                                         bool carry_labels) {
  validate_aug_spec(spec);
  if (source.empty()) {
    throw std::runtime_error("cannot augment an empty segment");
  }
  std::vector<EncodedInstance> out;
  out.reserve(source.size() * spec.copies_per_instance);
  for (const auto& inst : source) {
    for (int copy = 0; copy < spec.copies_per_instance; ++copy) {
      Rng rng(derive_seed(derive_seed(spec.seed, inst.id), "copy",
                          static_cast<uint64_t>(copy)));
      EncodedInstance aug;
      aug.id = inst.id + "#aug" + std::to_string(copy);
      aug.source_id = inst.id;
      aug.copy_index = copy;
      aug.tokens = mask_augment_instance(inst.tokens, spec.replacement_prob, rng);
      if (carry_labels) aug.label = inst.label;
      out.push_back(std::move(aug));
    }
  }
  return out;
}

}  // namespace

std::vector<EncodedInstance> build_augmented_unlabeled(
    const std::vector<EncodedInstance>& unlabeled, const AugmentationSpec& spec) {
  return augment_set(unlabeled, spec, /*carry_labels=*/false);
}

std::vector<EncodedInstance> build_augmented_labeled(
    const std::vector<EncodedInstance>& labeled, const AugmentationSpec& spec) {
  for (const auto& inst : labeled) {
    if (!inst.label.has_value()) {
      throw std::runtime_error("labeled augmentation source instance " + inst.id +
                               " has no label");
    }
  }
  return augment_set(labeled, spec, /*carry_labels=*/true);
}

}  // namespace tandem
