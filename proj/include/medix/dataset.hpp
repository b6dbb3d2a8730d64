#pragma once
// Data carriers shared across modules: labeled InD data and the unlabeled
// wild set with its evaluation-only origin tags.

#include <cstdint>
#include <vector>

#include "medix/matrix.hpp"

namespace medix {

struct LabeledDataset {
  Matrix features;          // n x p
  std::vector<int> labels;  // values in {0..K-1}
  int num_classes = 0;

  std::size_t size() const { return features.rows; }
};

// Throws when the dataset violates its invariants (n >= K >= 2, labels < K,
// finite features).
void validate_dataset(const LabeledDataset& data);

enum class Origin : std::uint8_t { ind = 0, ood = 1 };

struct WildSet {
  Matrix features;                 // m x p
  std::vector<Origin> origin;      // evaluation only, never read by the filter
  std::vector<int> pseudo_labels;  // empty until assigned
  GradientMatrix gradients;        // empty until computed, m x d

  std::size_t size() const { return features.rows; }

  double realized_pi() const {
    if (origin.empty()) return 0.0;
    std::size_t n_ood = 0;
    for (Origin o : origin) n_ood += (o == Origin::ood);
    return static_cast<double>(n_ood) / static_cast<double>(origin.size());
  }
};

}  // namespace medix
