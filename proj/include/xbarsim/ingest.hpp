#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "xbarsim/circuit.hpp"
#include "xbarsim/oracle.hpp"

namespace xbarsim {

struct Dataset {
  std::vector<Eigen::VectorXd> images;  // pixels scaled to [0, 1]
  std::vector<int> labels;              // digits 0-9

  std::size_t size() const { return images.size(); }
};

/// Weight file schema: { "widths": [n0, ..., nL], "layers": [ [[row]...], ... ] }
/// with row-major matrices. Dimensions are checked against the widths.
AnnSpec load_weights(const std::string& path, Activation activation);
void save_weights(const std::string& path, const AnnSpec& spec);

/// IDX image/label pair (big-endian, magic 0x803 / 0x801), first `limit`
/// records, pixels divided by 255. limit < 0 loads everything.
Dataset load_idx(const std::string& images_path, const std::string& labels_path, long limit);

/// Writes a dataset back out in IDX form (pixels quantized to bytes). Images
/// must have a square pixel count.
void save_idx(const std::string& images_path, const std::string& labels_path, const Dataset& data);

struct RealizabilityIssue {
  int layer = 0, row = 0, col = 0;
  double value = 0.0;
};

struct RealizabilityReport {
  int checked = 0;
  std::vector<RealizabilityIssue> violators;
  bool all_representable() const { return violators.empty(); }
};

/// Which weight entries the device can realize in the given mode: the open
/// memductance interval for single memristors, the split domain for pairs.
RealizabilityReport weights_realizability(const AnnSpec& spec, const DeviceModel& device,
                                          Mode mode);

/// Seeded in-range weights for tests and demos (uniform over 80% of the
/// representable interval).
AnnSpec random_weights(const std::vector<int>& widths, const DeviceModel& device, Mode mode,
                       std::uint64_t seed, Activation activation);

/// Seeded synthetic images with byte-quantized pixels and arbitrary labels.
Dataset random_dataset(int count, int pixels, std::uint64_t seed);

}  // namespace xbarsim
