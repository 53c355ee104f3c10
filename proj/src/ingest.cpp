#include "xbarsim/ingest.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace xbarsim {

using nlohmann::json;

AnnSpec load_weights(const std::string& path, Activation activation) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_weights: cannot open " + path);
  json doc = json::parse(in);

  AnnSpec spec;
  spec.activation = std::move(activation);
  spec.widths = doc.at("widths").get<std::vector<int>>();
  if (spec.widths.size() < 2) throw std::runtime_error("load_weights: need at least two widths");
  const auto& layers = doc.at("layers");
  if (!layers.is_array() || layers.size() + 1 != spec.widths.size()) {
    throw std::runtime_error("load_weights: layer count does not match widths");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& rows = layers[l];
    const int nr = spec.widths[l + 1], nc = spec.widths[l];
    if (!rows.is_array() || static_cast<int>(rows.size()) != nr || nr == 0 || nc == 0) {
      throw std::runtime_error("load_weights: layer " + std::to_string(l) + " has wrong row count");
    }
    Eigen::MatrixXd m(nr, nc);
    for (int k = 0; k < nr; ++k) {
      const auto& row = rows[static_cast<std::size_t>(k)];
      if (!row.is_array() || static_cast<int>(row.size()) != nc) {
        throw std::runtime_error("load_weights: layer " + std::to_string(l) + " row " +
                                 std::to_string(k) + " has wrong length");
      }
      for (int j = 0; j < nc; ++j) m(k, j) = row[static_cast<std::size_t>(j)].get<double>();
    }
    spec.weights.push_back(std::move(m));
  }
  spec.validate();
  return spec;
}

void save_weights(const std::string& path, const AnnSpec& spec) {
  spec.validate();
  json doc;
  doc["widths"] = spec.widths;
  json layers = json::array();
  for (const auto& m : spec.weights) {
    json rows = json::array();
    for (Eigen::Index k = 0; k < m.rows(); ++k) {
      json row = json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(k, j));
      rows.push_back(std::move(row));
    }
    layers.push_back(std::move(rows));
  }
  doc["layers"] = std::move(layers);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_weights: cannot open " + path);
  out << doc.dump(2) << "\n";
}

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw std::runtime_error("load_idx: truncated header in " + path);
  }
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path, long limit) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw std::runtime_error("load_idx: cannot open " + images_path);
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw std::runtime_error("load_idx: cannot open " + labels_path);

  if (read_be32(img, images_path) != 0x00000803u) {
    throw std::runtime_error("load_idx: bad image magic in " + images_path);
  }
  const std::uint32_t n_images = read_be32(img, images_path);
  const std::uint32_t rows = read_be32(img, images_path);
  const std::uint32_t cols = read_be32(img, images_path);

  if (read_be32(lab, labels_path) != 0x00000801u) {
    throw std::runtime_error("load_idx: bad label magic in " + labels_path);
  }
  const std::uint32_t n_labels = read_be32(lab, labels_path);
  if (n_images != n_labels) {
    throw std::runtime_error("load_idx: image/label count mismatch (" + std::to_string(n_images) +
                             " vs " + std::to_string(n_labels) + ")");
  }

  const long take = limit < 0 ? static_cast<long>(n_images)
                              : std::min<long>(limit, static_cast<long>(n_images));
  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;

  Dataset data;
  std::vector<unsigned char> buf(pixels);
  for (long i = 0; i < take; ++i) {
    if (!img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels))) {
      throw std::runtime_error("load_idx: truncated image data in " + images_path);
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(pixels));
    for (std::size_t p = 0; p < pixels; ++p) v[static_cast<Eigen::Index>(p)] = buf[p] / 255.0;
    data.images.push_back(std::move(v));
    char c = 0;
    if (!lab.read(&c, 1)) throw std::runtime_error("load_idx: truncated labels in " + labels_path);
    data.labels.push_back(static_cast<unsigned char>(c));
  }
  return data;
}

void save_idx(const std::string& images_path, const std::string& labels_path,
              const Dataset& data) {
  if (data.images.size() != data.labels.size()) {
    throw std::invalid_argument("save_idx: image/label count mismatch");
  }
  const Eigen::Index pixels = data.images.empty() ? 0 : data.images.front().size();
  const auto side = static_cast<std::uint32_t>(std::lround(std::sqrt(double(pixels))));
  if (static_cast<Eigen::Index>(side) * side != pixels) {
    throw std::invalid_argument("save_idx: images must have a square pixel count");
  }

  std::ofstream img(images_path, std::ios::binary);
  if (!img) throw std::runtime_error("save_idx: cannot open " + images_path);
  write_be32(img, 0x00000803u);
  write_be32(img, static_cast<std::uint32_t>(data.images.size()));
  write_be32(img, side);
  write_be32(img, side);
  for (const auto& v : data.images) {
    for (Eigen::Index p = 0; p < v.size(); ++p) {
      const auto byte = static_cast<unsigned char>(std::lround(v[p] * 255.0));
      img.write(reinterpret_cast<const char*>(&byte), 1);
    }
  }

  std::ofstream lab(labels_path, std::ios::binary);
  if (!lab) throw std::runtime_error("save_idx: cannot open " + labels_path);
  write_be32(lab, 0x00000801u);
  write_be32(lab, static_cast<std::uint32_t>(data.labels.size()));
  for (int l : data.labels) {
    const auto byte = static_cast<unsigned char>(l);
    lab.write(reinterpret_cast<const char*>(&byte), 1);
  }
}

RealizabilityReport weights_realizability(const AnnSpec& spec, const DeviceModel& device,
                                          Mode mode) {
  RealizabilityReport report;
  for (std::size_t l = 0; l < spec.weights.size(); ++l) {
    const auto& m = spec.weights[l];
    for (Eigen::Index k = 0; k < m.rows(); ++k) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        ++report.checked;
        const double w = m(k, j);
        bool ok = false;
        if (mode == Mode::Single) {
          ok = w > device.min_memductance && w < device.max_memductance;
        } else {
          try {
            split_weight(w, device);
            ok = true;
          } catch (const std::domain_error&) {
            ok = false;
          }
        }
        if (!ok) {
          report.violators.push_back(
              {static_cast<int>(l), static_cast<int>(k), static_cast<int>(j), w});
        }
      }
    }
  }
  return report;
}

AnnSpec random_weights(const std::vector<int>& widths, const DeviceModel& device, Mode mode,
                       std::uint64_t seed, Activation activation) {
  AnnSpec spec;
  spec.widths = widths;
  spec.activation = std::move(activation);
  std::mt19937_64 rng(seed);

  double lo, hi;
  if (mode == Mode::Single) {
    const double span = device.max_memductance - device.min_memductance;
    lo = device.min_memductance + 0.1 * span;
    hi = device.max_memductance - 0.1 * span;
  } else {
    const double reach = device.max_memductance;
    lo = -0.8 * reach;
    hi = 0.8 * reach;
  }
  std::uniform_real_distribution<double> unif(lo, hi);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    Eigen::MatrixXd m(widths[l + 1], widths[l]);
    for (Eigen::Index k = 0; k < m.rows(); ++k) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(k, j) = unif(rng);
    }
    spec.weights.push_back(std::move(m));
  }
  spec.validate();
  return spec;
}

Dataset random_dataset(int count, int pixels, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> digit(0, 9);
  Dataset data;
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd v(pixels);
    for (int p = 0; p < pixels; ++p) v[p] = byte(rng) / 255.0;
    data.images.push_back(std::move(v));
    data.labels.push_back(digit(rng));
  }
  return data;
}

}  // namespace xbarsim
