#include "rectgauss/io.hpp"

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace rectgauss {

namespace {

using nlohmann::json;

json open_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  json parsed;
  try {
    in >> parsed;
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed JSON in " + path + ": " + e.what());
  }
  return parsed;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  out << text;
  if (!out) {
    throw std::runtime_error("write failed for " + path);
  }
}

std::vector<double> flatten(const Matrix& m) {
  return {m.data(), m.data() + m.size()};  // row-major storage
}

Matrix unflatten(const std::vector<double>& values, Eigen::Index rows, Eigen::Index cols,
                 const std::string& what) {
  if (static_cast<Eigen::Index>(values.size()) != rows * cols) {
    throw std::runtime_error(what + " has wrong length");
  }
  Matrix m(rows, cols);
  std::copy(values.begin(), values.end(), m.data());
  return m;
}

void append_u64_le(std::string& buffer, std::uint64_t value) {
  for (int byte = 0; byte < 8; ++byte) {
    buffer.push_back(static_cast<char>((value >> (8 * byte)) & 0xFF));
  }
}

std::uint64_t read_u64_le(std::istream& in, const std::string& path) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
    throw std::runtime_error("truncated sample file " + path);
  }
  std::uint64_t value = 0;
  for (int byte = 0; byte < 8; ++byte) {
    value |= static_cast<std::uint64_t>(bytes[byte]) << (8 * byte);
  }
  return value;
}

}  // namespace

void save_model(const GenerativeModel& model, const std::string& path) {
  model.validate();
  json doc;
  doc["d"] = model.dim();
  doc["k"] = model.latent_dim();
  doc["weight"] = flatten(model.weight);
  doc["bias"] = std::vector<double>(model.bias.data(), model.bias.data() + model.bias.size());
  doc["noise_sigma"] = model.noise_sigma;
  if (model.outer) {
    doc["outer"] = flatten(*model.outer);
  }
  write_text(path, doc.dump(2) + "\n");
}

GenerativeModel load_model(const std::string& path) {
  const json doc = open_json(path);
  try {
    const auto d = doc.at("d").get<Eigen::Index>();
    const auto k = doc.at("k").get<Eigen::Index>();
    if (d < 1 || k < 1) {
      throw std::runtime_error("model dimensions must be positive in " + path);
    }
    GenerativeModel model;
    model.weight = unflatten(doc.at("weight").get<std::vector<double>>(), d, k, "weight");
    const auto bias = doc.at("bias").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(bias.size()) != d) {
      throw std::runtime_error("bias has wrong length in " + path);
    }
    model.bias = Eigen::Map<const Vector>(bias.data(), d);
    model.noise_sigma = doc.value("noise_sigma", 0.0);
    if (doc.contains("outer")) {
      const auto outer = doc.at("outer").get<std::vector<double>>();
      if (outer.empty() || outer.size() % static_cast<std::size_t>(d) != 0) {
        throw std::runtime_error("outer has wrong length in " + path);
      }
      model.outer = unflatten(outer, static_cast<Eigen::Index>(outer.size()) / d, d, "outer");
    }
    model.validate();
    return model;
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed model file " + path + ": " + e.what());
  }
}

void save_estimate(const EstimatedModel& model, const FitDiagnostics& diagnostics,
                   const std::string& path) {
  json doc;
  doc["d"] = model.dim();
  doc["sigma_hat"] = flatten(model.sigma_hat);
  doc["b_hat"] =
      std::vector<double>(model.b_hat.data(), model.b_hat.data() + model.b_hat.size());
  json diag;
  diag["degenerate_coordinates"] = diagnostics.degenerate_coordinates;
  json clamped = json::array();
  for (const auto& [i, j] : diagnostics.clamped_moment_pairs) {
    clamped.push_back({i, j});
  }
  diag["clamped_moment_pairs"] = clamped;
  doc["diagnostics"] = diag;
  write_text(path, doc.dump(2) + "\n");
}

EstimatedModel load_estimate(const std::string& path) {
  const json doc = open_json(path);
  try {
    const auto d = doc.at("d").get<Eigen::Index>();
    EstimatedModel model;
    model.sigma_hat = unflatten(doc.at("sigma_hat").get<std::vector<double>>(), d, d, "sigma_hat");
    const auto b_hat = doc.at("b_hat").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(b_hat.size()) != d) {
      throw std::runtime_error("b_hat has wrong length in " + path);
    }
    model.b_hat = Eigen::Map<const Vector>(b_hat.data(), d);
    return model;
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed estimate file " + path + ": " + e.what());
  }
}

void save_matrix(const Matrix& m, const std::string& path) {
  json doc;
  doc["rows"] = m.rows();
  doc["cols"] = m.cols();
  doc["data"] = flatten(m);
  write_text(path, doc.dump(2) + "\n");
}

Matrix load_matrix(const std::string& path) {
  const json doc = open_json(path);
  try {
    const auto rows = doc.at("rows").get<Eigen::Index>();
    const auto cols = doc.at("cols").get<Eigen::Index>();
    return unflatten(doc.at("data").get<std::vector<double>>(), rows, cols, "data");
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed matrix file " + path + ": " + e.what());
  }
}

void save_samples(const SampleMatrix& samples, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  std::string header = "RGS1";
  append_u64_le(header, static_cast<std::uint64_t>(samples.count()));
  append_u64_le(header, static_cast<std::uint64_t>(samples.dim()));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));

  std::string buffer;
  buffer.reserve(1 << 20);
  const double* values = samples.data.data();  // row-major
  for (Eigen::Index i = 0; i < samples.data.size(); ++i) {
    append_u64_le(buffer, std::bit_cast<std::uint64_t>(values[i]));
    if (buffer.size() >= (1 << 20)) {
      out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
      buffer.clear();
    }
  }
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  if (!out) {
    throw std::runtime_error("write failed for " + path);
  }
}

SampleMatrix load_samples(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "RGS1") {
    throw std::runtime_error(path + " is not a sample file (bad magic)");
  }
  const std::uint64_t n = read_u64_le(in, path);
  const std::uint64_t d = read_u64_le(in, path);
  if (n < 1 || d < 1 || n > (1ULL << 40) || d > (1ULL << 20)) {
    throw std::runtime_error(path + " has implausible dimensions");
  }
  SampleMatrix samples;
  samples.data.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  double* values = samples.data.data();
  for (std::uint64_t i = 0; i < n * d; ++i) {
    values[i] = std::bit_cast<double>(read_u64_le(in, path));
  }
  return samples;
}

}  // namespace rectgauss
