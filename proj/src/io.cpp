#include "emdsparse/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace emdsparse {

std::string format_exact(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

void write_values(std::ostream& out, const std::vector<double>& values, std::size_t per_line) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << format_exact(values[i]);
    out << (((i + 1) % per_line == 0 || i + 1 == values.size()) ? '\n' : ' ');
  }
}

std::vector<double> read_values(std::istream& in, std::size_t count, const char* what) {
  std::vector<double> values(count);
  std::string token;
  for (std::size_t i = 0; i < count; ++i) {
    if (!(in >> token))
      throw std::runtime_error(std::string(what) + ": expected " + std::to_string(count) +
                               " values, got " + std::to_string(i));
    double v = 0.0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size())
      throw std::runtime_error(std::string(what) + ": bad value '" + token + "'");
    values[i] = v;
  }
  if (in >> token) throw std::runtime_error(std::string(what) + ": trailing data '" + token + "'");
  return values;
}

int read_delta(std::istream& in, const char* what) {
  int delta = 0;
  if (!(in >> delta) || !valid_delta(delta))
    throw std::runtime_error(std::string(what) + ": bad delta");
  return delta;
}

}  // namespace

void write_image(std::ostream& out, const GridImage& image) {
  out << "EMDIMG " << image.delta() << '\n';
  write_values(out, image.values(), static_cast<std::size_t>(image.delta()));
}

GridImage read_image(std::istream& in) {
  std::string magic;
  if (!(in >> magic) || magic != "EMDIMG") throw std::runtime_error("EMDIMG: missing header");
  const int delta = read_delta(in, "EMDIMG");
  return GridImage(delta, read_values(in, static_cast<std::size_t>(delta) * delta, "EMDIMG"));
}

void save_image(const std::string& path, const GridImage& image) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_image(out, image);
}

GridImage load_image(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_image(in);
}

void write_pyramid(std::ostream& out, const PyramidCoeffs& coeffs) {
  out << "EMDPYR v1 " << coeffs.delta << '\n';
  write_values(out, coeffs.values, 16);
}

PyramidCoeffs read_pyramid(std::istream& in) {
  std::string magic, version;
  if (!(in >> magic >> version) || magic != "EMDPYR" || version != "v1")
    throw std::runtime_error("EMDPYR: missing header");
  PyramidCoeffs out;
  out.delta = read_delta(in, "EMDPYR");
  out.values = read_values(in, Grid(out.delta).cells(), "EMDPYR");
  return out;
}

void save_pyramid(const std::string& path, const PyramidCoeffs& coeffs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_pyramid(out, coeffs);
}

PyramidCoeffs load_pyramid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_pyramid(in);
}

}  // namespace emdsparse
