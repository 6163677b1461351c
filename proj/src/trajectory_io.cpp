#include <cstdint>
#include <fstream>
#include <stdexcept>

#include "wigner/sde.hpp"

namespace wigner {

namespace {

void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void put_str(std::ostream& os, const std::string& s) {
  put_u32(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_str(std::istream& is) {
  const uint32_t n = get_u32(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  return s;
}

void put_f64(std::ostream& os, double v) {
  static_assert(sizeof(double) == 8);
  os.write(reinterpret_cast<const char*>(&v), 8); // little-endian host assumed
}

double get_f64(std::istream& is) {
  double v;
  is.read(reinterpret_cast<char*>(&v), 8);
  return v;
}

} // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& t) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os.precision(17);
  os << "time";
  for (int idx : t.state_indices) os << ",re_state" << idx << ",im_state" << idx;
  for (const auto& n : t.output_names) os << ",re_mean_" << n << ",im_mean_" << n;
  for (const auto& n : t.output_names) os << ",re_out_" << n << ",im_out_" << n;
  os << "\n";
  for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(t.times.size()); ++r) {
    os << t.times[r];
    for (Eigen::Index j = 0; j < t.states.cols(); ++j)
      os << "," << t.states(r, j).real() << "," << t.states(r, j).imag();
    for (Eigen::Index j = 0; j < t.outputs_mean.cols(); ++j)
      os << "," << t.outputs_mean(r, j).real() << "," << t.outputs_mean(r, j).imag();
    for (Eigen::Index j = 0; j < t.outputs_sampled.cols(); ++j)
      os << "," << t.outputs_sampled(r, j).real() << "," << t.outputs_sampled(r, j).imag();
    os << "\n";
  }
}

void write_trajectory_wgnr1(const std::string& path, const Trajectory& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  os.write("WGNR1", 5);
  const auto n_rec = static_cast<uint32_t>(t.times.size());
  const auto n_st = static_cast<uint32_t>(t.states.cols());
  const auto n_out = static_cast<uint32_t>(t.outputs_mean.cols());
  put_u32(os, n_rec);
  put_u32(os, n_st);
  put_u32(os, n_out);
  for (int idx : t.state_indices) put_u32(os, static_cast<uint32_t>(idx));
  for (const auto& n : t.output_names) put_str(os, n);
  for (uint32_t r = 0; r < n_rec; ++r) {
    put_f64(os, t.times[r]);
    for (uint32_t j = 0; j < n_st; ++j) {
      put_f64(os, t.states(r, j).real());
      put_f64(os, t.states(r, j).imag());
    }
    for (uint32_t j = 0; j < n_out; ++j) {
      put_f64(os, t.outputs_mean(r, j).real());
      put_f64(os, t.outputs_mean(r, j).imag());
    }
    for (uint32_t j = 0; j < n_out; ++j) {
      put_f64(os, t.outputs_sampled(r, j).real());
      put_f64(os, t.outputs_sampled(r, j).imag());
    }
  }
}

Trajectory read_trajectory_wgnr1(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[5];
  is.read(magic, 5);
  if (std::string(magic, 5) != "WGNR1")
    throw std::runtime_error(path + ": not a WGNR1 record file");
  const uint32_t n_rec = get_u32(is), n_st = get_u32(is), n_out = get_u32(is);
  Trajectory t;
  t.times.resize(n_rec);
  t.state_indices.resize(n_st);
  for (uint32_t j = 0; j < n_st; ++j) t.state_indices[j] = static_cast<int>(get_u32(is));
  t.output_names.resize(n_out);
  for (uint32_t j = 0; j < n_out; ++j) t.output_names[j] = get_str(is);
  t.states.resize(n_rec, n_st);
  t.outputs_mean.resize(n_rec, n_out);
  t.outputs_sampled.resize(n_rec, n_out);
  for (uint32_t r = 0; r < n_rec; ++r) {
    t.times[r] = get_f64(is);
    for (uint32_t j = 0; j < n_st; ++j) {
      const double re = get_f64(is), im = get_f64(is);
      t.states(r, j) = Complex(re, im);
    }
    for (uint32_t j = 0; j < n_out; ++j) {
      const double re = get_f64(is), im = get_f64(is);
      t.outputs_mean(r, j) = Complex(re, im);
    }
    for (uint32_t j = 0; j < n_out; ++j) {
      const double re = get_f64(is), im = get_f64(is);
      t.outputs_sampled(r, j) = Complex(re, im);
    }
  }
  if (!is) throw std::runtime_error(path + ": truncated record file");
  return t;
}

} // namespace wigner
