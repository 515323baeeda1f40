#include "qproc/process.hpp"

#include <array>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace qproc {

namespace {

constexpr std::array<char, 8> kMagic{'Q', 'P', 'C', 'H', 'O', 'I', '1', '\0'};

void put_u64(std::ostream& os, std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint64_t get_u64(std::istream& is) {
  std::uint64_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw std::runtime_error("truncated Choi archive");
  return v;
}

}  // namespace

void write_choi_binary(std::ostream& os, const ComplexMatrix& choi, const ChoiDumpHeader& h) {
  os.write(kMagic.data(), kMagic.size());
  put_u64(os, h.dS);
  put_u64(os, h.dE);
  put_u64(os, h.k);
  put_u64(os, h.seed);
  put_u64(os, h.mode.size());
  os.write(h.mode.data(), static_cast<std::streamsize>(h.mode.size()));
  put_u64(os, static_cast<std::uint64_t>(choi.rows()));
  for (Eigen::Index r = 0; r < choi.rows(); ++r)
    for (Eigen::Index c = 0; c < choi.cols(); ++c) {
      const double re = choi(r, c).real(), im = choi(r, c).imag();
      os.write(reinterpret_cast<const char*>(&re), sizeof re);
      os.write(reinterpret_cast<const char*>(&im), sizeof im);
    }
  if (!os) throw std::runtime_error("failed writing Choi archive");
}

std::pair<ChoiDumpHeader, ComplexMatrix> read_choi_binary(std::istream& is) {
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic)
    throw std::runtime_error("not a Choi archive");
  ChoiDumpHeader h;
  h.dS = get_u64(is);
  h.dE = get_u64(is);
  h.k = get_u64(is);
  h.seed = get_u64(is);
  const auto len = get_u64(is);
  if (len > 4096) throw std::runtime_error("corrupt Choi archive header");
  h.mode.resize(len);
  if (!is.read(h.mode.data(), static_cast<std::streamsize>(len))) throw std::runtime_error("truncated Choi archive");
  const auto dim = static_cast<Eigen::Index>(get_u64(is));
  ComplexMatrix m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c) {
      double re = 0, im = 0;
      if (!is.read(reinterpret_cast<char*>(&re), sizeof re) || !is.read(reinterpret_cast<char*>(&im), sizeof im))
        throw std::runtime_error("truncated Choi archive");
      m(r, c) = cplx(re, im);
    }
  return {h, m};
}

void write_choi_csv(std::ostream& os, const ComplexMatrix& choi, const ChoiDumpHeader& h) {
  os << "# dS=" << h.dS << "\n# dE=" << h.dE << "\n# k=" << h.k << "\n# seed=" << h.seed
     << "\n# mode=" << h.mode << "\nrow,col,re,im\n";
  char buf[96];
  for (Eigen::Index r = 0; r < choi.rows(); ++r)
    for (Eigen::Index c = 0; c < choi.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%td,%td,%.17g,%.17g\n", r, c, choi(r, c).real(), choi(r, c).imag());
      os << buf;
    }
}

}  // namespace qproc
