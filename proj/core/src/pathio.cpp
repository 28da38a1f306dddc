#include "spdelab/pathio.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

#include "spdelab/error.hpp"

namespace spdelab {

namespace {

constexpr std::array<char, 8> kMagic{'S', 'P', 'D', 'L', 'P', 'A', 'T', 'H'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits;
  std::memcpy(&bits, &value, sizeof bits);
  unsigned char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(bytes), sizeof bytes);
}

template <class T>
T get(std::istream& is) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  unsigned char bytes[sizeof(U)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof bytes)) throw SpecError("truncated binary path dump");
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(bytes[i]) << (8 * i);
  T value;
  std::memcpy(&value, &bits, sizeof value);
  return value;
}

}  // namespace

void write_path_csv(std::ostream& os, const PathRecord& record) {
  os << "time,mode_label,re,im\n";
  const auto entries = record.spectrum->entries();
  for (std::size_t t = 0; t < record.times.size(); ++t) {
    const auto time = format_number(record.times[t]);
    const auto& state = record.states[t];
    for (std::size_t i = 0; i < entries.size(); ++i) {
      os << time << ',' << entries[i].label << ',' << format_number(state[i].real()) << ','
         << format_number(state[i].imag()) << '\n';
    }
  }
}

void write_path_binary(std::ostream& os, const PathRecord& record) {
  const auto& spectrum = *record.spectrum;
  os.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, record.kind == PathKind::Linear ? 0u : 1u);
  put<std::uint64_t>(os, spectrum.spec().hash());
  put<std::uint64_t>(os, record.seed);
  put<std::uint64_t>(os, record.times.size());
  put<std::uint64_t>(os, spectrum.entry_count());
  put<std::uint64_t>(os, spectrum.dof_count());
  put<double>(os, record.dt);
  for (std::size_t t = 0; t < record.times.size(); ++t) {
    put<double>(os, record.times[t]);
    for (const auto& c : record.states[t].coefficients()) {
      put<double>(os, c.real());
      put<double>(os, c.imag());
    }
  }
  for (double v : record.brownian) put<double>(os, v);
  for (double v : record.convolution) put<double>(os, v);
}

PathRecord read_path_binary(std::istream& is, const SpectrumPtr& spectrum) {
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) throw SpecError("not a binary path dump");
  if (get<std::uint32_t>(is) != kVersion) throw SpecError("unsupported path dump version");
  PathRecord rec;
  rec.spectrum = spectrum;
  rec.kind = get<std::uint32_t>(is) == 0 ? PathKind::Linear : PathKind::Nonlinear;
  if (get<std::uint64_t>(is) != spectrum->spec().hash()) throw SpecError("path dump was written for a different spec");
  rec.seed = get<std::uint64_t>(is);
  const auto ntimes = get<std::uint64_t>(is);
  const auto nentries = get<std::uint64_t>(is);
  const auto ndof = get<std::uint64_t>(is);
  if (nentries != spectrum->entry_count() || ndof != spectrum->dof_count() || ntimes == 0) {
    throw SpecError("path dump sizes do not match the spectrum");
  }
  rec.dt = get<double>(is);
  rec.times.reserve(ntimes);
  rec.states.reserve(ntimes);
  for (std::uint64_t t = 0; t < ntimes; ++t) {
    rec.times.push_back(get<double>(is));
    std::vector<std::complex<double>> c(nentries);
    for (auto& v : c) {
      const double re = get<double>(is);
      const double im = get<double>(is);
      v = {re, im};
    }
    rec.states.emplace_back(spectrum, std::move(c));
  }
  const std::size_t n = (ntimes - 1) * ndof;
  rec.brownian.resize(n);
  rec.convolution.resize(n);
  for (auto& v : rec.brownian) v = get<double>(is);
  for (auto& v : rec.convolution) v = get<double>(is);
  return rec;
}

}  // namespace spdelab
