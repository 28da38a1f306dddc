#include "spdelab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "spdelab/error.hpp"
#include "spdelab/fft.hpp"
#include "spdelab/random.hpp"

namespace spdelab {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

std::string wavevector_label(const std::array<int, 3>& k, int dim) {
  std::ostringstream os;
  os << "k=(";
  for (int d = 0; d < dim; ++d) os << (d ? "," : "") << k[d];
  os << ')';
  return os.str();
}

std::array<double, 3> cross(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

std::array<double, 3> normalized(const std::array<double, 3>& v) {
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  return {v[0] / n, v[1] / n, v[2] / n};
}

// Orthonormal basis of k-perp: one vector in 2D, two in 3D.
std::vector<std::array<double, 3>> tangent_frame(const std::array<int, 3>& k, int dim) {
  const std::array<double, 3> kd{static_cast<double>(k[0]), static_cast<double>(k[1]), static_cast<double>(k[2])};
  if (dim == 2) return {normalized({-kd[1], kd[0], 0.0})};
  std::array<double, 3> ref{0.0, 0.0, 1.0};
  if (k[0] == 0 && k[1] == 0) ref = {1.0, 0.0, 0.0};
  const auto e1 = cross(kd, ref);
  const auto e2 = cross(kd, e1);
  return {normalized(e1), normalized(e2)};
}

bool in_upper_half(const std::array<int, 3>& k, int dim) {
  for (int d = 0; d < dim; ++d) {
    if (k[d] != 0) return k[d] > 0;
  }
  return false;
}

}  // namespace

ModelSpec ModelSpec::kuramoto_sivashinsky() { return ModelSpec{}; }

ModelSpec ModelSpec::fractional_navier_stokes(int dim) {
  ModelSpec s;
  s.kind = ModelKind::FractionalNavierStokes;
  s.nu = 1.0;
  s.a = 0.0;
  s.gamma = -0.5;
  s.theta = 1.0;
  s.alpha = 3.0;
  s.dim = dim;
  s.length = 2.0 * std::numbers::pi;
  s.cutoff = dim == 3 ? 4 : 8;
  return s;
}

void ModelSpec::validate() const {
  if (!(nu > 0.0)) throw SpecError("nu must be positive");
  if (cutoff < 1) throw SpecError("cutoff must be at least 1");
  if (growth_exponent != 2) throw SpecError("growth exponent is fixed to 2");
  if (!(theta >= 0.0)) throw SpecError("theta must be non-negative");
  if (!std::isfinite(gamma)) throw SpecError("gamma must be finite");
  if (kind == ModelKind::KuramotoSivashinsky) {
    if (dim != 1) throw SpecError("Kuramoto-Sivashinsky requires dim = 1");
    if (!(length > 0.0)) throw SpecError("domain length must be positive");
    if (!(a >= 0.0)) throw SpecError("damping shift a must be non-negative");
  } else {
    if (dim != 2 && dim != 3) throw SpecError("fractional Navier-Stokes requires dim 2 or 3");
    if (!(alpha >= 1.0)) throw SpecError("alpha must be at least 1");
    if (std::abs(length - 2.0 * std::numbers::pi) > 1e-12) throw SpecError("fractional Navier-Stokes lives on the 2*pi torus");
  }
}

double ModelSpec::volume() const noexcept {
  if (kind == ModelKind::KuramotoSivashinsky) return length;
  return std::pow(2.0 * std::numbers::pi, dim);
}

std::string ModelSpec::canonical() const {
  std::ostringstream os;
  os << "kind=" << to_string(kind) << ";nu=" << format_number(nu) << ";a=" << format_number(a)
     << ";gamma=" << format_number(gamma) << ";theta=" << format_number(theta) << ";alpha=" << format_number(alpha)
     << ";dim=" << dim << ";length=" << format_number(length) << ";cutoff=" << cutoff << ";p=" << growth_exponent
     << ";drift=" << drift_enabled << ";noise=" << noise_enabled;
  return os.str();
}

std::uint64_t ModelSpec::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_string(ModelKind kind) {
  return kind == ModelKind::KuramotoSivashinsky ? "ks" : "fracns";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "ks" || name == "KS" || name == "kuramoto-sivashinsky") return ModelKind::KuramotoSivashinsky;
  if (name == "fracns" || name == "ns" || name == "FracNS" || name == "navier-stokes") {
    return ModelKind::FractionalNavierStokes;
  }
  throw SpecError("unknown model kind '" + name + "' (expected ks or fracns)");
}

SpectrumPtr build_spectrum(const ModelSpec& spec) {
  spec.validate();
  auto out = std::make_shared<OperatorSpectrum>();
  out->spec_ = spec;
  out->grid_size_ = dealiased_grid_size(spec.cutoff);

  auto add_entry = [&](SpectralEntry e) {
    if (!(e.mu > 0.0)) {
      std::ostringstream os;
      os << "drift rate mu = " << format_number(e.mu) << " <= 0 for mode " << e.label
         << "; increase a (a large enough) or nu";
      throw SpecError(os.str());
    }
    e.sigma = spec.noise_enabled ? std::pow(e.lambda, spec.gamma) : 0.0;
    out->entries_.push_back(std::move(e));
  };

  if (spec.kind == ModelKind::KuramotoSivashinsky) {
    for (int j = 1; j <= spec.cutoff; ++j) {
      SpectralEntry e;
      e.k = {j, 0, 0};
      const double wave = 2.0 * std::numbers::pi * j / spec.length;
      e.lambda = wave * wave;
      e.mu = spec.nu * e.lambda * e.lambda - e.lambda + spec.a;
      e.label = "j=" + std::to_string(j);
      add_entry(std::move(e));
    }
    if (spec.a <= 1.0 / (4.0 * spec.nu)) {
      out->warnings_.push_back("a = " + format_number(spec.a) + " <= 1/(4 nu) = " + format_number(1.0 / (4.0 * spec.nu)) +
                               ": positivity of nu*lambda^2 - lambda + a is not guaranteed beyond the retained modes");
    }
  } else {
    const int K = spec.cutoff;
    const int zmin = spec.dim == 3 ? -K : 0;
    const int zmax = spec.dim == 3 ? K : 0;
    for (int kx = -K; kx <= K; ++kx) {
      for (int ky = -K; ky <= K; ++ky) {
        for (int kz = zmin; kz <= zmax; ++kz) {
          const std::array<int, 3> k{kx, ky, kz};
          if (!in_upper_half(k, spec.dim)) continue;
          const auto frame = tangent_frame(k, spec.dim);
          const double lambda = static_cast<double>(kx * kx + ky * ky + kz * kz);
          for (std::size_t t = 0; t < frame.size(); ++t) {
            SpectralEntry e;
            e.k = k;
            e.tangent = static_cast<int>(t);
            e.direction = frame[t];
            e.lambda = lambda;
            e.mu = spec.nu * std::pow(lambda, spec.alpha);
            e.label = wavevector_label(k, spec.dim) + ":t" + std::to_string(t);
            add_entry(std::move(e));
          }
        }
      }
    }
  }

  out->dofs_.reserve(2 * out->entries_.size());
  out->min_mu_ = out->entries_.front().mu;
  out->max_mu_ = out->entries_.front().mu;
  for (std::size_t i = 0; i < out->entries_.size(); ++i) {
    const auto& e = out->entries_[i];
    out->min_mu_ = std::min(out->min_mu_, e.mu);
    out->max_mu_ = std::max(out->max_mu_, e.mu);
    for (int part = 0; part < 2; ++part) {
      DegreeOfFreedom d;
      d.entry = i;
      d.part = part;
      d.lambda = e.lambda;
      d.mu = e.mu;
      d.sigma = e.sigma;
      d.label = e.label + (part == 0 ? ":cos" : ":sin");
      out->dofs_.push_back(std::move(d));
    }
  }
  return out;
}

SpectralField::SpectralField(SpectrumPtr spectrum)
    : spectrum_(std::move(spectrum)), coefficients_(spectrum_->entry_count()) {}

SpectralField::SpectralField(SpectrumPtr spectrum, std::vector<std::complex<double>> coefficients)
    : spectrum_(std::move(spectrum)), coefficients_(std::move(coefficients)) {
  if (coefficients_.size() != spectrum_->entry_count()) {
    throw SpecError("coefficient count does not match the spectrum");
  }
}

double SpectralField::dof(std::size_t index) const noexcept {
  const auto& c = coefficients_[index / 2];
  return index % 2 == 0 ? kSqrt2 * c.real() : -kSqrt2 * c.imag();
}

void SpectralField::set_dof(std::size_t index, double value) noexcept {
  auto& c = coefficients_[index / 2];
  if (index % 2 == 0) {
    c.real(value / kSqrt2);
  } else {
    c.imag(-value / kSqrt2);
  }
}

std::vector<double> SpectralField::dofs() const {
  std::vector<double> out(2 * coefficients_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = dof(i);
  return out;
}

SpectralField SpectralField::from_dofs(SpectrumPtr spectrum, std::span<const double> values) {
  SpectralField f(std::move(spectrum));
  if (values.size() != f.spectrum().dof_count()) throw SpecError("dof count does not match the spectrum");
  for (std::size_t i = 0; i < values.size(); ++i) f.set_dof(i, values[i]);
  return f;
}

bool SpectralField::compatible(const SpectralField& other) const noexcept {
  return spectrum_ == other.spectrum_ || spectrum_->spec() == other.spectrum_->spec();
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  if (!compatible(other)) throw SpecError("fields live on different spectra");
  for (std::size_t i = 0; i < coefficients_.size(); ++i) coefficients_[i] += other.coefficients_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  if (!compatible(other)) throw SpecError("fields live on different spectra");
  for (std::size_t i = 0; i < coefficients_.size(); ++i) coefficients_[i] -= other.coefficients_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) noexcept {
  for (auto& c : coefficients_) c *= s;
  return *this;
}

SpectralField apply_power(const SpectralField& v, double s) {
  SpectralField out = v;
  if (s == 0.0) return out;
  const auto entries = v.spectrum().entries();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= std::pow(entries[i].lambda, s);
  return out;
}

double sobolev_norm(const SpectralField& v, double theta) {
  const auto entries = v.spectrum().entries();
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double w = theta == 0.0 ? 1.0 : std::pow(entries[i].lambda, 2.0 * theta);
    sum += w * std::norm(v[i]);
  }
  return std::sqrt(2.0 * sum);
}

double inner_product(const SpectralField& u, const SpectralField& v) {
  if (!u.compatible(v)) throw SpecError("fields live on different spectra");
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) sum += (u[i] * std::conj(v[i])).real();
  return 2.0 * sum;
}

SpectralField sample_gaussian_field(const SpectrumPtr& spectrum, Covariance covariance, std::uint64_t seed) {
  RandomStream stream(seed);
  return sample_gaussian_field(spectrum, covariance, stream);
}

SpectralField sample_gaussian_field(const SpectrumPtr& spectrum, Covariance covariance, RandomStream& stream) {
  SpectralField f(spectrum);
  const auto dofs = spectrum->dofs();
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    const double sd = std::sqrt(covariance.scale * dofs[i].stationary_variance());
    f.set_dof(i, sd * stream.normal());
  }
  return f;
}

SpectralField ks_trig_field(const SpectrumPtr& spectrum, int j, double cos_amplitude, double sin_amplitude) {
  if (spectrum->spec().kind != ModelKind::KuramotoSivashinsky) throw SpecError("ks_trig_field needs a KS spectrum");
  if (j < 1 || j > spectrum->spec().cutoff) throw SpecError("KS index outside the retained range");
  SpectralField f(spectrum);
  const double half_root = std::sqrt(spectrum->spec().length) / 2.0;
  f[static_cast<std::size_t>(j - 1)] = {cos_amplitude * half_root, -sin_amplitude * half_root};
  return f;
}

double ks_cosine_amplitude(const SpectralField& u, int j) {
  return 2.0 * u[static_cast<std::size_t>(j - 1)].real() / std::sqrt(u.spectrum().spec().length);
}

double ks_sine_amplitude(const SpectralField& u, int j) {
  return -2.0 * u[static_cast<std::size_t>(j - 1)].imag() / std::sqrt(u.spectrum().spec().length);
}

std::pair<std::size_t, bool> find_entry(const OperatorSpectrum& spectrum, const std::array<int, 3>& k, int tangent) {
  const int dim = spectrum.spec().dim;
  std::array<int, 3> key = k;
  bool mirrored = false;
  if (!in_upper_half(k, dim)) {
    key = {-k[0], -k[1], -k[2]};
    mirrored = true;
  }
  const auto entries = spectrum.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].k == key && entries[i].tangent == tangent) return {i, mirrored};
  }
  throw SpecError("wavevector not retained by the spectrum");
}

std::array<double, 3> evaluate(const SpectralField& u, const std::array<double, 3>& point) {
  const auto& spec = u.spectrum().spec();
  const auto entries = u.spectrum().entries();
  const double scale = 2.0 / std::sqrt(spec.volume());
  const double wave = spec.kind == ModelKind::KuramotoSivashinsky ? 2.0 * std::numbers::pi / spec.length : 1.0;
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    double phase = 0.0;
    for (int d = 0; d < spec.dim; ++d) phase += wave * e.k[d] * point[d];
    const double value = scale * (u[i] * std::polar(1.0, phase)).real();
    for (int d = 0; d < 3; ++d) out[d] += value * e.direction[d];
  }
  return out;
}

SpectralField project_physical(const SpectrumPtr& spectrum,
                               const std::function<std::array<double, 3>(const std::array<double, 3>&)>& field) {
  const auto& spec = spectrum->spec();
  const int n = spectrum->grid_size();
  const int dim = spec.dim;
  GridTransform fft(dim, n);
  const int ncomp = spec.kind == ModelKind::KuramotoSivashinsky ? 1 : dim;
  const double spacing = (spec.kind == ModelKind::KuramotoSivashinsky ? spec.length : 2.0 * std::numbers::pi) / n;

  std::vector<FftwArray<std::complex<double>>> spectra;
  {
    std::vector<FftwArray<double>> reals;
    for (int c = 0; c < ncomp; ++c) reals.push_back(fft.make_real());
    std::array<int, 3> idx{};
    const int n1 = dim >= 2 ? n : 1;
    const int n2 = dim >= 3 ? n : 1;
    for (idx[0] = 0; idx[0] < n; ++idx[0]) {
      for (idx[1] = 0; idx[1] < n1; ++idx[1]) {
        for (idx[2] = 0; idx[2] < n2; ++idx[2]) {
          const std::array<double, 3> x{idx[0] * spacing, idx[1] * spacing, idx[2] * spacing};
          const auto value = field(x);
          const std::size_t off = fft.real_index(idx);
          for (int c = 0; c < ncomp; ++c) reals[c][off] = value[c];
        }
      }
    }
    for (int c = 0; c < ncomp; ++c) {
      spectra.push_back(fft.make_spectral());
      fft.forward(reals[c].get(), spectra.back().get());
    }
  }

  const double norm = std::sqrt(spec.volume()) / static_cast<double>(fft.real_size());
  SpectralField out(spectrum);
  const auto entries = spectrum->entries();
  const int last = dim - 1;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    std::array<int, 3> k = e.k;
    bool conj = false;
    if (k[last] < 0) {
      k = {-k[0], -k[1], -k[2]};
      conj = true;
    }
    const std::size_t off = fft.spectral_index(k);
    std::complex<double> acc{};
    for (int c = 0; c < ncomp; ++c) {
      const auto v = conj ? std::conj(spectra[c][off]) : spectra[c][off];
      acc += e.direction[c] * v;
    }
    out[i] = norm * acc;
  }
  return out;
}

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  // snprintf honours LC_NUMERIC; normalize the separator.
  for (char* p = buf; *p != '\0'; ++p) {
    if (*p == ',') *p = '.';
  }
  return buf;
}

void write_spectrum_csv(std::ostream& os, const OperatorSpectrum& spectrum) {
  os << "mode_label,lambda,mu,sigma,stationary_variance\n";
  for (const auto& d : spectrum.dofs()) {
    os << d.label << ',' << format_number(d.lambda) << ',' << format_number(d.mu) << ',' << format_number(d.sigma)
       << ',' << format_number(d.stationary_variance()) << '\n';
  }
}

}  // namespace spdelab
