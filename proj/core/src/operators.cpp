#include "spdelab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spdelab/error.hpp"

namespace spdelab {

PseudospectralContext::PseudospectralContext(SpectrumPtr spectrum) : spectrum_(std::move(spectrum)) {
  const auto& spec = spectrum_->spec();
  const int dim = spec.dim;
  fft_ = std::make_unique<GridTransform>(dim, spectrum_->grid_size());

  const auto entries = spectrum_->entries();
  const int last = dim - 1;
  const double wave = spec.kind == ModelKind::KuramotoSivashinsky ? 2.0 * std::numbers::pi / spec.length : 1.0;
  slots_.resize(entries.size());
  wave_.resize(entries.size());
  inverse_gamma_.resize(entries.size());
  theta_weight_.resize(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& k = entries[i].k;
    const std::array<int, 3> minus{-k[0], -k[1], -k[2]};
    Slot s;
    if (k[last] >= 0) {
      s.has_direct = true;
      s.direct = fft_->spectral_index(k);
    }
    if (minus[last] >= 0) {
      s.has_mirror = true;
      s.mirror = fft_->spectral_index(minus);
    }
    slots_[i] = s;
    for (int d = 0; d < 3; ++d) wave_[i][d] = wave * k[d];
    inverse_gamma_[i] = std::pow(entries[i].lambda, -spec.gamma);
    theta_weight_[i] = std::pow(entries[i].lambda, 2.0 * spec.theta);
  }

  const double volume = spec.volume();
  to_physical_ = 1.0 / std::sqrt(volume);
  to_spectral_ = std::sqrt(volume) / static_cast<double>(fft_->real_size());

  const int ncomp = spec.kind == ModelKind::KuramotoSivashinsky ? 1 : dim;
  for (int c = 0; c < ncomp; ++c) {
    u_real_.push_back(fft_->make_real());
    v_real_.push_back(fft_->make_real());
  }
  product_ = fft_->make_real();
  work_ = fft_->make_spectral();
}

void PseudospectralContext::check(const SpectralField& f) const {
  if (f.spectrum_ptr() != spectrum_ && !(f.spectrum().spec() == spectrum_->spec())) {
    throw SpecError("field does not belong to this evaluation context's spectrum");
  }
}

void PseudospectralContext::scatter(const SpectralField& f, int component, int derivative_axis,
                                    std::complex<double>* out) const {
  std::fill(out, out + fft_->spectral_size(), std::complex<double>{});
  const auto entries = spectrum_->entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    std::complex<double> c = f[i] * (to_physical_ * entries[i].direction[component]);
    if (derivative_axis >= 0) c *= std::complex<double>(0.0, wave_[i][static_cast<std::size_t>(derivative_axis)]);
    if (slots_[i].has_direct) out[slots_[i].direct] += c;
    if (slots_[i].has_mirror) out[slots_[i].mirror] += std::conj(c);
  }
}

std::complex<double> PseudospectralContext::gather(const std::complex<double>* in, std::size_t entry) const {
  const auto& s = slots_[entry];
  return s.has_direct ? in[s.direct] : std::conj(in[s.mirror]);
}

void PseudospectralContext::bilinear(const SpectralField& u, const SpectralField& v, SpectralField& out) {
  check(u);
  check(v);
  check(out);
  if (spectrum_->spec().kind == ModelKind::KuramotoSivashinsky) {
    bilinear_ks(u, v, out);
  } else {
    bilinear_ns(u, v, out);
  }
}

SpectralField PseudospectralContext::bilinear(const SpectralField& u, const SpectralField& v) {
  SpectralField out(spectrum_);
  bilinear(u, v, out);
  return out;
}

void PseudospectralContext::bilinear_ks(const SpectralField& u, const SpectralField& v, SpectralField& out) {
  auto* spec_buf = work_.get();
  scatter(u, 0, -1, spec_buf);
  fft_->inverse(spec_buf, u_real_[0].get());
  scatter(v, 0, 0, spec_buf);
  fft_->inverse(spec_buf, v_real_[0].get());

  const std::size_t n = fft_->real_size();
  double* p = product_.get();
  const double* a = u_real_[0].get();
  const double* b = v_real_[0].get();
  for (std::size_t m = 0; m < n; ++m) p[m] = a[m] * b[m];
  fft_->forward(p, spec_buf);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = to_spectral_ * gather(spec_buf, i);
}

void PseudospectralContext::bilinear_ns(const SpectralField& u, const SpectralField& v, SpectralField& out) {
  const int dim = spectrum_->spec().dim;
  const bool same = &u == &v || std::equal(u.coefficients().begin(), u.coefficients().end(), v.coefficients().begin());
  auto* spec_buf = work_.get();
  for (int c = 0; c < dim; ++c) {
    scatter(u, c, -1, spec_buf);
    fft_->inverse(spec_buf, u_real_[c].get());
    if (!same) {
      scatter(v, c, -1, spec_buf);
      fft_->inverse(spec_buf, v_real_[c].get());
    }
  }
  const auto& vr = same ? u_real_ : v_real_;

  std::fill(out.coefficients().begin(), out.coefficients().end(), std::complex<double>{});
  const auto entries = spectrum_->entries();
  const std::size_t n = fft_->real_size();
  // W_i = sum_j d_j (u_j v_i); the (i, j) product contributes i k_j P_ij to W_i.
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      if (same && j < i) continue;
      double* p = product_.get();
      const double* uj = u_real_[j].get();
      const double* vi = vr[i].get();
      for (std::size_t m = 0; m < n; ++m) p[m] = uj[m] * vi[m];
      fft_->forward(p, spec_buf);
      for (std::size_t e = 0; e < entries.size(); ++e) {
        const std::complex<double> pij = to_spectral_ * gather(spec_buf, e);
        const auto& dir = entries[e].direction;
        std::complex<double> acc = dir[i] * wave_[e][j] * pij;
        if (same && j != i) acc += dir[j] * wave_[e][i] * pij;  // symmetric partner u_i u_j
        out[e] += std::complex<double>(0.0, 1.0) * acc;
      }
    }
  }
}

void PseudospectralContext::drift(const SpectralField& u, DriftEvaluation& out) {
  check(u);
  const auto& spec = spectrum_->spec();
  if (spec.drift_enabled) {
    bilinear(u, u, out.F);
    if (spec.kind == ModelKind::KuramotoSivashinsky && spec.a != 0.0) {
      for (std::size_t i = 0; i < u.size(); ++i) out.F[i] -= spec.a * u[i];
    }
  } else {
    std::fill(out.F.coefficients().begin(), out.F.coefficients().end(), std::complex<double>{});
  }
  double scaled_sq = 0.0;
  double theta_sq = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    out.scaled[i] = inverse_gamma_[i] * out.F[i];
    scaled_sq += std::norm(out.scaled[i]);
    theta_sq += theta_weight_[i] * std::norm(u[i]);
  }
  out.scaled_norm = std::sqrt(2.0 * scaled_sq);
  out.input_norm_theta = std::sqrt(2.0 * theta_sq);
  if (!std::isfinite(out.scaled_norm)) throw NumericalError("non-finite drift coefficients");
}

DriftEvaluation PseudospectralContext::drift(const SpectralField& u) {
  DriftEvaluation out(spectrum_);
  drift(u, out);
  return out;
}

double PseudospectralContext::growth_ratio(const SpectralField& u) {
  const auto d = drift(u);
  return d.scaled_norm / (1.0 + d.input_norm_theta * d.input_norm_theta);
}

SpectralField b_ks(const SpectralField& u, const SpectralField& v) {
  if (u.spectrum().spec().kind != ModelKind::KuramotoSivashinsky) throw SpecError("b_ks needs a KS field");
  if (!u.compatible(v)) throw SpecError("b_ks arguments live on different spectra");
  PseudospectralContext ctx(u.spectrum_ptr());
  return ctx.bilinear(u, v);
}

SpectralField b_ns(const SpectralField& u, const SpectralField& v) {
  if (u.spectrum().spec().kind != ModelKind::FractionalNavierStokes) throw SpecError("b_ns needs a FracNS field");
  if (!u.compatible(v)) throw SpecError("b_ns arguments live on different spectra");
  PseudospectralContext ctx(u.spectrum_ptr());
  return ctx.bilinear(u, v);
}

DriftEvaluation drift(const SpectralField& u) {
  PseudospectralContext ctx(u.spectrum_ptr());
  return ctx.drift(u);
}

double growth_ratio(const SpectralField& u) {
  PseudospectralContext ctx(u.spectrum_ptr());
  return ctx.growth_ratio(u);
}

}  // namespace spdelab
