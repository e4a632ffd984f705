#include "cqed/model.hpp"

#include <bit>
#include <cmath>

#include <fmt/format.h>

namespace cqed {

void ModelParams::validate() const {
  // g_a = 0 is admitted so a bare decaying cavity can be modelled.
  if (!(g_a >= 0.0)) throw std::invalid_argument("g_a must be non-negative");
  if (!(g_c >= 0.0)) throw std::invalid_argument("g_c must be non-negative");
  if (!(k_tilde >= 0.0)) throw std::invalid_argument("k_tilde must be non-negative");
  if (!(gamma_tilde >= 0.0)) throw std::invalid_argument("gamma_tilde must be non-negative");
  if (!(tau_off > 0.0)) throw std::invalid_argument("tau_off must be positive");
}

InputStateSpec InputStateSpec::mixed(double p) {
  InputStateSpec spec{Variant::MixedGHZW};
  spec.p = p;
  spec.validate();
  return spec;
}

InputStateSpec InputStateSpec::custom(const std::array<Complex, 8>& amplitudes) {
  InputStateSpec spec{Variant::CustomPure};
  spec.amplitudes = amplitudes;
  spec.validate();
  return spec;
}

void InputStateSpec::validate() const {
  if (variant == Variant::MixedGHZW && !(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(fmt::format("mixture weight p = {} outside [0, 1]", p));
  }
  if (variant == Variant::CustomPure) {
    double norm2 = 0.0;
    for (const auto& a : amplitudes) norm2 += std::norm(a);
    if (std::abs(std::sqrt(norm2) - 1.0) > 1e-10) {
      throw std::invalid_argument(fmt::format("custom amplitudes are not normalized (norm {})", std::sqrt(norm2)));
    }
  }
}

bool InputStateSpec::is_pure() const {
  return variant != Variant::MixedGHZW || p == 0.0 || p == 1.0;
}

std::string InputStateSpec::label() const {
  switch (variant) {
    case Variant::W: return "W";
    case Variant::GHZ: return "GHZ";
    case Variant::MixedGHZW: return fmt::format("mixed(p={})", p);
    case Variant::CustomPure: return "custom";
  }
  return "?";
}

Vector w_state() {
  Vector v = Vector::Zero(8);
  v(1) = v(2) = v(4) = 1.0 / std::sqrt(3.0);
  return v;
}

Vector ghz_state() {
  Vector v = Vector::Zero(8);
  v(0) = v(7) = 1.0 / std::sqrt(2.0);
  return v;
}

Vector three_qubit_state(const InputStateSpec& spec) {
  spec.validate();
  switch (spec.variant) {
    case InputStateSpec::Variant::W: return w_state();
    case InputStateSpec::Variant::GHZ: return ghz_state();
    case InputStateSpec::Variant::MixedGHZW:
      if (spec.p == 1.0) return ghz_state();
      if (spec.p == 0.0) return w_state();
      throw std::invalid_argument("a GHZ/W mixture has no pure-state representative");
    case InputStateSpec::Variant::CustomPure: {
      Vector v(8);
      for (int i = 0; i < 8; ++i) v(i) = spec.amplitudes[i];
      return v;
    }
  }
  throw std::logic_error("unknown input variant");
}

DensityMatrix field_density(const InputStateSpec& spec) {
  spec.validate();
  const auto space = HilbertSpace::qubits(3);
  if (spec.variant == InputStateSpec::Variant::MixedGHZW) {
    const Vector g = ghz_state();
    const Vector w = w_state();
    return {space, spec.p * g * g.adjoint() + (1.0 - spec.p) * w * w.adjoint()};
  }
  const Vector v = three_qubit_state(spec);
  return {space, v * v.adjoint()};
}

namespace {

Eigen::Index bit_of(Kind kind, int channel) {
  return Eigen::Index{1} << site_bit(SiteIndex{kind, static_cast<Channel>(channel)}.position());
}

OperatorMatrix dense(const std::vector<OperatorEntry>& entries) {
  const auto space = HilbertSpace::full_system();
  Matrix m = Matrix::Zero(space.total_dim(), space.total_dim());
  for (const auto& e : entries) m(e.row, e.col) += e.value;
  return {space, std::move(m)};
}

}  // namespace

std::vector<OperatorEntry> interaction_entries(const ModelParams& params, bool drive_on) {
  params.validate();
  const Eigen::Index dim = HilbertSpace::full_system().total_dim();
  const bool field_terms = drive_on && params.g_c != 0.0;
  std::vector<OperatorEntry> out;
  for (int j = 0; j < kNumChannels; ++j) {
    const Eigen::Index fb = bit_of(Kind::Field, j);
    const Eigen::Index cb = bit_of(Kind::Cavity, j);
    const Eigen::Index ab = bit_of(Kind::Atom, j);
    for (Eigen::Index y = 0; y < dim; ++y) {
      const bool c = (y & cb) != 0;
      // c s^dag + c^dag s swaps one excitation between cavity and atom.
      if (params.g_a != 0.0 && c != ((y & ab) != 0)) out.push_back({y ^ cb ^ ab, y, params.g_a});
      // i g_c (c f^dag - c^dag f)
      if (field_terms && c != ((y & fb) != 0)) {
        out.push_back({y ^ cb ^ fb, y, c ? kI * params.g_c : -kI * params.g_c});
      }
    }
  }
  return out;
}

std::vector<std::vector<OperatorEntry>> collapse_entries(const ModelParams& params) {
  params.validate();
  const Eigen::Index dim = HilbertSpace::full_system().total_dim();
  std::vector<std::vector<OperatorEntry>> ops;
  for (Kind kind : {Kind::Cavity, Kind::Atom}) {
    const double rate = kind == Kind::Cavity ? params.k_tilde : params.gamma_tilde;
    for (int j = 0; j < kNumChannels; ++j) {
      std::vector<OperatorEntry> op;
      const Eigen::Index b = bit_of(kind, j);
      if (rate != 0.0) {
        for (Eigen::Index y = 0; y < dim; ++y) {
          if (y & b) op.push_back({y ^ b, y, std::sqrt(rate)});
        }
      }
      ops.push_back(std::move(op));
    }
  }
  return ops;
}

double loss_rate(Eigen::Index x, const ModelParams& params) {
  double loss = 0.0;
  for (int j = 0; j < kNumChannels; ++j) {
    if (x & bit_of(Kind::Cavity, j)) loss += params.k_tilde;
    if (x & bit_of(Kind::Atom, j)) loss += params.gamma_tilde;
  }
  return loss;
}

OperatorMatrix interaction_hamiltonian(const ModelParams& params, bool drive_on) {
  return dense(interaction_entries(params, drive_on));
}

std::vector<OperatorMatrix> collapse_operators(const ModelParams& params) {
  std::vector<OperatorMatrix> ops;
  for (const auto& entries : collapse_entries(params)) ops.push_back(dense(entries));
  return ops;
}

OperatorMatrix effective_hamiltonian(const ModelParams& params, bool drive_on) {
  auto entries = interaction_entries(params, drive_on);
  // sum_k C_k^dag C_k is diagonal.
  for (Eigen::Index x = 0; x < HilbertSpace::full_system().total_dim(); ++x) {
    const double loss = loss_rate(x, params);
    if (loss != 0.0) entries.push_back({x, x, -0.5 * kI * loss});
  }
  return dense(entries);
}

StateVector embed_field_state(const Vector& field_amplitudes) {
  if (field_amplitudes.size() != 8) throw std::invalid_argument("field state must have 8 amplitudes");
  const auto space = HilbertSpace::full_system();
  Vector v = Vector::Zero(space.total_dim());
  // Field qubits are the three most significant sites; cavities and atoms
  // sit in |0>.
  for (int x = 0; x < 8; ++x) v(static_cast<Eigen::Index>(x) << 6) = field_amplitudes(x);
  return {space, std::move(v)};
}

StateVector initial_pure_state(const InputStateSpec& spec) {
  return embed_field_state(three_qubit_state(spec));
}

DensityMatrix initial_state(const InputStateSpec& spec) {
  if (spec.is_pure()) return DensityMatrix::pure(initial_pure_state(spec));
  const Vector g = embed_field_state(ghz_state()).amplitudes();
  const Vector w = embed_field_state(w_state()).amplitudes();
  return {HilbertSpace::full_system(), spec.p * g * g.adjoint() + (1.0 - spec.p) * w * w.adjoint()};
}

Vector phase_rotation_diagonal(double phi) {
  Vector d(8);
  for (int x = 0; x < 8; ++x) d(x) = std::exp(-kI * phi * static_cast<double>(std::popcount(static_cast<unsigned>(x))));
  return d;
}

OperatorMatrix local_phase_rotation(double phi, Kind /*kind*/) {
  // Atoms (s^dag s) and truncated cavity modes (c^dag c) share the same
  // number operator on {|0>, |1>}.
  return {HilbertSpace::qubits(3), phase_rotation_diagonal(phi).asDiagonal()};
}

OperatorMatrix channel_excitation(Channel channel) {
  const Matrix n = number_2x2();
  OperatorMatrix total = embed(n, SiteIndex{Kind::Field, channel});
  total += embed(n, SiteIndex{Kind::Cavity, channel});
  total += embed(n, SiteIndex{Kind::Atom, channel});
  return total;
}

DensityMatrix excitation_parity_conjugate(const DensityMatrix& rho) {
  Matrix m = rho.entries();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if ((std::popcount(static_cast<unsigned>(i)) + std::popcount(static_cast<unsigned>(j))) % 2) m(i, j) = -m(i, j);
    }
  }
  return {rho.space(), std::move(m)};
}

OperatorMatrix number_operator(SiteIndex site) { return embed(number_2x2(), site); }

}  // namespace cqed
