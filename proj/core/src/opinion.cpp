#include "mvlt/opinion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mvlt {
namespace {

void check_probability_vector(const std::vector<double>& v, const char* what) {
  double sum = 0.0;
  for (double x : v) {
    if (!std::isfinite(x) || x < 0.0 || x > 1.0) {
      throw std::invalid_argument(std::string(what) + " component out of [0,1]");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument(std::string(what) + " does not sum to 1");
  }
}

}  // namespace

Evidence::Evidence(std::vector<double> masses) : masses_(std::move(masses)) {
  if (masses_.size() < 2) {
    throw std::invalid_argument("evidence needs at least 2 classes");
  }
  for (double m : masses_) {
    if (!std::isfinite(m) || m < 0.0) {
      throw std::invalid_argument("evidence mass must be finite and >= 0");
    }
  }
}

Opinion::Opinion(std::vector<double> beliefs, double uncertainty, std::vector<double> base_rates)
    : beliefs_(std::move(beliefs)), uncertainty_(uncertainty), base_rates_(std::move(base_rates)) {
  if (beliefs_.size() < 2) {
    throw std::invalid_argument("opinion needs at least 2 classes");
  }
  if (base_rates_.size() != beliefs_.size()) {
    throw std::invalid_argument("base rates length differs from beliefs");
  }
  if (!std::isfinite(uncertainty_) || uncertainty_ < 0.0 || uncertainty_ > 1.0) {
    throw std::invalid_argument("uncertainty out of [0,1]");
  }
  double sum = uncertainty_;
  for (double b : beliefs_) {
    if (!std::isfinite(b) || b < 0.0 || b > 1.0) {
      throw std::invalid_argument("belief out of [0,1]");
    }
    sum += b;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("beliefs + uncertainty do not sum to 1");
  }
  check_probability_vector(base_rates_, "base rates");
}

std::vector<double> uniform_base_rates(int k) {
  if (k < 2) throw std::invalid_argument("class count must be >= 2");
  return std::vector<double>(static_cast<std::size_t>(k), 1.0 / k);
}

Opinion opinion_from_evidence(const Evidence& e, const std::vector<double>& base_rates) {
  const int k = e.k();
  if (static_cast<int>(base_rates.size()) != k) {
    throw std::invalid_argument("base rates length differs from evidence");
  }
  double strength = 0.0;
  for (int i = 0; i < k; ++i) strength += e[i] + 1.0;
  std::vector<double> beliefs(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) beliefs[static_cast<std::size_t>(i)] = e[i] / strength;
  return Opinion(std::move(beliefs), static_cast<double>(k) / strength, base_rates);
}

DirichletParams dirichlet_from_evidence(const Evidence& e) {
  DirichletParams d;
  d.alphas.resize(static_cast<std::size_t>(e.k()));
  for (int i = 0; i < e.k(); ++i) {
    d.alphas[static_cast<std::size_t>(i)] = e[i] + 1.0;
    d.strength += e[i] + 1.0;
  }
  return d;
}

ProjectionProbability project(const Opinion& o) {
  ProjectionProbability p;
  p.probs.resize(static_cast<std::size_t>(o.k()));
  for (int i = 0; i < o.k(); ++i) {
    p.probs[static_cast<std::size_t>(i)] =
        o.beliefs()[static_cast<std::size_t>(i)] +
        o.base_rates()[static_cast<std::size_t>(i)] * o.uncertainty();
  }
  return p;
}

Evidence evidence_from_opinion(const Opinion& o, int k) {
  if (k != o.k()) {
    throw std::invalid_argument("class count differs from opinion");
  }
  if (o.uncertainty() <= 0.0) {
    throw std::invalid_argument("opinion with zero uncertainty is not invertible");
  }
  const double strength = static_cast<double>(k) / o.uncertainty();
  std::vector<double> masses(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    // Clamp roundoff; beliefs near 0 can otherwise scale to -0-ish values.
    double m = o.beliefs()[static_cast<std::size_t>(i)] * strength;
    masses[static_cast<std::size_t>(i)] = m < 0.0 ? 0.0 : m;
  }
  return Evidence(std::move(masses));
}

}  // namespace mvlt
