#pragma once

#include <vector>

namespace mvlt {

// Per-class nonnegative evidence mass. Length is the class count K >= 2;
// entries are finite and >= 0.
class Evidence {
 public:
  explicit Evidence(std::vector<double> masses);

  int k() const { return static_cast<int>(masses_.size()); }
  double operator[](int i) const { return masses_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& masses() const { return masses_; }

 private:
  std::vector<double> masses_;
};

// alphas[i] = evidence[i] + 1, strength = sum of alphas.
struct DirichletParams {
  std::vector<double> alphas;
  double strength = 0.0;

  int k() const { return static_cast<int>(alphas.size()); }
};

// Subjective-logic triple (b, u, a) with sum(b) + u = 1 within 1e-9.
// u = 0 is representable (the entropy formula is defined there) but cannot
// arise from finite evidence; the maps that require u > 0 reject it.
class Opinion {
 public:
  Opinion(std::vector<double> beliefs, double uncertainty, std::vector<double> base_rates);

  int k() const { return static_cast<int>(beliefs_.size()); }
  const std::vector<double>& beliefs() const { return beliefs_; }
  double uncertainty() const { return uncertainty_; }
  const std::vector<double>& base_rates() const { return base_rates_; }

 private:
  std::vector<double> beliefs_;
  double uncertainty_;
  std::vector<double> base_rates_;
};

// Probability vector P with P_i = b_i + a_i * u.
struct ProjectionProbability {
  std::vector<double> probs;
};

std::vector<double> uniform_base_rates(int k);

// b_i = e_i / S, u = K / S with S = sum(e_i + 1).
Opinion opinion_from_evidence(const Evidence& e, const std::vector<double>& base_rates);

DirichletParams dirichlet_from_evidence(const Evidence& e);

ProjectionProbability project(const Opinion& o);

// Inverse of opinion_from_evidence: S = K/u, e_i = b_i * S. Requires u > 0.
Evidence evidence_from_opinion(const Opinion& o, int k);

}  // namespace mvlt
