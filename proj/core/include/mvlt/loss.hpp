#pragma once

#include <vector>

#include "mvlt/opinion.hpp"

namespace mvlt {

// Annealing schedule for the KL term: lambda_t = min(1, t / T).
struct LossConfig {
  int anneal_epochs = 10;
  int current_epoch = 0;
};

double lambda_t(const LossConfig& cfg);

// alphas_tilde = y + (1 - y) * alpha; the true-class slot equals 1.
struct AdjustedAlphas {
  std::vector<double> alphas_tilde;
};

AdjustedAlphas adjust_alphas(const DirichletParams& alphas, const std::vector<double>& y);

// sum_k y_k (psi(S) - psi(alpha_k))
double loss_ace(const DirichletParams& alphas, const std::vector<double>& y);

// KL[Dir(alpha_tilde) || Dir(1)]; zero iff all wrong-class alphas equal 1.
double loss_kl(const DirichletParams& alphas, const std::vector<double>& y);

double loss_total(const DirichletParams& alphas, const std::vector<double>& y,
                  const LossConfig& cfg);

// d loss_total / d evidence, through alpha = e + 1.
std::vector<double> loss_grad_evidence(const Evidence& e, const std::vector<double>& y,
                                       const LossConfig& cfg);

}  // namespace mvlt
