#include "mvlt/loss.hpp"

#include <cmath>
#include <stdexcept>

#include "mvlt/special_functions.hpp"

namespace mvlt {
namespace {

void check_one_hot(const std::vector<double>& y, int k) {
  if (static_cast<int>(y.size()) != k) {
    throw std::invalid_argument("label length differs from class count");
  }
  int ones = 0;
  for (double v : y) {
    if (v == 1.0) {
      ++ones;
    } else if (v != 0.0) {
      throw std::invalid_argument("label vector must be one-hot");
    }
  }
  if (ones != 1) throw std::invalid_argument("label vector must have exactly one 1");
}

void check_alphas(const DirichletParams& alphas) {
  if (alphas.k() < 2) throw std::invalid_argument("alphas need at least 2 classes");
  double sum = 0.0;
  for (double a : alphas.alphas) {
    if (!std::isfinite(a) || a < 1.0) {
      throw std::invalid_argument("alpha components must be finite and >= 1");
    }
    sum += a;
  }
  if (std::abs(sum - alphas.strength) > 1e-12 * std::max(1.0, std::abs(sum))) {
    throw std::invalid_argument("alpha strength does not match component sum");
  }
}

}  // namespace

double lambda_t(const LossConfig& cfg) {
  if (cfg.anneal_epochs <= 0) throw std::invalid_argument("anneal epochs must be positive");
  if (cfg.current_epoch < 0) throw std::invalid_argument("epoch must be nonnegative");
  return std::min(1.0, static_cast<double>(cfg.current_epoch) /
                           static_cast<double>(cfg.anneal_epochs));
}

AdjustedAlphas adjust_alphas(const DirichletParams& alphas, const std::vector<double>& y) {
  check_alphas(alphas);
  check_one_hot(y, alphas.k());
  AdjustedAlphas adjusted;
  adjusted.alphas_tilde.resize(alphas.alphas.size());
  for (std::size_t i = 0; i < alphas.alphas.size(); ++i) {
    adjusted.alphas_tilde[i] = y[i] + (1.0 - y[i]) * alphas.alphas[i];
  }
  return adjusted;
}

double loss_ace(const DirichletParams& alphas, const std::vector<double>& y) {
  check_alphas(alphas);
  check_one_hot(y, alphas.k());
  const double psi_s = digamma(alphas.strength);
  double loss = 0.0;
  for (std::size_t i = 0; i < alphas.alphas.size(); ++i) {
    if (y[i] != 0.0) loss += y[i] * (psi_s - digamma(alphas.alphas[i]));
  }
  return loss;
}

double loss_kl(const DirichletParams& alphas, const std::vector<double>& y) {
  const AdjustedAlphas adjusted = adjust_alphas(alphas, y);
  const int k = alphas.k();
  double tilde_sum = 0.0;
  for (double a : adjusted.alphas_tilde) tilde_sum += a;

  double kl = log_gamma(tilde_sum) - log_gamma(static_cast<double>(k));
  const double psi_sum = digamma(tilde_sum);
  for (double a : adjusted.alphas_tilde) {
    kl -= log_gamma(a);
    kl += (a - 1.0) * (digamma(a) - psi_sum);
  }
  // Roundoff can leave a tiny negative residue at the KL minimum.
  return kl < 0.0 ? 0.0 : kl;
}

double loss_total(const DirichletParams& alphas, const std::vector<double>& y,
                  const LossConfig& cfg) {
  return loss_ace(alphas, y) + lambda_t(cfg) * loss_kl(alphas, y);
}

std::vector<double> loss_grad_evidence(const Evidence& e, const std::vector<double>& y,
                                       const LossConfig& cfg) {
  const int k = e.k();
  check_one_hot(y, k);
  const double lam = lambda_t(cfg);

  double strength = 0.0;
  for (int i = 0; i < k; ++i) strength += e[i] + 1.0;
  const double psi1_s = trigamma(strength);

  // Wrong-class slots of alpha_tilde follow alpha; the true-class slot is
  // constant 1, so only wrong classes carry a KL gradient.
  double tilde_sum = 0.0;
  for (int i = 0; i < k; ++i) {
    tilde_sum += y[static_cast<std::size_t>(i)] == 1.0 ? 1.0 : e[i] + 1.0;
  }
  const double psi1_tilde_sum = trigamma(tilde_sum);

  std::vector<double> grad(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const double alpha = e[i] + 1.0;
    const bool is_true = y[static_cast<std::size_t>(i)] == 1.0;
    double g = psi1_s - (is_true ? trigamma(alpha) : 0.0);
    if (!is_true && lam != 0.0) {
      g += lam * ((alpha - 1.0) * trigamma(alpha) - psi1_tilde_sum * (tilde_sum - k));
    }
    grad[static_cast<std::size_t>(i)] = g;
  }
  return grad;
}

}  // namespace mvlt
