#pragma once

// Shared helpers for the test suites: deterministic random forms and a few
// frequently used model objects.

#include <random>

#include "symflow/forms.hpp"
#include "symflow/frame.hpp"

namespace symflow::test {

inline Form<double> random_form(std::mt19937& rng, int degree, int max_terms = 4) {
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  const auto& basis = masks_of_degree(degree);
  std::uniform_int_distribution<std::size_t> pick(0, basis.size() - 1);
  std::uniform_int_distribution<int> nterms(1, max_terms);
  Form<double> f(degree);
  const int n = nterms(rng);
  for (int t = 0; t < n; ++t) f.add_term(basis[pick(rng)], coeff(rng));
  return f;
}

inline Vec6 random_vector(std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Vec6 v;
  for (int i = 0; i < 6; ++i) v[i] = d(rng);
  return v;
}

inline Form<double> model_phi() {
  using F = Form<double>;
  return 0.5 * (F::term(1, {1, 3, 5}) + F::term(-1, {1, 4, 6}) + F::term(-1, {2, 4, 5}) + F::term(-1, {2, 3, 6}));
}

inline Form<double> model_phi_hat() {
  using F = Form<double>;
  return 0.5 * (F::term(1, {1, 3, 6}) + F::term(1, {1, 4, 5}) + F::term(1, {2, 3, 5}) + F::term(-1, {2, 4, 6}));
}

}  // namespace symflow::test
