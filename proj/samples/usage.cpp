// Small tour of the library: dimension of a restricted Boltzmann machine, a
// defective mixture, and a tropical lower bound from a ball slicing.
#include <iostream>

#include "krondim/codes.hpp"
#include "krondim/dimension.hpp"
#include "krondim/tropical.hpp"

int main() {
  using namespace krondim;

  const auto rbm = rbm_spec(4, 2);
  const auto r = generic_dim(rbm, 3, 0);
  std::cout << "RBM(4,2): expected " << expected_dim(rbm) << ", generic " << r.dim << ", failure bound "
            << to_string(r.certificate.failure_bound) << '\n';

  const auto mix = mixture_spec(binary_independence(4), 3);
  std::cout << "3-mixture of 4 binary variables: expected " << expected_dim(mix) << ", generic "
            << generic_dim(mix).dim << '\n';

  // Two radius-1 balls around 0000 and 1111 give tropical rank 2 * 5.
  const StateSpace space = StateSpace::binary(4);
  const auto two = mixture_spec(binary_independence(4), 2);
  const auto code = greedy_pack(space, 1, 2);
  const auto rep = construct_ball_slicing(two, code.centers());
  std::cout << "ball slicing: tropical dim " << rep.dim() << " (predicted " << rep.predicted_dim() << ")\n";
  for (std::size_t y = 0; y < rep.blocks.size(); ++y) {
    std::cout << "  block " << y << ':';
    for (auto x : rep.blocks[y]) std::cout << ' ' << space.label(space.state(x));
    std::cout << '\n';
  }
  return 0;
}
