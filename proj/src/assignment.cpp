#include "selfcorr/assignment.hpp"

namespace selfcorr {

bool is_permutation(const std::vector<Eigen::Index>& perm) {
  std::vector<char> seen(perm.size(), 0);
  for (const Eigen::Index p : perm) {
    if (p < 0 || static_cast<std::size_t>(p) >= perm.size() || seen[static_cast<std::size_t>(p)]) return false;
    seen[static_cast<std::size_t>(p)] = 1;
  }
  return true;
}

}  // namespace selfcorr
