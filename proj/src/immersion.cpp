#include "lmcf/immersion.hpp"

#include <string>

#include "lmcf/errors.hpp"

namespace lmcf {

GridTopology::GridTopology(std::vector<int> resolution) {
  if (resolution.empty() || resolution.size() > 2)
    throw InvalidImmersion("grid: intrinsic dimension must be 1 or 2");
  for (int n : resolution)
    if (n < kMinResolution)
      throw InvalidImmersion("grid: resolution must be >= " + std::to_string(kMinResolution));
  dim_ = static_cast<int>(resolution.size());
  n_ = {resolution[0], dim_ == 2 ? resolution[1] : 1};
  count_ = n_[0] * n_[1];
}

double GridTopology::cell_volume() const {
  double v = spacing(0);
  if (dim_ == 2) v *= spacing(1);
  return v;
}

GridTopology::Neighbor GridTopology::shift(int node, int d0, int d1) const {
  const auto ij = multi_index(node);
  auto wrap = [](int i, int d, int n, int& count) {
    int k = i + d;
    count = 0;
    while (k >= n) {
      k -= n;
      ++count;
    }
    while (k < 0) {
      k += n;
      --count;
    }
    return k;
  };
  Neighbor out{};
  const int i0 = wrap(ij[0], d0, n_[0], out.wraps[0]);
  const int i1 = dim_ == 2 ? wrap(ij[1], d1, n_[1], out.wraps[1]) : 0;
  out.node = index(i0, i1);
  return out;
}

Immersion::Immersion(std::shared_ptr<const AmbientSpace> space, GridTopology topology,
                     Eigen::MatrixXd coords, std::vector<AmbVec> wraps, double time)
    : space_(std::move(space)),
      topology_(std::move(topology)),
      coords_(std::move(coords)),
      wraps_(std::move(wraps)),
      time_(time) {
  if (!space_) throw InvalidImmersion("immersion: missing ambient space");
  const int d = space_->real_dim();
  if (topology_.dim() != space_->complex_dim())
    throw InvalidImmersion("immersion: Lagrangian dimension must equal the ambient complex dimension");
  if (coords_.rows() != d || coords_.cols() != topology_.node_count())
    throw InvalidImmersion("immersion: coordinate array has the wrong shape");
  if (wraps_.empty()) wraps_.assign(static_cast<std::size_t>(topology_.dim()), AmbVec::Zero(d));
  if (static_cast<int>(wraps_.size()) != topology_.dim())
    throw InvalidImmersion("immersion: need one deck translation per parameter axis");
  for (const AmbVec& w : wraps_)
    if (!space_->is_deck_translation(w))
      throw InvalidImmersion("immersion: wrap offset is not a deck translation of " + space_->name());
}

AmbVec Immersion::shifted_point(int node, int d0, int d1) const {
  const auto nb = topology_.shift(node, d0, d1);
  AmbVec p = coords_.col(nb.node);
  if (nb.wraps[0] != 0) p += nb.wraps[0] * wraps_[0];
  if (topology_.dim() == 2 && nb.wraps[1] != 0) p += nb.wraps[1] * wraps_[1];
  return p;
}

Immersion Immersion::with_coords(Eigen::MatrixXd coords, double time) const {
  return Immersion(space_, topology_, std::move(coords), wraps_, time);
}

Immersion Immersion::with_time(double time) const {
  return Immersion(space_, topology_, coords_, wraps_, time);
}

}  // namespace lmcf
