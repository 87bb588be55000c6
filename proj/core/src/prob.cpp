#include "coordlab/prob.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace coordlab {

namespace {

void check_mass(const std::vector<double>& v, const char* what) {
  double total = 0.0;
  for (double x : v) {
    if (!(x >= 0.0)) {
      throw std::invalid_argument(std::string(what) + ": negative entry");
    }
    total += x;
  }
  if (std::abs(total - 1.0) > kMassTol) {
    throw std::invalid_argument(std::string(what) + ": mass " +
                                std::to_string(total) + " != 1");
  }
}

double plogp_bits(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

}  // namespace

Pmf::Pmf(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("Pmf: empty alphabet");
  check_mass(probs_, "Pmf");
}

Pmf Pmf::uniform(std::size_t n) {
  return Pmf(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Pmf Pmf::point_mass(std::size_t n, std::size_t at) {
  std::vector<double> v(n, 0.0);
  v.at(at) = 1.0;
  return Pmf(std::move(v));
}

Pmf Pmf::bernoulli(double p1) {
  if (!(p1 >= 0.0 && p1 <= 1.0)) {
    throw std::invalid_argument("Pmf::bernoulli: p outside [0,1]");
  }
  return Pmf({1.0 - p1, p1});
}

Channel::Channel(std::size_t in_size, std::size_t out_size,
                 std::vector<double> rows)
    : in_(in_size), out_(out_size), rows_(std::move(rows)) {
  if (in_ == 0 || out_ == 0) throw std::invalid_argument("Channel: empty alphabet");
  if (rows_.size() != in_ * out_) {
    throw std::invalid_argument("Channel: table size mismatch");
  }
  for (std::size_t i = 0; i < in_; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < out_; ++j) {
      double x = rows_[i * out_ + j];
      if (!(x >= 0.0)) throw std::invalid_argument("Channel: negative entry");
      total += x;
    }
    if (std::abs(total - 1.0) > kMassTol) {
      throw std::invalid_argument("Channel: row " + std::to_string(i) +
                                  " sums to " + std::to_string(total));
    }
  }
}

Channel Channel::identity(std::size_t n) {
  std::vector<double> rows(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) rows[i * n + i] = 1.0;
  return Channel(n, n, std::move(rows));
}

Channel Channel::constant(std::size_t in_size, const Pmf& out) {
  std::vector<double> rows;
  rows.reserve(in_size * out.size());
  for (std::size_t i = 0; i < in_size; ++i) {
    rows.insert(rows.end(), out.probs().begin(), out.probs().end());
  }
  return Channel(in_size, out.size(), std::move(rows));
}

JointTable::JointTable(std::vector<std::size_t> axis_sizes,
                       std::vector<double> probs)
    : axes_(std::move(axis_sizes)), probs_(std::move(probs)) {
  if (axes_.empty()) throw std::invalid_argument("JointTable: no axes");
  std::size_t n = 1;
  for (std::size_t s : axes_) {
    if (s == 0) throw std::invalid_argument("JointTable: zero axis size");
    n *= s;
  }
  if (probs_.size() != n) {
    throw std::invalid_argument("JointTable: flat size mismatch");
  }
  check_mass(probs_, "JointTable");
}

std::size_t JointTable::flat_index(std::span<const std::size_t> idx) const {
  if (idx.size() != axes_.size()) {
    throw std::invalid_argument("JointTable: index arity mismatch");
  }
  std::size_t flat = 0;
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    if (idx[a] >= axes_[a]) throw std::out_of_range("JointTable: index");
    flat = flat * axes_[a] + idx[a];
  }
  return flat;
}

double JointTable::at(std::span<const std::size_t> idx) const {
  return probs_[flat_index(idx)];
}

JointTable JointTable::product(const Pmf& a, const Pmf& b) {
  std::vector<double> v;
  v.reserve(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) v.push_back(a(i) * b(j));
  return JointTable({a.size(), b.size()}, std::move(v));
}

double tv_distance(const JointTable& p, const JointTable& q) {
  if (p.axis_sizes() != q.axis_sizes()) {
    throw std::invalid_argument("tv_distance: incompatible alphabets");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < p.cells(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

double entropy(const Pmf& p) {
  double h = 0.0;
  for (double x : p.probs()) h += plogp_bits(x);
  return h;
}

double entropy(const JointTable& p) {
  double h = 0.0;
  for (double x : p.probs()) h += plogp_bits(x);
  return h;
}

double binary_entropy(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::domain_error("binary_entropy: argument outside [0,1]");
  }
  return plogp_bits(t) + plogp_bits(1.0 - t);
}

namespace {

std::vector<std::size_t> concat(std::span<const std::size_t> a,
                                std::span<const std::size_t> b) {
  std::vector<std::size_t> v(a.begin(), a.end());
  v.insert(v.end(), b.begin(), b.end());
  return v;
}

void check_disjoint(std::span<const std::size_t> a,
                    std::span<const std::size_t> b, const char* what) {
  for (std::size_t x : a)
    for (std::size_t y : b)
      if (x == y) throw std::invalid_argument(std::string(what) + ": overlapping axis groups");
}

double clamp_mi(double v) { return (v < 0.0 && v >= -1e-10) ? 0.0 : v; }

}  // namespace

double mutual_information(const JointTable& p,
                          std::span<const std::size_t> group_a,
                          std::span<const std::size_t> group_b) {
  check_disjoint(group_a, group_b, "mutual_information");
  auto ab = concat(group_a, group_b);
  JointTable pab = marginalize(p, ab);
  JointTable pa = marginalize(p, group_a);
  JointTable pb = marginalize(p, group_b);
  return clamp_mi(entropy(pa) + entropy(pb) - entropy(pab));
}

double conditional_mutual_information(const JointTable& p,
                                      std::span<const std::size_t> group_a,
                                      std::span<const std::size_t> group_b,
                                      std::span<const std::size_t> group_c) {
  check_disjoint(group_a, group_b, "conditional_mutual_information");
  check_disjoint(group_a, group_c, "conditional_mutual_information");
  check_disjoint(group_b, group_c, "conditional_mutual_information");
  auto ac = concat(group_a, group_c);
  auto bc = concat(group_b, group_c);
  auto abc = concat(concat(group_a, group_b), group_c);
  double h_ac = entropy(marginalize(p, ac));
  double h_bc = entropy(marginalize(p, bc));
  double h_abc = entropy(marginalize(p, abc));
  double h_c = entropy(marginalize(p, group_c));
  return clamp_mi(h_ac + h_bc - h_abc - h_c);
}

JointTable compose(const Pmf& m, const Channel& ch) {
  if (m.size() != ch.in_size()) {
    throw std::invalid_argument("compose: alphabet size mismatch");
  }
  std::vector<double> v(m.size() * ch.out_size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < ch.out_size(); ++j)
      v[i * ch.out_size() + j] = m(i) * ch(j, i);
  return JointTable({m.size(), ch.out_size()}, std::move(v));
}

JointTable marginalize(const JointTable& p, std::span<const std::size_t> keep) {
  if (keep.empty()) throw std::invalid_argument("marginalize: empty keep set");
  const auto& axes = p.axis_sizes();
  for (std::size_t a : keep)
    if (a >= axes.size()) throw std::invalid_argument("marginalize: axis out of range");

  std::vector<std::size_t> out_axes;
  out_axes.reserve(keep.size());
  for (std::size_t a : keep) out_axes.push_back(axes[a]);
  std::size_t out_cells = 1;
  for (std::size_t s : out_axes) out_cells *= s;

  // Stride of each input axis in the flat input, and the stride its digit
  // contributes to the output index (0 if summed out).
  std::vector<std::size_t> in_stride(axes.size(), 1);
  for (std::size_t a = axes.size(); a-- > 1;) {
    in_stride[a - 1] = in_stride[a] * axes[a];
  }
  std::vector<std::size_t> out_stride(axes.size(), 0);
  {
    std::size_t s = 1;
    for (std::size_t k = keep.size(); k-- > 0;) {
      out_stride[keep[k]] = s;
      s *= axes[keep[k]];
    }
  }

  std::vector<double> out(out_cells, 0.0);
  std::vector<std::size_t> digit(axes.size(), 0);
  std::size_t out_idx = 0;
  for (std::size_t flat = 0; flat < p.cells(); ++flat) {
    out[out_idx] += p[flat];
    // increment mixed-radix counter, maintaining out_idx incrementally
    for (std::size_t a = axes.size(); a-- > 0;) {
      out_idx += out_stride[a];
      if (++digit[a] < axes[a]) break;
      digit[a] = 0;
      out_idx -= out_stride[a] * axes[a];
    }
  }
  return JointTable(std::move(out_axes), std::move(out));
}

JointTable markov_chain_joint(const JointTable& q_xz, const Channel& w_given_z,
                              const Channel& y_given_w) {
  if (q_xz.num_axes() != 2) {
    throw std::invalid_argument("markov_chain_joint: q_xz must be 2-way");
  }
  std::size_t nx = q_xz.axis_size(0), nz = q_xz.axis_size(1);
  if (w_given_z.in_size() != nz || y_given_w.in_size() != w_given_z.out_size()) {
    throw std::invalid_argument("markov_chain_joint: chain-incompatible sizes");
  }
  std::size_t nw = w_given_z.out_size(), ny = y_given_w.out_size();
  std::vector<double> v(nx * nz * nw * ny);
  std::size_t flat = 0;
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t z = 0; z < nz; ++z) {
      double qxz = q_xz[x * nz + z];
      for (std::size_t w = 0; w < nw; ++w) {
        double a = qxz * w_given_z(w, z);
        for (std::size_t y = 0; y < ny; ++y) v[flat++] = a * y_given_w(y, w);
      }
    }
  return JointTable({nx, nz, nw, ny}, std::move(v));
}

Pmf marginal_pmf(const JointTable& p, std::size_t axis) {
  std::size_t keep[] = {axis};
  JointTable m = marginalize(p, keep);
  std::vector<double> v = m.probs();
  // guard against accumulated rounding
  double total = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x /= total;
  return Pmf(std::move(v));
}

Channel conditional(const JointTable& p, std::size_t given_axis,
                    std::size_t out_axis) {
  std::size_t keep[] = {given_axis, out_axis};
  JointTable m = marginalize(p, keep);
  std::size_t ni = m.axis_size(0), no = m.axis_size(1);
  std::vector<double> rows(ni * no);
  for (std::size_t i = 0; i < ni; ++i) {
    double mass = 0.0;
    for (std::size_t j = 0; j < no; ++j) mass += m[i * no + j];
    for (std::size_t j = 0; j < no; ++j) {
      rows[i * no + j] = mass > 0.0 ? m[i * no + j] / mass : 1.0 / static_cast<double>(no);
    }
  }
  return Channel(ni, no, std::move(rows));
}

}  // namespace coordlab
