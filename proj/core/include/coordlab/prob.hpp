#pragma once

// Exact finite-alphabet probability arithmetic: distributions, channels,
// dense joint tables, entropy/mutual-information functionals, and total
// variation distance. All logarithms are base 2; rates are bits per sample.
//
// Tables are stored dense, row-major with the last axis fastest. Values are
// immutable after construction and safe to share across threads.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace coordlab {

inline constexpr double kMassTol = 1e-12;

// Probability mass function over a finite alphabet.
class Pmf {
 public:
  Pmf(std::vector<double> probs);

  std::size_t size() const { return probs_.size(); }
  double operator()(std::size_t i) const { return probs_[i]; }
  const std::vector<double>& probs() const { return probs_; }

  static Pmf uniform(std::size_t n);
  static Pmf point_mass(std::size_t n, std::size_t at);
  static Pmf bernoulli(double p1);  // P(1) = p1

 private:
  std::vector<double> probs_;
};

// Conditional distribution as a row-stochastic table: rows indexed by the
// input symbol, columns by the output symbol.
class Channel {
 public:
  Channel(std::size_t in_size, std::size_t out_size, std::vector<double> rows);

  std::size_t in_size() const { return in_; }
  std::size_t out_size() const { return out_; }
  // P(out = j | in = i)
  double operator()(std::size_t j, std::size_t i) const { return rows_[i * out_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return {rows_.data() + i * out_, out_};
  }
  const std::vector<double>& rows() const { return rows_; }

  static Channel identity(std::size_t n);
  static Channel constant(std::size_t in_size, const Pmf& out);

 private:
  std::size_t in_, out_;
  std::vector<double> rows_;
};

// k-way joint distribution over a product of finite alphabets, flat
// row-major storage (last axis fastest).
class JointTable {
 public:
  JointTable(std::vector<std::size_t> axis_sizes, std::vector<double> probs);

  std::size_t num_axes() const { return axes_.size(); }
  const std::vector<std::size_t>& axis_sizes() const { return axes_; }
  std::size_t axis_size(std::size_t a) const { return axes_[a]; }
  std::size_t cells() const { return probs_.size(); }
  const std::vector<double>& probs() const { return probs_; }
  double operator[](std::size_t flat) const { return probs_[flat]; }

  double at(std::span<const std::size_t> idx) const;
  std::size_t flat_index(std::span<const std::size_t> idx) const;

  // Product of two independent marginals.
  static JointTable product(const Pmf& a, const Pmf& b);

 private:
  std::vector<std::size_t> axes_;
  std::vector<double> probs_;
};

// ---- Operations ----

// (1/2) sum_i |p_i - q_i|; requires identical axis sizes.
double tv_distance(const JointTable& p, const JointTable& q);

// Shannon entropy in bits, with the convention 0 log 0 = 0.
double entropy(const Pmf& p);
double entropy(const JointTable& p);

// h(t) = -t log2 t - (1-t) log2 (1-t); endpoints map to 0.
double binary_entropy(double t);

// I(A;B) in bits for disjoint axis groups; axes outside group_a+group_b are
// marginalized out first. Tiny negatives (>= -1e-10) clamp to 0.
double mutual_information(const JointTable& p,
                          std::span<const std::size_t> group_a,
                          std::span<const std::size_t> group_b);

// I(A;B|C) in bits; the three groups must be disjoint.
double conditional_mutual_information(const JointTable& p,
                                      std::span<const std::size_t> group_a,
                                      std::span<const std::size_t> group_b,
                                      std::span<const std::size_t> group_c);

// joint(i,j) = m(i) * ch(j|i)
JointTable compose(const Pmf& m, const Channel& ch);

// Sum out every axis not in `keep`; kept axes stay in their original order.
JointTable marginalize(const JointTable& p, std::span<const std::size_t> keep);

// p(x,z,w,y) = q_xz(x,z) * w_given_z(w|z) * y_given_w(y|w);
// realizes the chain X - Z - W - Y.
JointTable markov_chain_joint(const JointTable& q_xz, const Channel& w_given_z,
                              const Channel& y_given_w);

// ---- Extraction helpers ----

Pmf marginal_pmf(const JointTable& p, std::size_t axis);

// Conditional of `out_axis` given `given_axis`, extracted from the pairwise
// marginal. Rows with zero mass are filled uniform.
Channel conditional(const JointTable& p, std::size_t given_axis,
                    std::size_t out_axis);

}  // namespace coordlab
