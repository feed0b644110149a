// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#include "synmt/attention.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace synmt;

namespace {

Matrix random_matrix(int r, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = n(rng);
  return m;
}

double gaussian_pdf(double x, double mu, double s2) {
  return std::exp(-(x - mu) * (x - mu) / (2.0 * s2)) / std::sqrt(2.0 * M_PI * s2);
}

}  // namespace

TEST_CASE("gaussian distance matrix values, sigma2=1") {
  Matrix D = gaussian_distance_matrix({2.0, 0.0, 1.0, 3.0}, 4, 1.0);
  // Peak value 1/sqrt(2*pi) at j = p_t.
  CHECK(D(0, 2) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
  // One step away: pdf(1) = exp(-1/2)/sqrt(2*pi).
  CHECK(D(0, 1) == doctest::Approx(0.24197072451914337).epsilon(1e-12));
  CHECK(D(0, 3) == doctest::Approx(0.24197072451914337).epsilon(1e-12));
  CHECK(D(1, 0) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
  for (int t = 0; t < 2; ++t)
    for (int j = 0; j < 4; ++j) CHECK(D(t, j) > 0.0);
}

TEST_CASE("gaussian distance matrix with fractional parent is symmetric about it") {
  Matrix D = gaussian_distance_matrix({4.5, 0, 1, 2, 3, 4, 5, 6, 7, 8}, 10, 4.0);
  for (int k = 0; k <= 4; ++k)
    CHECK(D(0, 4 - k) == doctest::Approx(D(0, 5 + k)).epsilon(1e-14));
  CHECK(D(0, 4) == doctest::Approx(gaussian_pdf(4.0, 4.5, 4.0)).epsilon(1e-12));
}

TEST_CASE("gaussian distance matrix matches the closed form everywhere") {
  std::vector<double> p{0.0, 1.5, 3.0, 2.0};
  for (double s2 : {1.0, 4.0, 9.0, 16.0, 25.0}) {
    Matrix D = gaussian_distance_matrix(p, 4, s2);
    for (int t = 0; t < 4; ++t)
      for (int j = 0; j < 4; ++j)
        CHECK(D(t, j) == doctest::Approx(gaussian_pdf(j, p[t], s2)).epsilon(1e-13));
  }
}

TEST_CASE("larger sigma2 flattens the weighting") {
  Matrix narrow = gaussian_distance_matrix({2.0, 0, 1, 3, 4}, 5, 1.0);
  Matrix wide = gaussian_distance_matrix({2.0, 0, 1, 3, 4}, 5, 25.0);
  CHECK(narrow(0, 2) / narrow(0, 0) > wide(0, 2) / wide(0, 0));
}

TEST_CASE("parent_only matrix: integer and fractional parents") {
  Matrix D = parent_only_matrix({2.0, 1.5, 0.0, 3.0}, 4);
  CHECK(D(0, 2) == doctest::Approx(1.0));
  CHECK(D(0, 0) == doctest::Approx(1e-9));
  CHECK(D(0, 1) == doctest::Approx(1e-9));
  CHECK(D(0, 3) == doctest::Approx(1e-9));
  // Fractional parent splits mass linearly over floor/ceil.
  CHECK(D(1, 1) == doctest::Approx(0.5));
  CHECK(D(1, 2) == doctest::Approx(0.5));
  CHECK(D(1, 0) == doctest::Approx(1e-9));

  Matrix Q = parent_only_matrix({2.25, 0.0, 1.0, 3.0}, 4);
  CHECK(Q(0, 2) == doctest::Approx(0.75));
  CHECK(Q(0, 3) == doctest::Approx(0.25));
}

TEST_CASE("parent_ignore is the identity at inference") {
  std::mt19937_64 rng(11);
  Matrix D = gaussian_distance_matrix({0.0, 1.0, 2.0}, 3, 1.0);
  Matrix out = parent_ignore(D, 1.0, rng, /*training=*/false);
  CHECK((out - D).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("parent_ignore q=0 and q=1 at training") {
  std::mt19937_64 rng(11);
  Matrix D = gaussian_distance_matrix({0.0, 1.0, 2.0}, 3, 1.0);
  Matrix keep = parent_ignore(D, 0.0, rng, true);
  CHECK((keep - D).cwiseAbs().maxCoeff() == 0.0);
  Matrix ones = parent_ignore(D, 1.0, rng, true);
  CHECK((ones.array() - 1.0).abs().maxCoeff() == 0.0);
}

TEST_CASE("parent_ignore resets whole rows at roughly rate q") {
  std::mt19937_64 rng(2024);
  Matrix D = gaussian_distance_matrix({0.0, 1.0, 2.0, 3.0}, 4, 1.0);
  const double q = 0.3;
  int reset = 0, total = 0;
  for (int iter = 0; iter < 2000; ++iter) {
    Matrix out = parent_ignore(D, q, rng, true);
    for (int t = 0; t < 4; ++t) {
      const bool is_ones = (out.row(t).array() - 1.0).abs().maxCoeff() == 0.0;
      const bool is_orig = (out.row(t) - D.row(t)).cwiseAbs().maxCoeff() == 0.0;
      CHECK((is_ones || is_orig));  // rows are all-or-nothing
      reset += is_ones ? 1 : 0;
      ++total;
    }
  }
  const double rate = double(reset) / double(total);
  CHECK(rate == doctest::Approx(q).epsilon(0.1));
}

TEST_CASE("scaled_scores matches Q K^T / sqrt(d)") {
  Tensor Q = Tensor(random_matrix(3, 4, 1));
  Tensor K = Tensor(random_matrix(3, 4, 2));
  Matrix expect = (Q.value() * K.value().transpose()) / 2.0;  // sqrt(4) = 2
  CHECK((scaled_scores(Q, K).value() - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("combine multiply and add") {
  Tensor S = Tensor(random_matrix(3, 3, 3));
  Matrix D = gaussian_distance_matrix({0.0, 1.0, 2.0}, 3, 1.0);
  Matrix mul = combine(S, D, CombineMode::kMultiply).value();
  Matrix add = combine(S, D, CombineMode::kAdd).value();
  CHECK((mul - S.value().cwiseProduct(D)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((add - (S.value() + D)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("multiplying by all-ones D leaves scores bitwise unchanged") {
  Tensor S = Tensor(random_matrix(4, 4, 9));
  Matrix ones = Matrix::Ones(4, 4);
  Matrix out = combine(S, ones, CombineMode::kMultiply).value();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(out(i, j) == S.value()(i, j));
}

TEST_CASE("gradient of multiply-combine w.r.t. scores is D-weighted") {
  // For l = sum(f(S .* D)) the chain rule gives dl/dS = f'(z) .* D; with
  // f = identity-sum this is exactly D.
  Tensor S(random_matrix(3, 3, 21), true);
  Matrix D = gaussian_distance_matrix({0.0, 1.5, 2.0}, 3, 4.0);
  Tensor loss = sum(combine(S, D, CombineMode::kMultiply));
  backward(loss);
  CHECK((S.grad() - D).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("pascal combine passes grad_check") {
  Matrix D = gaussian_distance_matrix({0.0, 1.0, 2.5}, 3, 1.0);
  auto f = [&](Tensor& x) {
    return sum(relu(combine(x, D, CombineMode::kMultiply)));
  };
  Tensor x(random_matrix(3, 3, 33), true);
  CHECK(grad_check(f, x) < 1e-6);
}

TEST_CASE("pascal head reproduces a scalar-arithmetic oracle at T=3") {
  // Identity projections, d_model = heads*d with 1 head, so Q = K = V = X.
  const int T = 3;
  Matrix X(T, 2);
  X << 1.0, 0.0, 0.0, 1.0, 1.0, 1.0;
  HeadWeights w{Tensor(Matrix::Identity(2, 2)),
                Tensor(Matrix::Identity(2, 2)),
                Tensor(Matrix::Identity(2, 2))};
  AttentionConfig cfg;
  cfg.d_model = 2;
  cfg.heads = 1;
  cfg.n_pascal = 1;
  cfg.sigma2 = 1.0;
  std::vector<double> p{1.0, 0.0, 2.0};

  HeadContext ctx;
  Tensor out = pascal_head_forward(Tensor(X), p, cfg, w, ctx);

  // Hand-rolled: S = X X^T / sqrt(2), N = S .* D, rows softmaxed, times X.
  Matrix S = X * X.transpose() / std::sqrt(2.0);
  Matrix D(T, T);
  for (int t = 0; t < T; ++t)
    for (int j = 0; j < T; ++j) D(t, j) = gaussian_pdf(j, p[t], 1.0);
  Matrix N = S.cwiseProduct(D);
  Matrix A(T, T);
  for (int t = 0; t < T; ++t) {
    double mx = N.row(t).maxCoeff(), z = 0.0;
    for (int j = 0; j < T; ++j) z += std::exp(N(t, j) - mx);
    for (int j = 0; j < T; ++j) A(t, j) = std::exp(N(t, j) - mx) / z;
  }
  Matrix expect = A * X;
  CHECK((out.value() - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pascal weighting adds no parameters and rows stay stochastic") {
  const int T = 5, d = 4;
  Matrix X = random_matrix(T, d, 7);
  HeadWeights w{Tensor(random_matrix(d, d, 8), true), Tensor(random_matrix(d, d, 9), true),
                Tensor(random_matrix(d, d, 10), true)};
  AttentionConfig cfg;
  cfg.d_model = d;
  cfg.heads = 1;
  cfg.n_pascal = 1;
  cfg.sigma2 = 4.0;
  std::vector<double> p{0.0, 2.0, 2.0, 1.5, 4.0};

  HeadContext ctx;
  // Same weight count as a standard head: wq, wk, wv only (checked by type).
  Tensor std_out = standard_head_forward(Tensor(X), w, ctx);
  Tensor pas_out = pascal_head_forward(Tensor(X), p, cfg, w, ctx);
  CHECK(std_out.value().rows() == pas_out.value().rows());
  CHECK(std_out.value().cols() == pas_out.value().cols());
  // Weighting changes the output (p is informative here).
  CHECK((std_out.value() - pas_out.value()).cwiseAbs().maxCoeff() > 1e-8);
}

TEST_CASE("pascal head with q=1 at training equals the standard head bitwise") {
  const int T = 4, d = 4;
  Matrix X = random_matrix(T, d, 70);
  HeadWeights w{Tensor(random_matrix(d, d, 71)), Tensor(random_matrix(d, d, 72)),
                Tensor(random_matrix(d, d, 73))};
  AttentionConfig cfg;
  cfg.d_model = d;
  cfg.heads = 1;
  cfg.n_pascal = 1;
  cfg.parent_ignore_q = 1.0;
  std::vector<double> p{0.0, 0.0, 1.0, 2.0};

  std::mt19937_64 rng(5);
  HeadContext ctx;
  ctx.training = true;
  ctx.rng = &rng;
  Tensor pas = pascal_head_forward(Tensor(X), p, cfg, w, ctx);
  Tensor std_out = standard_head_forward(Tensor(X), w, ctx);
  for (int i = 0; i < T; ++i)
    for (int j = 0; j < d; ++j) CHECK(pas.value()(i, j) == std_out.value()(i, j));
}

TEST_CASE("pascal head backward passes grad_check through the whole head") {
  const int T = 3, d = 2;
  AttentionConfig cfg;
  cfg.d_model = d;
  cfg.heads = 1;
  cfg.n_pascal = 1;
  cfg.sigma2 = 2.0;
  std::vector<double> p{0.0, 1.0, 1.0};
  HeadWeights w{Tensor(random_matrix(d, d, 41)), Tensor(random_matrix(d, d, 42)),
                Tensor(random_matrix(d, d, 43))};
  HeadContext ctx;
  auto f = [&](Tensor& x) { return sum(pascal_head_forward(x, p, cfg, w, ctx)); };
  Tensor x(random_matrix(T, d, 44), true);
  CHECK(grad_check(f, x) < 1e-6);
}

TEST_CASE("lisa head: uniform attention over 4 columns gives parse loss ln 4") {
  const int T = 4, d = 3;
  // Zero FF weights with zero bias make every biaffine score 0 -> uniform rows.
  Matrix X = random_matrix(T, d, 50);
  HeadWeights w{Tensor(random_matrix(d, d, 51)), Tensor(random_matrix(d, d, 52)),
                Tensor(random_matrix(d, d, 53))};
  BiaffineWeights bw{Tensor(Matrix::Zero(d, d)), Tensor(Matrix::Zero(1, d)),
                     Tensor(Matrix::Zero(d, d)), Tensor(Matrix::Zero(1, d)),
                     Tensor(Matrix::Identity(d, d))};
  std::vector<int> parent{0, 2, 1, 3};
  HeadContext ctx;
  auto res = lisa_head_forward(Tensor(X), parent, w, bw, ctx);
  CHECK(res.parse_loss.value()(0, 0) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("lisa parse loss drops when the bilinear scorer favors true parents") {
  const int T = 3, d = 3;
  // One-hot rows make FF outputs  pick out coordinates; bilinear = I gives
  // score X_t . X_j, highest at the designated parent below.
  Matrix X(T, d);
  X << 1, 0, 0, 0, 1, 0, 0, 0, 1;
  HeadWeights w{Tensor(Matrix::Identity(d, d)), Tensor(Matrix::Identity(d, d)),
                Tensor(Matrix::Identity(d, d))};
  BiaffineWeights bw{Tensor(Matrix::Identity(d, d) * 3.0),
                     Tensor(Matrix::Zero(1, d)),
                     Tensor(Matrix::Identity(d, d) * 3.0),
                     Tensor(Matrix::Zero(1, d)),
                     Tensor(Matrix::Identity(d, d))};
  std::vector<int> self_parent{0, 1, 2};  // diagonal is the largest score
  std::vector<int> wrong_parent{1, 2, 0};
  HeadContext ctx;
  auto good = lisa_head_forward(Tensor(X), self_parent, w, bw, ctx);
  auto bad = lisa_head_forward(Tensor(X), wrong_parent, w, bw, ctx);
  CHECK(good.parse_loss.value()(0, 0) < bad.parse_loss.value()(0, 0));
}

TEST_CASE("lisa head backward passes grad_check") {
  const int T = 3, d = 2;
  HeadWeights w{Tensor(random_matrix(d, d, 61)), Tensor(random_matrix(d, d, 62)),
                Tensor(random_matrix(d, d, 63))};
  BiaffineWeights bw{Tensor(random_matrix(d, d, 64)),
                     Tensor(random_matrix(1, d, 65)),
                     Tensor(random_matrix(d, d, 66)),
                     Tensor(random_matrix(1, d, 67)),
                     Tensor(random_matrix(d, d, 68))};
  std::vector<int> parent{1, 0, 2};
  HeadContext ctx;
  auto f = [&](Tensor& x) {
    auto r = lisa_head_forward(x, parent, w, bw, ctx);
    return add(sum(r.output), r.parse_loss);
  };
  Tensor x(random_matrix(T, d, 69), true);
  CHECK(grad_check(f, x) < 1e-6);
}

TEST_CASE("attention config validation") {
  AttentionConfig c;
  c.d_model = 6;
  c.heads = 4;  // 6 % 4 != 0
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.d_model = 8;
  c.n_pascal = 5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.n_pascal = 2;
  c.sigma2 = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.sigma2 = 1.0;
  c.parent_ignore_q = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.parent_ignore_q = 0.1;
  CHECK_NOTHROW(c.validate());
}
