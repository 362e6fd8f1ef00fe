// Loss tests. Expected values come from independent hand evaluation
// (exponential sums, the softplus identity) and every gradient is checked
// against central finite differences.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "miaug/gradcheck.hpp"
#include "miaug/losses.hpp"
#include "miaug/rng.hpp"

using namespace miaug;

namespace {

Matrix random_matrix(int rows, int cols, RngStream& rng) {
  Matrix m(rows, cols);
  rng.fill_gaussian(m.data());
  return m;
}

}  // namespace

TEST_CASE("cross_entropy uniform logits give ln K") {
  Matrix logits(3, 4);  // all zeros
  std::vector<int> labels{0, 1, 3};
  CrossEntropyOut out = cross_entropy(logits, labels);
  CHECK(out.value == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("cross_entropy large margin drives loss to zero") {
  Matrix logits(1, 3);
  logits(0, 1) = 60.0;
  std::vector<int> labels{1};
  CrossEntropyOut out = cross_entropy(logits, labels);
  CHECK(out.value < 1e-12);
}

TEST_CASE("cross_entropy hand case [[1,2,3]] label 2") {
  Matrix logits(1, 3, Vec{1.0, 2.0, 3.0});
  std::vector<int> labels{2};
  CrossEntropyOut out = cross_entropy(logits, labels);
  // -log softmax = lse(1,2,3) - 3, evaluated directly.
  const double expected = std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0)) - 3.0;
  CHECK(out.value == doctest::Approx(expected).epsilon(1e-14));
  CHECK(out.value == doctest::Approx(0.40761).epsilon(1e-4));
}

TEST_CASE("cross_entropy rejects out-of-range labels") {
  Matrix logits(2, 3);
  std::vector<int> labels{0, 3};
  CHECK_THROWS_AS(cross_entropy(logits, labels), Error);
  labels = {0, -1};
  CHECK_THROWS_AS(cross_entropy(logits, labels), Error);
}

TEST_CASE("cross_entropy gradient passes finite differences") {
  RngStream rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const int batch = 2 + trial;
    const int num_classes = 3 + (trial % 2);
    Matrix logits = random_matrix(batch, num_classes, rng);
    std::vector<int> labels(batch);
    for (int i = 0; i < batch; ++i) labels[i] = rng.uniform_int(num_classes);

    CrossEntropyOut out = cross_entropy(logits, labels);
    auto loss_fn = [&](const Vec& flat) {
      Matrix probe(batch, num_classes, flat);
      return cross_entropy(probe, labels).value;
    };
    GradCheckResult res = grad_check(loss_fn, logits.data(), out.d_logits.data());
    CHECK(res.max_rel_err < 1e-6);
  }
}

TEST_CASE("contrastive_alignment orthonormal B=2 case") {
  Matrix t(2, 2, Vec{1.0, 0.0, 0.0, 1.0});
  ContrastiveOut out = contrastive_alignment(t, t, 1.0);
  // Similarity matrix is the identity: loss = -log(e / (e + 1)).
  const double expected = -std::log(std::exp(1.0) / (std::exp(1.0) + 1.0));
  CHECK(out.value == doctest::Approx(expected).epsilon(1e-14));
  CHECK(out.value == doctest::Approx(0.31326).epsilon(1e-4));
}

TEST_CASE("contrastive_alignment saturates to zero at perfect separation") {
  // Matched pairs have cosine +1, mismatched -1.
  Matrix t(2, 2, Vec{1.0, 0.0, -1.0, 0.0});
  ContrastiveOut out = contrastive_alignment(t, t, 0.02);
  CHECK(out.value < 1e-12);
}

TEST_CASE("contrastive_alignment invariant under joint row permutation") {
  RngStream rng(31);
  const int batch = 6, dim = 5;
  Matrix t = random_matrix(batch, dim, rng);
  Matrix h = random_matrix(batch, dim, rng);
  const double base = contrastive_alignment(t, h, 0.2).value;

  std::vector<int> perm(batch);
  for (int i = 0; i < batch; ++i) perm[i] = i;
  for (int trial = 0; trial < 5; ++trial) {
    rng.shuffle(perm);
    Matrix tp(batch, dim), hp(batch, dim);
    for (int i = 0; i < batch; ++i) {
      tp.set_row(i, t.row(perm[i]));
      hp.set_row(i, h.row(perm[i]));
    }
    CHECK(contrastive_alignment(tp, hp, 0.2).value == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("contrastive_alignment rejects zero-norm rows with the row index") {
  Matrix t(2, 2, Vec{1.0, 0.0, 0.0, 0.0});
  Matrix h(2, 2, Vec{1.0, 0.0, 0.0, 1.0});
  try {
    contrastive_alignment(t, h, 1.0);
    FAIL("expected zero-norm rejection");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }
}

TEST_CASE("contrastive_alignment rejects batch of one") {
  Matrix t(1, 3, Vec{1.0, 0.0, 0.0});
  CHECK_THROWS_AS(contrastive_alignment(t, t, 1.0), Error);
}

TEST_CASE("contrastive gradients pass finite differences") {
  RngStream rng(41);
  for (int batch : {2, 4, 8}) {
    for (int dim : {3, 5}) {
      Matrix t = random_matrix(batch, dim, rng);
      Matrix h = random_matrix(batch, dim, rng);
      for (bool symmetric : {false, true}) {
        ContrastiveOut out = contrastive_alignment(t, h, 0.2, symmetric);
        auto loss_of_t = [&](const Vec& flat) {
          Matrix probe(batch, dim, flat);
          return contrastive_alignment(probe, h, 0.2, symmetric).value;
        };
        auto loss_of_h = [&](const Vec& flat) {
          Matrix probe(batch, dim, flat);
          return contrastive_alignment(t, probe, 0.2, symmetric).value;
        };
        CHECK(grad_check(loss_of_t, t.data(), out.d_anchor.data()).max_rel_err < 1e-4);
        CHECK(grad_check(loss_of_h, h.data(), out.d_candidate.data()).max_rel_err < 1e-4);
      }
    }
  }
}

TEST_CASE("infonce on independent inputs concentrates near log B") {
  RngStream rng(51);
  const int batch = 8;
  double total = 0.0;
  const int trials = 150;
  for (int i = 0; i < trials; ++i) {
    Matrix t = random_matrix(batch, 6, rng);
    Matrix that = random_matrix(batch, 6, rng);
    total += infonce(t, that, 1.0).value;
  }
  const double mean = total / trials;
  CHECK(mean == doctest::Approx(std::log(static_cast<double>(batch))).epsilon(0.1));
  // So the MI bound is near zero.
  CHECK(std::abs(std::log(static_cast<double>(batch)) - mean) < 0.2);
}

TEST_CASE("infonce at perfect retrieval") {
  RngStream rng(61);
  Matrix t = random_matrix(4, 16, rng);
  InfoNceOut out = infonce(t, t, 0.07);
  CHECK(out.value < 0.01);
  CHECK(out.mi_lower_bound == doctest::Approx(std::log(4.0)).epsilon(0.01));
}

TEST_CASE("infonce value nonnegative, bound at most log B") {
  RngStream rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    const int batch = 2 + rng.uniform_int(7);
    Matrix t = random_matrix(batch, 4, rng);
    Matrix that = random_matrix(batch, 4, rng);
    InfoNceOut out = infonce(t, that, 0.1 + rng.uniform());
    CHECK(out.value >= 0.0);
    CHECK(out.mi_lower_bound <= std::log(static_cast<double>(batch)) + 1e-12);
  }
}

TEST_CASE("infonce B=2 analytic case matches contrastive") {
  Matrix t(2, 2, Vec{1.0, 0.0, 0.0, 1.0});
  InfoNceOut out = infonce(t, t, 1.0);
  CHECK(out.value == doctest::Approx(0.31326).epsilon(1e-4));
  CHECK(out.mi_lower_bound == doctest::Approx(std::log(2.0) - out.value).epsilon(1e-14));
}

TEST_CASE("gan losses at zero logits hit the shared sigma=1/2 point") {
  Vec zeros{0.0, 0.0, 0.0};
  GanDLossOut d = gan_d_loss(zeros, zeros);
  GanGLossOut g = gan_g_loss(zeros);
  CHECK(d.value == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-14));
  CHECK(g.value == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  // Shared point identity, exact.
  CHECK(d.value == 2.0 * g.value);
}

TEST_CASE("gan losses vanish at extreme margins") {
  Vec real{50.0};
  Vec fake{-50.0};
  CHECK(gan_d_loss(real, fake).value < 1e-12);
  Vec good_fake{50.0};
  CHECK(gan_g_loss(good_fake).value < 1e-12);
}

TEST_CASE("gan losses softplus identities") {
  Vec real{1.0};
  Vec fake{-1.0};
  auto sp = [](double x) { return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0); };
  CHECK(gan_d_loss(real, fake).value == doctest::Approx(2.0 * sp(-1.0)).epsilon(1e-14));
  CHECK(gan_d_loss(real, fake).value == doctest::Approx(0.62652).epsilon(1e-4));
  CHECK(gan_g_loss(fake).value == doctest::Approx(sp(1.0)).epsilon(1e-14));
  CHECK(gan_g_loss(fake).value == doctest::Approx(1.31326).epsilon(1e-4));
}

TEST_CASE("gan loss gradients pass finite differences") {
  RngStream rng(81);
  for (int trial = 0; trial < 5; ++trial) {
    const int batch = 2 + trial;
    Vec real(batch), fake(batch);
    rng.fill_gaussian(real);
    rng.fill_gaussian(fake);

    GanDLossOut d = gan_d_loss(real, fake);
    auto d_of_real = [&](const Vec& r) { return gan_d_loss(r, fake).value; };
    auto d_of_fake = [&](const Vec& f) { return gan_d_loss(real, f).value; };
    CHECK(grad_check(d_of_real, real, d.d_real).max_rel_err < 1e-6);
    CHECK(grad_check(d_of_fake, fake, d.d_fake).max_rel_err < 1e-6);

    GanGLossOut g = gan_g_loss(fake);
    auto g_of_fake = [&](const Vec& f) { return gan_g_loss(f).value; };
    CHECK(grad_check(g_of_fake, fake, g.d_fake).max_rel_err < 1e-6);

    Vec targets(batch);
    for (double& t : targets) t = rng.uniform();
    BceOut bce = bce_with_logits(fake, targets);
    auto bce_of_logits = [&](const Vec& f) { return bce_with_logits(f, targets).value; };
    CHECK(grad_check(bce_of_logits, fake, bce.d_logits).max_rel_err < 1e-6);
  }
}

TEST_CASE("gan_g_loss gradient pushes fake logits upward") {
  Vec fake{-2.0, 0.0, 3.0};
  GanGLossOut g = gan_g_loss(fake);
  for (double grad : g.d_fake) CHECK(grad < 0.0);  // descending increases the logits
}

TEST_CASE("mixup idempotent on equal inputs and exact at lambda one") {
  Vec features{1.0, 2.0};
  Vec label{0.0, 1.0};
  RngStream rng(91);
  MixupOut same = mixup(features, label, features, label, 0.4, rng);
  CHECK(same.features == features);
  CHECK(same.label == label);

  Vec other_f{5.0, 6.0};
  Vec other_l{1.0, 0.0};
  MixupOut forced = mixup_with_lambda(features, label, other_f, other_l, 1.0);
  CHECK(forced.features == features);
  CHECK(forced.label == label);
}

TEST_CASE("mixup convex combination hand case") {
  Vec a_f{0.0, 0.0}, a_l{1.0, 0.0};
  Vec b_f{2.0, 2.0}, b_l{0.0, 1.0};
  MixupOut out = mixup_with_lambda(a_f, a_l, b_f, b_l, 0.25);
  CHECK(out.features[0] == doctest::Approx(1.5));
  CHECK(out.features[1] == doctest::Approx(1.5));
  CHECK(out.label[0] == doctest::Approx(0.25));
  CHECK(out.label[1] == doctest::Approx(0.75));
}

TEST_CASE("mixup output stays on the segment between inputs") {
  RngStream rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    Vec a(4), b(4), la(2), lb(2);
    rng.fill_gaussian(a);
    rng.fill_gaussian(b);
    la = {1.0, 0.0};
    lb = {0.0, 1.0};
    MixupOut out = mixup(a, la, b, lb, 0.4, rng);
    for (int i = 0; i < 4; ++i) {
      CHECK(out.features[i] >= std::min(a[i], b[i]) - 1e-12);
      CHECK(out.features[i] <= std::max(a[i], b[i]) + 1e-12);
    }
  }
}

TEST_CASE("mixup rejects dimension mismatch") {
  Vec a{1.0, 2.0}, b{1.0};
  Vec l{1.0};
  RngStream rng(1);
  CHECK_THROWS_AS(mixup(a, l, b, l, 0.4, rng), Error);
}
