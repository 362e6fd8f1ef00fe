#include "miaug/infogan.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "miaug/adam.hpp"
#include "miaug/losses.hpp"

namespace miaug {

void GanConfig::validate() const {
  check(d_z >= 1, "stage2: d_z must be >= 1");
  check(lambda >= 0.0, "stage2: lambda must be >= 0");
  check(lr_d > 0.0 && lr_g > 0.0, "stage2: learning rates must be positive");
  check(epochs >= 1, "stage2: epochs must be >= 1");
  check(batch >= 2, "stage2: batch must be >= 2");
  check(tau > 0.0, "stage2: tau must be positive");
  check(mixup_alpha > 0.0, "stage2: mixup_alpha must be positive");
  check(optimizer == "sgd" || optimizer == "adam", "stage2: optimizer must be sgd or adam");
}

namespace {

// Either plain SGD or Adam at a fixed learning rate, per GanConfig.
class LayerOptimizer {
 public:
  LayerOptimizer(const std::string& kind, double lr) : sgd_(kind == "sgd"), lr_(lr), adam_(lr) {}

  void step(LinearLayer& layer, const Matrix& d_weight, const Vec& d_bias) {
    if (sgd_) {
      axpy(-lr_, d_weight.data(), layer.weight.data());
      axpy(-lr_, d_bias, layer.bias);
    } else {
      adam_.step(layer, d_weight, d_bias);
    }
  }

 private:
  bool sgd_;
  double lr_;
  LayerAdam adam_;
};

}  // namespace

Matrix concat_conditioning(const Matrix& z, std::span<const int> labels, const Matrix& text,
                           int num_classes) {
  const int batch = z.rows();
  check(text.rows() == batch && static_cast<int>(labels.size()) == batch,
        "conditioning: row counts differ (z=", batch, ", labels=", labels.size(),
        ", text=", text.rows(), ")");
  Matrix cond(batch, z.cols() + num_classes + text.cols());
  for (int i = 0; i < batch; ++i) {
    check(labels[i] >= 0 && labels[i] < num_classes, "conditioning: label ", labels[i],
          " out of range [0,", num_classes, ")");
    int col = 0;
    for (int j = 0; j < z.cols(); ++j) cond(i, col++) = z(i, j);
    cond(i, col + labels[i]) = 1.0;
    col += num_classes;
    for (int j = 0; j < text.cols(); ++j) cond(i, col++) = text(i, j);
  }
  return cond;
}

Matrix sample_noise(int count, int d_z, RngStream& rng) {
  Matrix z(count, d_z);
  rng.fill_gaussian(z.data());
  return z;
}

Matrix generate(const GanBundle& bundle, const Matrix& z, std::span<const int> labels,
                const Matrix& text) {
  check(z.cols() == bundle.d_z, "generate: z has ", z.cols(), " dims, bundle expects ",
        bundle.d_z);
  check(text.cols() == bundle.d_text, "generate: text has ", text.cols(),
        " dims, bundle expects ", bundle.d_text);
  const Matrix cond = concat_conditioning(z, labels, text, bundle.num_classes);
  return linear_forward(bundle.generator, cond);
}

namespace {

Matrix column_matrix(const Vec& v) {
  Matrix m(static_cast<int>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<int>(i), 0) = v[i];
  return m;
}

Vec logit_column(const Matrix& m) {
  Vec v(static_cast<std::size_t>(m.rows()));
  for (int i = 0; i < m.rows(); ++i) v[i] = m(i, 0);
  return v;
}

}  // namespace

GanTrainResult train_infogan(const Corpus& corpus, std::span<const int> train_indices,
                             const BaselineModel& baseline, const GanConfig& cfg) {
  corpus.validate();
  cfg.validate();
  check(!train_indices.empty(), "stage2: empty training set");
  check(baseline.classifier_head.in_dim() == corpus.d_audio &&
            baseline.classifier_head.out_dim() == corpus.num_classes,
        "stage2: classifier head is ", baseline.classifier_head.out_dim(), "x",
        baseline.classifier_head.in_dim(), ", corpus wants ", corpus.num_classes, "x",
        corpus.d_audio);
  check(baseline.text_projector.in_dim() == corpus.d_audio &&
            baseline.text_projector.out_dim() == corpus.d_text,
        "stage2: text projector is ", baseline.text_projector.out_dim(), "x",
        baseline.text_projector.in_dim(), ", corpus wants ", corpus.d_text, "x",
        corpus.d_audio);

  RngStream rng = RngStream::derive(cfg.seed, cfg.rng_label);

  GanTrainResult result;
  GanBundle& bundle = result.bundle;
  bundle.d_z = cfg.d_z;
  bundle.num_classes = corpus.num_classes;
  bundle.d_text = corpus.d_text;
  bundle.lambda = cfg.lambda;
  bundle.freeze_q = cfg.freeze_q;
  bundle.generator = LinearLayer::random_init(corpus.d_audio, bundle.conditioning_dim(), rng);
  bundle.discriminator = LinearLayer::random_init(1, corpus.d_audio, rng);
  result.q_heads = baseline;

  LayerOptimizer d_opt(cfg.optimizer, cfg.lr_d);
  LayerOptimizer g_opt(cfg.optimizer, cfg.lr_g);
  LayerOptimizer head_opt(cfg.optimizer, cfg.lr_g);
  LayerOptimizer proj_opt(cfg.optimizer, cfg.lr_g);

  std::vector<int> order(train_indices.begin(), train_indices.end());
  result.trace.reserve(cfg.epochs);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    GanTraceRow row;
    row.epoch = epoch;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t len = std::min<std::size_t>(cfg.batch, order.size() - start);
      if (len < 2) continue;
      const int b = static_cast<int>(len);
      const std::span<const int> chunk(order.data() + start, len);
      const BatchView batch = gather_batch(corpus, chunk);

      // Discriminator phase.
      {
        const Matrix z = sample_noise(b, cfg.d_z, rng);
        const Matrix cond = concat_conditioning(z, batch.labels, batch.text, corpus.num_classes);
        const Matrix fake = linear_forward(bundle.generator, cond);
        double d_loss;
        if (cfg.use_mixup) {
          // Blend each real row with its generated counterpart; the blend
          // weight doubles as the soft real-probability target.
          Vec lambdas(static_cast<std::size_t>(b));
          for (double& l : lambdas) l = rng.beta(cfg.mixup_alpha, cfg.mixup_alpha);
          Matrix mixed(b, corpus.d_audio);
          for (int i = 0; i < b; ++i) {
            for (int j = 0; j < corpus.d_audio; ++j) {
              mixed(i, j) = lambdas[i] * batch.audio(i, j) + (1.0 - lambdas[i]) * fake(i, j);
            }
          }
          const Matrix logits = linear_forward(bundle.discriminator, mixed);
          const BceOut bce = bce_with_logits(logit_column(logits), lambdas);
          d_loss = bce.value;
          const LinearGrads g =
              linear_backward(bundle.discriminator, mixed, column_matrix(bce.d_logits));
          d_opt.step(bundle.discriminator, g.d_weight, g.d_bias);
        } else {
          const Matrix real_logits = linear_forward(bundle.discriminator, batch.audio);
          const Matrix fake_logits = linear_forward(bundle.discriminator, fake);
          const GanDLossOut dl =
              gan_d_loss(logit_column(real_logits), logit_column(fake_logits));
          d_loss = dl.value;
          LinearGrads g =
              linear_backward(bundle.discriminator, batch.audio, column_matrix(dl.d_real));
          const LinearGrads g_fake =
              linear_backward(bundle.discriminator, fake, column_matrix(dl.d_fake));
          add_inplace(g.d_weight, g_fake.d_weight);
          for (std::size_t i = 0; i < g.d_bias.size(); ++i) g.d_bias[i] += g_fake.d_bias[i];
          d_opt.step(bundle.discriminator, g.d_weight, g.d_bias);
        }
        check(std::isfinite(d_loss), "stage2: discriminator loss diverged at epoch ", epoch);
        row.d_loss += d_loss;
      }

      // Generator phase (discriminator frozen), fresh noise.
      {
        const Matrix z = sample_noise(b, cfg.d_z, rng);
        const Matrix cond = concat_conditioning(z, batch.labels, batch.text, corpus.num_classes);
        const Matrix fake = linear_forward(bundle.generator, cond);
        const Matrix fake_logits = linear_forward(bundle.discriminator, fake);
        const GanGLossOut gl = gan_g_loss(logit_column(fake_logits));
        Matrix d_fake =
            linear_backward(bundle.discriminator, fake, column_matrix(gl.d_fake)).d_input;

        double iy_value = 0.0, it_value = 0.0, mi_bound = 0.0;
        if (cfg.lambda > 0.0) {
          const Matrix q_logits = linear_forward(result.q_heads.classifier_head, fake);
          CrossEntropyOut iy = cross_entropy(q_logits, batch.labels);
          iy_value = iy.value;
          scale_inplace(iy.d_logits, cfg.lambda);
          const LinearGrads gq =
              linear_backward(result.q_heads.classifier_head, fake, iy.d_logits);
          add_inplace(d_fake, gq.d_input);

          const Matrix projected = linear_forward(result.q_heads.text_projector, fake);
          InfoNceOut it = infonce(batch.text, projected, cfg.tau);
          it_value = it.value;
          mi_bound = it.mi_lower_bound;
          scale_inplace(it.d_pred, cfg.lambda);
          const LinearGrads gp =
              linear_backward(result.q_heads.text_projector, fake, it.d_pred);
          add_inplace(d_fake, gp.d_input);

          if (!cfg.freeze_q) {
            head_opt.step(result.q_heads.classifier_head, gq.d_weight, gq.d_bias);
            proj_opt.step(result.q_heads.text_projector, gp.d_weight, gp.d_bias);
          }
        }
        const LinearGrads gg = linear_backward(bundle.generator, cond, d_fake);
        g_opt.step(bundle.generator, gg.d_weight, gg.d_bias);

        check(std::isfinite(gl.value) && std::isfinite(iy_value) && std::isfinite(it_value),
              "stage2: generator loss diverged at epoch ", epoch);
        row.g_loss += gl.value;
        row.loss_iy += iy_value;
        row.loss_it += it_value;
        row.mi_bound_t += mi_bound;
      }
      ++batches;
    }
    check(batches > 0, "stage2: no usable batches (all chunks below size 2)");
    row.d_loss /= batches;
    row.g_loss /= batches;
    row.loss_iy /= batches;
    row.loss_it /= batches;
    row.mi_bound_t /= batches;
    result.trace.push_back(row);
  }
  return result;
}

GanTrainResult train_infogan(const Corpus& corpus, const BaselineModel& baseline,
                             const GanConfig& cfg) {
  std::vector<int> all(corpus.records.size());
  std::iota(all.begin(), all.end(), 0);
  return train_infogan(corpus, all, baseline, cfg);
}

MiDiagnostics mi_diagnostics(const GanBundle& bundle, const BaselineModel& q_heads,
                             const Matrix& z, std::span<const int> labels, const Matrix& text,
                             double tau) {
  const Matrix fake = generate(bundle, z, labels, text);
  const Matrix q_logits = linear_forward(q_heads.classifier_head, fake);
  MiDiagnostics diag;
  diag.loss_iy = cross_entropy(q_logits, labels).value;
  long hits = 0;
  for (int i = 0; i < q_logits.rows(); ++i) {
    if (argmax(q_logits.row(i)) == labels[i]) ++hits;
  }
  diag.q_label_accuracy = static_cast<double>(hits) / q_logits.rows();
  const Matrix projected = linear_forward(q_heads.text_projector, fake);
  const InfoNceOut it = infonce(text, projected, tau);
  diag.loss_it = it.value;
  diag.mi_bound_t = it.mi_lower_bound;
  return diag;
}

LinearLayer fit_discriminator(const Matrix& real, const Matrix& fake, double lr, int steps,
                              std::uint64_t seed) {
  check(real.cols() == fake.cols(), "fit_discriminator: dims differ, ", real.cols(), " vs ",
        fake.cols());
  check(real.rows() > 0 && fake.rows() > 0, "fit_discriminator: empty sample set");
  RngStream rng = RngStream::derive(seed, "fit_discriminator");
  LinearLayer disc = LinearLayer::random_init(1, real.cols(), rng);
  LayerAdam opt(lr);
  for (int step = 0; step < steps; ++step) {
    const Matrix real_logits = linear_forward(disc, real);
    const Matrix fake_logits = linear_forward(disc, fake);
    const GanDLossOut dl = gan_d_loss(logit_column(real_logits), logit_column(fake_logits));
    check(std::isfinite(dl.value), "fit_discriminator: loss diverged at step ", step);
    LinearGrads g = linear_backward(disc, real, column_matrix(dl.d_real));
    const LinearGrads g_fake = linear_backward(disc, fake, column_matrix(dl.d_fake));
    add_inplace(g.d_weight, g_fake.d_weight);
    for (std::size_t i = 0; i < g.d_bias.size(); ++i) g.d_bias[i] += g_fake.d_bias[i];
    opt.step(disc, g.d_weight, g.d_bias);
  }
  return disc;
}

void write_gan_trace_csv(std::span<const GanTraceRow> trace, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  check(out.good(), "cannot open ", path, " for writing");
  out << "epoch,d_loss,g_loss,loss_iy,loss_it,mi_bound_t\n";
  char buf[160];
  for (const GanTraceRow& row : trace) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", row.epoch, row.d_loss,
                  row.g_loss, row.loss_iy, row.loss_it, row.mi_bound_t);
    out << buf;
  }
  check(out.good(), "write failed for ", path);
}

}  // namespace miaug
