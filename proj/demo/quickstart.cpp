// Train an embedding on the default four-band dataset, classify ten held-out
// points, and print the Gram matrix of their embedded states.

#include <cstdio>

#include "qembed/analysis.hpp"
#include "qembed/embedding.hpp"
#include "qembed/training.hpp"

int main() {
  using namespace qembed;

  const BandLayout bands = BandLayout::standard();
  const LabeledDataset data = generate_dataset(bands, 1000, 7);
  const TrainTrace trace = train(data, TrainConfig{});
  std::printf("cost %.4f -> %.4f\n", trace.cost_trace.front(), trace.cost_trace.back());

  const LabeledDataset held_out = grouped_by_class(draw_balanced(bands, 5, 7));
  std::printf("held-out accuracy %.2f\n", evaluate(held_out, trace.final_params, data));

  std::vector<double> xs;
  std::vector<Label> labels;
  for (const auto& p : held_out.points) {
    xs.push_back(p.value);
    labels.push_back(p.label);
  }
  const GramMatrix g = gram_matrix(embed_all(xs, trace.final_params));
  for (std::size_t i = 0; i < g.n; ++i) {
    for (std::size_t j = 0; j < g.n; ++j) std::printf("%5.2f", g(i, j));
    std::printf("   %c\n", label_char(labels[i]));
  }
  std::printf("separation gap %.3f\n", cluster_metrics(g, labels).separation_gap);
}
