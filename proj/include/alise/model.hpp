#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "alise/graph.hpp"
#include "alise/rng.hpp"
#include "alise/sits.hpp"
#include "alise/views.hpp"

namespace alise {

/// Architecture of the SITS encoder: a U-shaped per-image convolutional
/// stack shared across dates, a per-pixel temporal transformer, and a
/// learnable-query cross-attention projector producing n_q aligned slots.
struct EncoderConfig {
  int64_t c_in = 10;
  int64_t d_model = 64;
  int64_t n_q = 10;
  int n_down = 3;         // downsampling levels; bottleneck doubles channels
  int n_tr_layers = 3;    // temporal transformer depth
  int n_tr_heads = 4;
  int64_t d_hidden = 128; // transformer feed-forward width
  int proj_heads = 2;     // projector cross-attention heads, channels split
};

namespace model {

/// Sinusoidal code over day offsets; tau = 10000 days so multi-year offsets
/// stay below one period. d_model must be even.
Tensor positional_encoding(const std::vector<int64_t>& dt, int64_t d_model);

void init_encoder(ParamStore& ps, const EncoderConfig& cfg, Rng rng);
void init_projector(ParamStore& ps, const EncoderConfig& cfg, int64_t d_emb, Rng rng);
void init_decoder(ParamStore& ps, const EncoderConfig& cfg, Rng rng);
void init_probe(ParamStore& ps, const EncoderConfig& cfg, int64_t k, Rng rng);

/// Per-date spatial encoding then per-pixel temporal attention.
/// x: [B][T][c][h][w]; dt_batch: day offsets per series (each of length T).
/// Returns [B][T][d_model][h][w].
Graph::Id sste_forward(Graph& g, ParamStore& ps, const EncoderConfig& cfg, Graph::Id x,
                       const std::vector<std::vector<int64_t>>& dt_batch);

/// Learnable-query cross attention onto the per-pixel date axis.
/// psi: [B][T][d_model][h][w] -> [B][n_q][d_model][h][w].
Graph::Id temporal_project(Graph& g, ParamStore& ps, const EncoderConfig& cfg, Graph::Id psi);

Graph::Id encode(Graph& g, ParamStore& ps, const EncoderConfig& cfg, Graph::Id x,
                 const std::vector<std::vector<int64_t>>& dt_batch);

/// Stacks a batch of equal-shape series and encodes it.
Graph::Id encode_batch(Graph& g, ParamStore& ps, const EncoderConfig& cfg,
                       const std::vector<const Sits*>& batch);

/// Latent projector pi: per pixel and per query, d_model -> d_emb rows.
/// train_mode standardizes each feature over the whole sample axis.
/// Returns [B*n_q*h*w][d_emb].
Graph::Id embed(Graph& g, ParamStore& ps, int64_t d_emb, Graph::Id y, bool train_mode);

/// Mean over samples of the squared distance between paired embeddings.
Graph::Id invariance_loss(Graph& g, Graph::Id za, Graph::Id zb);

/// Off-diagonal energy of the (N-1)-normalized covariance of z's columns.
Graph::Id covariance_penalty(Graph& g, Graph::Id z);

Graph::Id covariance_loss(Graph& g, Graph::Id za, Graph::Id zb);

/// Mask token plus the positional code of each date to reconstruct.
Graph::Id build_queries(Graph& g, ParamStore& ps, const std::vector<int64_t>& dt_target,
                        int64_t d_model);

/// Reconstructs reflectances at dt_target from one series' latents.
/// y_series: [n_q][d_model][h][w] -> [T_target][c][h][w].
Graph::Id decode_series(Graph& g, ParamStore& ps, const EncoderConfig& cfg, Graph::Id y_series,
                        const std::vector<int64_t>& dt_target);

/// Eq-10 style average of both masked cross reconstructions over the batch.
/// ya/yb: [B][n_q][d_model][h][w] from the paired views.
Graph::Id cross_recon_loss(Graph& g, ParamStore& ps, const EncoderConfig& cfg,
                           const std::vector<const ViewPair*>& pairs, Graph::Id ya, Graph::Id yb);

/// Single linear layer over the flattened (n_q x d_model) pixel features.
/// y: [B][n_q][d_model][h][w] -> logits [B*h*w][k].
Graph::Id probe_logits(Graph& g, ParamStore& ps, const EncoderConfig& cfg, int64_t k, Graph::Id y);

/// Input helpers shared by training and evaluation paths.
Tensor stack_values(const std::vector<const Sits*>& batch);     // [B][T][c][h][w]
Tensor stack_validity(const std::vector<const Sits*>& batch);   // [B][T][h][w]

}  // namespace model
}  // namespace alise
