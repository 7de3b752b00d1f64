//! The graph-convolutional node-pair scorer: a small dense-tensor core with
//! a mean-aggregation encoder, dot-product pair scoring, binary cross-entropy
//! loss, hand-derived reverse-mode gradients, and Adam.
//!
//! Each encoder layer computes, per node u,
//!
//! ```text
//!     n_u = mean over message-graph neighbors v of relu(Q h_v + q)
//!     h'_u = relu(W concat(h_u, n_u))
//! ```
//!
//! Input features are length-3 one-hot vectors over the node kinds
//! (positive literal, negative literal, clause). The message graph is the
//! LCG adjacency plus one extra propagation edge between each literal and
//! its complement.

pub mod incremental;

use ndarray::{concatenate, s, Array1, Array2, ArrayView1, Axis, Zip};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ClauseNodeId, Lcg, LitNodeId};

/// Input feature dimension: one-hot over the three node kinds.
pub const INPUT_DIM: usize = 3;

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("non-finite activation in layer {layer}")]
    NonFiniteActivation { layer: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("checkpoint io: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint payload: {0}")]
    Payload(#[from] serde_json::Error),
    #[error("checkpoint version {found} unsupported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
}

/// One encoder layer: neighbor transform `Q`/`q` and combine matrix `W`
/// over `concat(self, aggregated)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    pub neigh_w: Array2<f64>,
    pub neigh_b: Array1<f64>,
    pub combine_w: Array2<f64>,
}

impl LayerParams {
    fn zeros(in_dim: usize, out_dim: usize) -> Self {
        LayerParams {
            neigh_w: Array2::zeros((out_dim, in_dim)),
            neigh_b: Array1::zeros(out_dim),
            combine_w: Array2::zeros((out_dim, in_dim + out_dim)),
        }
    }

    fn in_dim(&self) -> usize {
        self.neigh_w.ncols()
    }

    fn out_dim(&self) -> usize {
        self.neigh_w.nrows()
    }
}

/// All trainable tensors of the encoder. Also reused as the container shape
/// for gradients and Adam moment estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub hidden_dim: usize,
    /// Apply ReLU after the final layer. When unset, final embeddings are
    /// unrectified and pair dot products may be negative.
    pub final_relu: bool,
    pub layers: Vec<LayerParams>,
}

impl ModelParams {
    /// Glorot-uniform initialization of a `num_layers`-deep encoder mapping
    /// 3 -> hidden -> ... -> hidden.
    pub fn init(num_layers: usize, hidden_dim: usize, final_relu: bool, seed: u64) -> Self {
        assert!(num_layers >= 1 && hidden_dim >= 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(num_layers);
        for l in 0..num_layers {
            let in_dim = if l == 0 { INPUT_DIM } else { hidden_dim };
            let out_dim = hidden_dim;
            let mut layer = LayerParams::zeros(in_dim, out_dim);
            glorot_fill(&mut layer.neigh_w, &mut rng);
            glorot_fill(&mut layer.combine_w, &mut rng);
            layers.push(layer);
        }
        ModelParams {
            hidden_dim,
            final_relu,
            layers,
        }
    }

    pub fn zeros_like(&self) -> Self {
        ModelParams {
            hidden_dim: self.hidden_dim,
            final_relu: self.final_relu,
            layers: self
                .layers
                .iter()
                .map(|l| LayerParams::zeros(l.in_dim(), l.out_dim()))
                .collect(),
        }
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// Checks internal dimension consistency.
    pub fn validate(&self) -> Result<(), NeuralError> {
        if self.layers.is_empty() {
            return Err(NeuralError::ShapeMismatch("no layers".into()));
        }
        for (l, layer) in self.layers.iter().enumerate() {
            let expect_in = if l == 0 { INPUT_DIM } else { self.hidden_dim };
            if layer.in_dim() != expect_in
                || layer.out_dim() != self.hidden_dim
                || layer.neigh_b.len() != self.hidden_dim
                || layer.combine_w.shape() != [self.hidden_dim, expect_in + self.hidden_dim]
            {
                return Err(NeuralError::ShapeMismatch(format!(
                    "layer {l}: got Q {:?}, q {:?}, W {:?}",
                    layer.neigh_w.shape(),
                    layer.neigh_b.shape(),
                    layer.combine_w.shape()
                )));
            }
            let finite = layer.neigh_w.iter().chain(layer.neigh_b.iter()).chain(layer.combine_w.iter()).all(|x| x.is_finite());
            if !finite {
                return Err(NeuralError::ShapeMismatch(format!("layer {l}: non-finite parameter")));
            }
        }
        Ok(())
    }
}

fn glorot_fill(w: &mut Array2<f64>, rng: &mut ChaCha8Rng) {
    let bound = (6.0 / (w.ncols() + w.nrows()) as f64).sqrt();
    for x in w.iter_mut() {
        *x = rng.random::<f64>() * 2.0 * bound - bound;
    }
}

/// Maps LCG node ids onto dense matrix rows: literal nodes first, then one
/// row per clause id ever allocated. Rows of retired clause ids go stale and
/// are never read.
#[derive(Clone, Copy, Debug)]
pub struct NodeUniverse {
    num_lit: usize,
    clause_bound: u32,
}

impl NodeUniverse {
    pub fn of(g: &Lcg) -> Self {
        NodeUniverse {
            num_lit: g.num_literal_nodes(),
            clause_bound: g.clause_id_bound(),
        }
    }

    pub fn num_rows(&self) -> usize {
        self.num_lit + self.clause_bound as usize
    }

    pub fn lit_row(&self, l: LitNodeId) -> usize {
        l.0 as usize
    }

    pub fn clause_row(&self, c: ClauseNodeId) -> usize {
        self.num_lit + c.0 as usize
    }

    pub fn fits(&self, g: &Lcg) -> bool {
        g.num_literal_nodes() == self.num_lit && g.clause_id_bound() <= self.clause_bound
    }

    /// One-hot input features for every row.
    pub fn features(&self) -> Array2<f64> {
        let mut h0 = Array2::zeros((self.num_rows(), INPUT_DIM));
        for row in 0..self.num_rows() {
            let slot = if row < self.num_lit { row % 2 } else { 2 };
            h0[[row, slot]] = 1.0;
        }
        h0
    }

    /// Calls `f` for each message-graph neighbor of `row`, in canonical
    /// order: a literal sees its incident clauses ascending then its
    /// complement literal; a clause sees its literals ascending. Clause
    /// nodes never gain complement links.
    pub fn for_each_neighbor(&self, g: &Lcg, row: usize, mut f: impl FnMut(usize)) {
        if row < self.num_lit {
            let lit = LitNodeId(row as u32);
            for &c in g.lit_clauses(lit) {
                f(self.clause_row(c));
            }
            f(self.lit_row(lit.complement()));
        } else if let Ok(lits) = g.clause_lits(ClauseNodeId((row - self.num_lit) as u32)) {
            for &l in lits {
                f(self.lit_row(l));
            }
        }
    }

    pub fn neighbor_count(&self, g: &Lcg, row: usize) -> usize {
        if row < self.num_lit {
            g.lit_degree(LitNodeId(row as u32)) + 1
        } else {
            g.clause_lits(ClauseNodeId((row - self.num_lit) as u32))
                .map(|l| l.len())
                .unwrap_or(0)
        }
    }
}

/// Forward-pass activations kept for the backward pass.
pub struct EncodeCache {
    pub uni: NodeUniverse,
    /// h[l] for l = 0..=L; h[L] are the final embeddings.
    pub h: Vec<Array2<f64>>,
    /// t[l] = relu(Q_l h_l + q_l), the per-node transformed messages.
    pub t: Vec<Array2<f64>>,
    /// c[l] = concat(h_l, aggregated_l), input of the combine matmul.
    pub c: Vec<Array2<f64>>,
}

impl EncodeCache {
    pub fn embeddings(&self) -> &Array2<f64> {
        self.h.last().unwrap()
    }

    pub fn embedding_of(&self, row: usize) -> ArrayView1<'_, f64> {
        self.embeddings().row(row)
    }
}

fn relu_inplace(a: &mut Array2<f64>) {
    a.mapv_inplace(|x| if x > 0.0 { x } else { 0.0 });
}

/// Mean-aggregates `t` rows over each node's message neighborhood. Empty
/// neighborhoods aggregate to the zero vector.
fn aggregate_all(g: &Lcg, uni: &NodeUniverse, t: &Array2<f64>) -> Array2<f64> {
    let mut n = Array2::zeros(t.raw_dim());
    for row in 0..uni.num_rows() {
        let mut count = 0usize;
        {
            let mut acc = n.row_mut(row);
            uni.for_each_neighbor(g, row, |nbr| {
                acc += &t.row(nbr);
                count += 1;
            });
        }
        if count > 0 {
            n.row_mut(row).mapv_inplace(|x| x / count as f64);
        }
    }
    n
}

/// Full forward pass over every node of `g`. Returns all intermediate
/// activations; the final embeddings are `cache.embeddings()`.
pub fn encode(g: &Lcg, params: &ModelParams) -> Result<EncodeCache, NeuralError> {
    params.validate()?;
    let uni = NodeUniverse::of(g);
    let num_layers = params.num_layers();
    let mut h = Vec::with_capacity(num_layers + 1);
    let mut t = Vec::with_capacity(num_layers);
    let mut c = Vec::with_capacity(num_layers);
    h.push(uni.features());

    for (l, layer) in params.layers.iter().enumerate() {
        let h_l = &h[l];
        let mut t_l = h_l.dot(&layer.neigh_w.t()) + &layer.neigh_b;
        relu_inplace(&mut t_l);
        let n_l = aggregate_all(g, &uni, &t_l);
        let c_l = concatenate![Axis(1), h_l.view(), n_l.view()];
        let mut h_next = c_l.dot(&layer.combine_w.t());
        if l + 1 < num_layers || params.final_relu {
            relu_inplace(&mut h_next);
        }
        if !h_next.iter().all(|x| x.is_finite()) {
            return Err(NeuralError::NonFiniteActivation { layer: l });
        }
        t.push(t_l);
        c.push(c_l);
        h.push(h_next);
    }
    Ok(EncodeCache { uni, h, t, c })
}

/// sigma(h_u . h_v), strictly inside (0, 1) and symmetric in its arguments.
pub fn score_pair(h_u: ArrayView1<'_, f64>, h_v: ArrayView1<'_, f64>) -> f64 {
    sigmoid(h_u.dot(&h_v))
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// log(1 + exp(x)) without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// One scoring task: two embedding rows and a 0/1 label.
#[derive(Debug, Clone, Copy)]
pub struct ScoredPair {
    pub row_u: usize,
    pub row_v: usize,
    pub label: f64,
}

/// Binary cross-entropy over pairs, each weighted by `1/denom`, computed in
/// the numerically stable log-sigmoid form. Returns the loss contribution
/// and its gradient with respect to the embedding matrix.
pub fn bce_loss(
    embeddings: &Array2<f64>,
    pairs: &[ScoredPair],
    denom: f64,
) -> (f64, Array2<f64>) {
    let mut loss = 0.0;
    let mut grad = Array2::zeros(embeddings.raw_dim());
    for pair in pairs {
        let h_u = embeddings.row(pair.row_u);
        let h_v = embeddings.row(pair.row_v);
        let s = h_u.dot(&h_v);
        // -y ln sigma(s) - (1-y) ln(1 - sigma(s))
        loss += (pair.label * softplus(-s) + (1.0 - pair.label) * softplus(s)) / denom;
        let ds = (sigmoid(s) - pair.label) / denom;
        {
            let mut gu = grad.row_mut(pair.row_u);
            gu.scaled_add(ds, &h_v);
        }
        {
            let mut gv = grad.row_mut(pair.row_v);
            gv.scaled_add(ds, &h_u);
        }
    }
    (loss, grad)
}

/// Reverse-mode pass: propagates `d_embeddings` (gradient of the loss with
/// respect to the final embeddings) back through the cached forward pass,
/// producing exact gradients for every parameter tensor.
pub fn backward(
    g: &Lcg,
    params: &ModelParams,
    cache: &EncodeCache,
    d_embeddings: Array2<f64>,
) -> ModelParams {
    let num_layers = params.num_layers();
    let uni = &cache.uni;
    let mut grads = params.zeros_like();
    let mut dh = d_embeddings;

    for l in (0..num_layers).rev() {
        let layer = &params.layers[l];
        let grad_layer = &mut grads.layers[l];
        let in_dim = layer.in_dim();

        // Through the final-layer ReLU (if present).
        let dp = if l + 1 < num_layers || params.final_relu {
            let mut dp = dh;
            Zip::from(&mut dp).and(&cache.h[l + 1]).for_each(|d, &h| {
                if h <= 0.0 {
                    *d = 0.0;
                }
            });
            dp
        } else {
            dh
        };

        grad_layer.combine_w += &dp.t().dot(&cache.c[l]);
        let dc = dp.dot(&layer.combine_w);
        let dh_self = dc.slice(s![.., ..in_dim]).to_owned();
        let dn = dc.slice(s![.., in_dim..]);

        // Transpose of the mean aggregation: each node's incoming gradient
        // is scattered to its neighbors' transformed messages.
        let mut dt = Array2::zeros(cache.t[l].raw_dim());
        for row in 0..uni.num_rows() {
            let dn_row = dn.row(row);
            if dn_row.iter().all(|&x| x == 0.0) {
                continue;
            }
            let count = uni.neighbor_count(g, row);
            if count == 0 {
                continue;
            }
            let inv = 1.0 / count as f64;
            uni.for_each_neighbor(g, row, |nbr| {
                let mut slot = dt.row_mut(nbr);
                slot.scaled_add(inv, &dn_row);
            });
        }

        // Through the message-transform ReLU.
        Zip::from(&mut dt).and(&cache.t[l]).for_each(|d, &t| {
            if t <= 0.0 {
                *d = 0.0;
            }
        });

        grad_layer.neigh_w += &dt.t().dot(&cache.h[l]);
        grad_layer.neigh_b += &dt.sum_axis(Axis(0));
        dh = dh_self + dt.dot(&layer.neigh_w);
    }
    grads
}

/// Adam optimizer state: first/second moments per parameter plus the step
/// counter and hyperparameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdamState {
    pub m: ModelParams,
    pub v: ModelParams,
    pub step: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(params: &ModelParams, lr: f64) -> Self {
        AdamState {
            m: params.zeros_like(),
            v: params.zeros_like(),
            step: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

fn adam_update_tensor<D: ndarray::Dimension>(
    p: &mut ndarray::Array<f64, D>,
    g: &ndarray::Array<f64, D>,
    m: &mut ndarray::Array<f64, D>,
    v: &mut ndarray::Array<f64, D>,
    state: (f64, f64, f64, f64, f64, f64),
) {
    let (lr, beta1, beta2, eps, bc1, bc2) = state;
    Zip::from(p).and(g).and(m).and(v).for_each(|p, &g, m, v| {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    });
}

/// One bias-corrected Adam step over every parameter tensor.
pub fn adam_step(params: &mut ModelParams, grads: &ModelParams, state: &mut AdamState) {
    state.step += 1;
    let bc1 = 1.0 - state.beta1.powi(state.step as i32);
    let bc2 = 1.0 - state.beta2.powi(state.step as i32);
    let hyper = (state.lr, state.beta1, state.beta2, state.eps, bc1, bc2);
    for l in 0..params.layers.len() {
        adam_update_tensor(
            &mut params.layers[l].neigh_w,
            &grads.layers[l].neigh_w,
            &mut state.m.layers[l].neigh_w,
            &mut state.v.layers[l].neigh_w,
            hyper,
        );
        adam_update_tensor(
            &mut params.layers[l].neigh_b,
            &grads.layers[l].neigh_b,
            &mut state.m.layers[l].neigh_b,
            &mut state.v.layers[l].neigh_b,
            hyper,
        );
        adam_update_tensor(
            &mut params.layers[l].combine_w,
            &grads.layers[l].combine_w,
            &mut state.m.layers[l].combine_w,
            &mut state.v.layers[l].combine_w,
            hyper,
        );
    }
}

pub const CHECKPOINT_VERSION: u32 = 1;

/// Versioned on-disk container for the model and optimizer state.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub params: ModelParams,
    pub adam: Option<AdamState>,
    pub seed: u64,
}

impl Checkpoint {
    pub fn new(params: ModelParams, adam: Option<AdamState>, seed: u64) -> Self {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            params,
            adam,
            seed,
        }
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), NeuralError> {
        let json = serde_json::to_string(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self, NeuralError> {
        let text = std::fs::read_to_string(path)?;
        let ckpt: Checkpoint = serde_json::from_str(&text)?;
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(NeuralError::VersionMismatch {
                found: ckpt.version,
                expected: CHECKPOINT_VERSION,
            });
        }
        ckpt.params.validate()?;
        if let Some(adam) = &ckpt.adam {
            adam.m.validate().map_err(|_| {
                NeuralError::ShapeMismatch("adam first-moment shapes".into())
            })?;
            adam.v.validate().map_err(|_| {
                NeuralError::ShapeMismatch("adam second-moment shapes".into())
            })?;
        }
        Ok(ckpt)
    }
}
