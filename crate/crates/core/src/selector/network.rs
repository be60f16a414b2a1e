//! Forward and backward passes of the selector.
//!
//! Each candidate's input is the element-wise sum of its context embedding,
//! the affine projection of its binarized surface features, and a learned
//! position row. The sequence runs through pre-norm encoder blocks
//! (multi-head self-attention, then a GELU feed-forward of width
//! `4 * d_model`, each with a residual connection), a final layer norm, and a
//! two-way softmax head.

use alloc::vec::Vec;

use super::params::{LayerParams, NormParams, SelectorParams};
use super::tensor::{dot, Matrix};
use crate::error::{Error, Result};
use crate::features::{SparseBits, SURFACE_DIM};

const NORM_EPS: f64 = 1e-5;

/// Per-candidate network input.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateInput {
    pub context: Vec<f64>,
    pub surface: SparseBits,
}

/// `context + (projection · bits + bias) + position_table[position]`.
pub fn assemble_repr(
    context: &[f64],
    surface: &SparseBits,
    position: usize,
    params: &SelectorParams,
) -> Result<Vec<f64>> {
    let d = params.d_model();
    if context.len() != d {
        return Err(Error::ShapeMismatch {
            what: "context embedding",
            expected: d,
            found: context.len(),
        });
    }
    if surface.len != SURFACE_DIM {
        return Err(Error::ShapeMismatch {
            what: "surface bit vector",
            expected: SURFACE_DIM,
            found: surface.len,
        });
    }
    if position >= params.max_positions() {
        return Err(Error::ShapeMismatch {
            what: "candidate position",
            expected: params.max_positions(),
            found: position + 1,
        });
    }
    let mut out: Vec<f64> = context.to_vec();
    for (o, (&b, &p)) in out.iter_mut().zip(
        params
            .surface_bias
            .row(0)
            .iter()
            .zip(params.position_table.row(position)),
    ) {
        *o += b + p;
    }
    for i in surface.iter_ones() {
        for (o, &w) in out.iter_mut().zip(params.surface_projection.row(i)) {
            *o += w;
        }
    }
    Ok(out)
}

pub fn assemble_sequence(inputs: &[CandidateInput], params: &SelectorParams) -> Result<Matrix> {
    if inputs.len() > params.max_positions() {
        return Err(Error::ShapeMismatch {
            what: "candidate sequence length",
            expected: params.max_positions(),
            found: inputs.len(),
        });
    }
    let d = params.d_model();
    let mut data = Vec::with_capacity(inputs.len() * d);
    for (pos, input) in inputs.iter().enumerate() {
        data.extend(assemble_repr(&input.context, &input.surface, pos, params)?);
    }
    Matrix::from_vec(inputs.len(), d, data)
}

struct NormCache {
    xhat: Matrix,
    rstd: Vec<f64>,
}

fn layer_norm(x: &Matrix, p: &NormParams) -> (Matrix, NormCache) {
    let (rows, cols) = x.shape();
    let mut out = Matrix::zeros(rows, cols);
    let mut xhat = Matrix::zeros(rows, cols);
    let mut rstd = Vec::with_capacity(rows);
    let n = cols as f64;
    for t in 0..rows {
        let row = x.row(t);
        let mean = row.iter().sum::<f64>() / n;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let r = 1.0 / libm::sqrt(var + NORM_EPS);
        rstd.push(r);
        let xh = xhat.row_mut(t);
        for (h, &v) in xh.iter_mut().zip(row) {
            *h = (v - mean) * r;
        }
        let o = out.row_mut(t);
        for j in 0..cols {
            o[j] = xh[j] * p.gain.get(0, j) + p.bias.get(0, j);
        }
    }
    (out, NormCache { xhat, rstd })
}

fn layer_norm_backward(
    dy: &Matrix,
    cache: &NormCache,
    p: &NormParams,
    grad: &mut NormParams,
) -> Matrix {
    let (rows, cols) = dy.shape();
    let n = cols as f64;
    let mut dx = Matrix::zeros(rows, cols);
    let mut dxhat = alloc::vec![0.0; cols];
    for t in 0..rows {
        let dyt = dy.row(t);
        let xh = cache.xhat.row(t);
        {
            let gg = grad.gain.row_mut(0);
            for j in 0..cols {
                gg[j] += dyt[j] * xh[j];
            }
        }
        {
            let gb = grad.bias.row_mut(0);
            for j in 0..cols {
                gb[j] += dyt[j];
            }
        }
        for j in 0..cols {
            dxhat[j] = dyt[j] * p.gain.get(0, j);
        }
        let mean_d = dxhat.iter().sum::<f64>() / n;
        let mean_dx = dot(&dxhat, xh) / n;
        let r = cache.rstd[t];
        for (j, o) in dx.row_mut(t).iter_mut().enumerate() {
            *o = r * (dxhat[j] - mean_d - xh[j] * mean_dx);
        }
    }
    dx
}

const INV_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

fn gelu(u: f64) -> f64 {
    0.5 * u * (1.0 + libm::erf(u * INV_SQRT_2))
}

fn gelu_grad(u: f64) -> f64 {
    0.5 * (1.0 + libm::erf(u * INV_SQRT_2)) + u * INV_SQRT_2PI * libm::exp(-0.5 * u * u)
}

fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = libm::exp(*v - max);
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

struct LayerCache {
    attn_norm: NormCache,
    a: Matrix,
    q: Matrix,
    k: Matrix,
    v: Matrix,
    /// Attention weights per head, each `T × T`.
    attn: Vec<Matrix>,
    ctx: Matrix,
    ff_norm: NormCache,
    b: Matrix,
    u: Matrix,
    g: Matrix,
}

fn layer_forward(x: &Matrix, p: &LayerParams, n_heads: usize) -> (Matrix, LayerCache) {
    let (t_len, d) = x.shape();
    let dh = d / n_heads;
    let scale = 1.0 / libm::sqrt(dh as f64);

    let (a, attn_norm) = layer_norm(x, &p.attn_norm);
    let q = a.affine(&p.wq, &p.bq);
    let k = a.affine(&p.wk, &p.bk);
    let v = a.affine(&p.wv, &p.bv);
    let mut ctx = Matrix::zeros(t_len, d);
    let mut attn = Vec::with_capacity(n_heads);
    for h in 0..n_heads {
        let cols = h * dh..(h + 1) * dh;
        let mut weights = Matrix::zeros(t_len, t_len);
        for t in 0..t_len {
            let qt = &q.row(t)[cols.clone()];
            let w = weights.row_mut(t);
            for (s, ws) in w.iter_mut().enumerate() {
                *ws = scale * dot(qt, &k.row(s)[cols.clone()]);
            }
            softmax_in_place(w);
        }
        for t in 0..t_len {
            for s in 0..t_len {
                let w = weights.get(t, s);
                let vs = &v.row(s)[cols.clone()];
                for (c, &vv) in ctx.row_mut(t)[cols.clone()].iter_mut().zip(vs) {
                    *c += w * vv;
                }
            }
        }
        attn.push(weights);
    }
    let mut x1 = ctx.affine(&p.wo, &p.bo);
    x1.add_assign(x);

    let (b, ff_norm) = layer_norm(&x1, &p.ff_norm);
    let u = b.affine(&p.w1, &p.b1);
    let mut g = u.clone();
    g.as_mut_slice().iter_mut().for_each(|v| *v = gelu(*v));
    let mut out = g.affine(&p.w2, &p.b2);
    out.add_assign(&x1);

    let cache = LayerCache {
        attn_norm,
        a,
        q,
        k,
        v,
        attn,
        ctx,
        ff_norm,
        b,
        u,
        g,
    };
    (out, cache)
}

fn layer_backward(
    dout: &Matrix,
    cache: &LayerCache,
    p: &LayerParams,
    grad: &mut LayerParams,
    n_heads: usize,
) -> Matrix {
    let (t_len, d) = dout.shape();
    let dh = d / n_heads;
    let scale = 1.0 / libm::sqrt(dh as f64);

    // feed-forward branch
    grad.w2.add_tn(&cache.g, dout);
    grad.b2.add_col_sums(dout);
    let mut du = dout.matmul_t(&p.w2);
    for (d_u, &u) in du.as_mut_slice().iter_mut().zip(cache.u.as_slice()) {
        *d_u *= gelu_grad(u);
    }
    grad.w1.add_tn(&cache.b, &du);
    grad.b1.add_col_sums(&du);
    let db = du.matmul_t(&p.w1);
    let mut dx1 = layer_norm_backward(&db, &cache.ff_norm, &p.ff_norm, &mut grad.ff_norm);
    dx1.add_assign(dout);

    // attention branch
    grad.wo.add_tn(&cache.ctx, &dx1);
    grad.bo.add_col_sums(&dx1);
    let dctx = dx1.matmul_t(&p.wo);
    let mut dq = Matrix::zeros(t_len, d);
    let mut dk = Matrix::zeros(t_len, d);
    let mut dv = Matrix::zeros(t_len, d);
    let mut d_weights = alloc::vec![0.0; t_len];
    for (h, weights) in cache.attn.iter().enumerate() {
        let cols = h * dh..(h + 1) * dh;
        for t in 0..t_len {
            let dct = &dctx.row(t)[cols.clone()];
            for (s, dw) in d_weights.iter_mut().enumerate() {
                *dw = dot(dct, &cache.v.row(s)[cols.clone()]);
                let w = weights.get(t, s);
                for (g, &dc) in dv.row_mut(s)[cols.clone()].iter_mut().zip(dct) {
                    *g += w * dc;
                }
            }
            let wrow = weights.row(t);
            let mix = dot(wrow, &d_weights);
            for s in 0..t_len {
                let ds = wrow[s] * (d_weights[s] - mix) * scale;
                if ds == 0.0 {
                    continue;
                }
                let ks = &cache.k.row(s)[cols.clone()];
                for (g, &kv) in dq.row_mut(t)[cols.clone()].iter_mut().zip(ks) {
                    *g += ds * kv;
                }
                let qt = &cache.q.row(t)[cols.clone()];
                for (g, &qv) in dk.row_mut(s)[cols.clone()].iter_mut().zip(qt) {
                    *g += ds * qv;
                }
            }
        }
    }
    grad.wq.add_tn(&cache.a, &dq);
    grad.bq.add_col_sums(&dq);
    grad.wk.add_tn(&cache.a, &dk);
    grad.bk.add_col_sums(&dk);
    grad.wv.add_tn(&cache.a, &dv);
    grad.bv.add_col_sums(&dv);
    let mut da = dq.matmul_t(&p.wq);
    da.add_assign(&dk.matmul_t(&p.wk));
    da.add_assign(&dv.matmul_t(&p.wv));
    let mut dx = layer_norm_backward(&da, &cache.attn_norm, &p.attn_norm, &mut grad.attn_norm);
    dx.add_assign(&dx1);
    dx
}

fn n_heads_of(params: &SelectorParams, n_heads: usize) -> Result<usize> {
    let d = params.d_model();
    if n_heads == 0 || !d.is_multiple_of(n_heads) {
        return Err(Error::InvalidArgument(alloc::format!(
            "d_model {d} not divisible by {n_heads} heads"
        )));
    }
    Ok(n_heads)
}

/// Runs the encoder blocks (without the final norm) over a candidate sequence.
pub fn encoder_forward(reprs: &Matrix, params: &SelectorParams, n_heads: usize) -> Result<Matrix> {
    let n_heads = n_heads_of(params, n_heads)?;
    if reprs.rows() > params.max_positions() {
        return Err(Error::ShapeMismatch {
            what: "candidate sequence length",
            expected: params.max_positions(),
            found: reprs.rows(),
        });
    }
    if reprs.cols() != params.d_model() {
        return Err(Error::ShapeMismatch {
            what: "representation width",
            expected: params.d_model(),
            found: reprs.cols(),
        });
    }
    let mut x = reprs.clone();
    for layer in &params.layers {
        x = layer_forward(&x, layer, n_heads).0;
    }
    Ok(x)
}

fn head_logits(encoded: &Matrix, params: &SelectorParams) -> (Matrix, NormCache, Matrix) {
    let (y, cache) = layer_norm(encoded, &params.final_norm);
    let logits = y.affine(&params.head, &params.head_bias);
    (y, cache, logits)
}

/// P(salient) from two logits of an already-normalized vector.
pub fn predict_salience(normalized: &[f64], params: &SelectorParams) -> f64 {
    let mut logits = [params.head_bias.get(0, 0), params.head_bias.get(0, 1)];
    for (j, &v) in normalized.iter().enumerate() {
        logits[0] += v * params.head.get(j, 0);
        logits[1] += v * params.head.get(j, 1);
    }
    softmax_in_place(&mut logits);
    logits[1]
}

/// Salience probability for every candidate of one episode.
pub fn predict(
    inputs: &[CandidateInput],
    params: &SelectorParams,
    n_heads: usize,
) -> Result<Vec<f64>> {
    let x0 = assemble_sequence(inputs, params)?;
    let encoded = encoder_forward(&x0, params, n_heads)?;
    let (y, _, _) = head_logits(&encoded, params);
    Ok((0..y.rows())
        .map(|t| predict_salience(y.row(t), params))
        .collect())
}

fn check_labels(inputs: &[CandidateInput], labels: &[bool]) -> Result<()> {
    if inputs.is_empty() {
        return Err(Error::EmptyInput("candidate sequence"));
    }
    if inputs.len() != labels.len() {
        return Err(Error::ShapeMismatch {
            what: "labels",
            expected: inputs.len(),
            found: labels.len(),
        });
    }
    Ok(())
}

fn cross_entropy(logits: &Matrix, labels: &[bool]) -> (f64, Matrix) {
    let t_len = logits.rows();
    let mut total = 0.0;
    let mut dlogits = Matrix::zeros(t_len, 2);
    for (t, &label) in labels.iter().enumerate() {
        let mut probs = [logits.get(t, 0), logits.get(t, 1)];
        let max = probs[0].max(probs[1]);
        let lse = max + libm::log(libm::exp(probs[0] - max) + libm::exp(probs[1] - max));
        let target = usize::from(label);
        total += lse - probs[target];
        softmax_in_place(&mut probs);
        let row = dlogits.row_mut(t);
        for c in 0..2 {
            row[c] = (probs[c] - if c == target { 1.0 } else { 0.0 }) / t_len as f64;
        }
    }
    (total / t_len as f64, dlogits)
}

/// Mean per-candidate cross-entropy of one episode.
pub fn loss(
    inputs: &[CandidateInput],
    labels: &[bool],
    params: &SelectorParams,
    n_heads: usize,
) -> Result<f64> {
    check_labels(inputs, labels)?;
    let x0 = assemble_sequence(inputs, params)?;
    let encoded = encoder_forward(&x0, params, n_heads)?;
    let (_, _, logits) = head_logits(&encoded, params);
    Ok(cross_entropy(&logits, labels).0)
}

/// Mean per-candidate cross-entropy and its gradient with respect to every
/// parameter.
pub fn loss_and_grad(
    inputs: &[CandidateInput],
    labels: &[bool],
    params: &SelectorParams,
    n_heads: usize,
) -> Result<(f64, SelectorParams)> {
    check_labels(inputs, labels)?;
    let n_heads = n_heads_of(params, n_heads)?;
    let x0 = assemble_sequence(inputs, params)?;

    let mut caches = Vec::with_capacity(params.layers.len());
    let mut x = x0;
    for layer in &params.layers {
        let (next, cache) = layer_forward(&x, layer, n_heads);
        caches.push(cache);
        x = next;
    }
    let (y, final_cache, logits) = head_logits(&x, params);
    let (loss, dlogits) = cross_entropy(&logits, labels);

    let mut grad = params.zeros_like();
    grad.head.add_tn(&y, &dlogits);
    grad.head_bias.add_col_sums(&dlogits);
    let dy = dlogits.matmul_t(&params.head);
    let mut dx = layer_norm_backward(&dy, &final_cache, &params.final_norm, &mut grad.final_norm);
    for ((layer, cache), g) in params
        .layers
        .iter()
        .zip(&caches)
        .zip(grad.layers.iter_mut())
        .rev()
    {
        dx = layer_backward(&dx, cache, layer, g, n_heads);
    }

    for (t, input) in inputs.iter().enumerate() {
        let dxt = dx.row(t);
        for (g, &d) in grad.position_table.row_mut(t).iter_mut().zip(dxt) {
            *g += d;
        }
        for (g, &d) in grad.surface_bias.row_mut(0).iter_mut().zip(dxt) {
            *g += d;
        }
        for i in input.surface.iter_ones() {
            for (g, &d) in grad.surface_projection.row_mut(i).iter_mut().zip(dxt) {
                *g += d;
            }
        }
    }
    Ok((loss, grad))
}
