use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tensor::Matrix;
use crate::error::{Error, Result};
use crate::features::{DEFAULT_HEAD, DEFAULT_TAIL, SURFACE_DIM};

/// Shape and training hyperparameters of the selector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub d_model: usize,
    pub n_layers: usize,
    pub n_heads: usize,
    pub max_positions: usize,
    pub seed: u64,
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for ModelConfig {
    /// Desk-scale dimensions.
    fn default() -> Self {
        Self {
            d_model: 16,
            n_layers: 2,
            n_heads: 2,
            max_positions: DEFAULT_HEAD + DEFAULT_TAIL,
            seed: 13,
            learning_rate: 0.05,
            epochs: 50,
        }
    }
}

impl ModelConfig {
    /// Full-width configuration: 1,024 hidden units and 16 heads.
    pub fn full_width() -> Self {
        Self {
            d_model: 1024,
            n_heads: 16,
            ..Self::default()
        }
    }

    pub fn head_dim(&self) -> usize {
        self.d_model / self.n_heads
    }

    pub fn ff_width(&self) -> usize {
        4 * self.d_model
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.d_model == 0 || self.n_heads == 0 {
            return bad(String::from("d_model and n_heads must be positive"));
        }
        if !self.d_model.is_multiple_of(self.n_heads) {
            return bad(format!(
                "d_model {} not divisible by n_heads {}",
                self.d_model, self.n_heads
            ));
        }
        if self.max_positions == 0 {
            return bad(String::from("max_positions must be positive"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub gain: Matrix,
    pub bias: Matrix,
}

impl NormParams {
    fn identity(d: usize) -> Self {
        Self {
            gain: Matrix::filled(1, d, 1.0),
            bias: Matrix::zeros(1, d),
        }
    }
}

/// One pre-norm encoder block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    pub attn_norm: NormParams,
    pub wq: Matrix,
    pub bq: Matrix,
    pub wk: Matrix,
    pub bk: Matrix,
    pub wv: Matrix,
    pub bv: Matrix,
    pub wo: Matrix,
    pub bo: Matrix,
    pub ff_norm: NormParams,
    pub w1: Matrix,
    pub b1: Matrix,
    pub w2: Matrix,
    pub b2: Matrix,
}

/// All learnable parameters of the extraction classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorParams {
    pub surface_projection: Matrix,
    pub surface_bias: Matrix,
    pub position_table: Matrix,
    pub layers: Vec<LayerParams>,
    pub final_norm: NormParams,
    pub head: Matrix,
    pub head_bias: Matrix,
}

fn xavier(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let limit = libm::sqrt(6.0 / (rows + cols) as f64);
    let data = (0..rows * cols)
        .map(|_| rng.random_range(-limit..limit))
        .collect();
    Matrix::from_vec(rows, cols, data).expect("shape")
}

fn small(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Matrix {
    let data = (0..rows * cols)
        .map(|_| rng.random_range(-scale..scale))
        .collect();
    Matrix::from_vec(rows, cols, data).expect("shape")
}

impl SelectorParams {
    /// Xavier-uniform weights, zero biases and unit norm gains, seeded from
    /// `config.seed`.
    pub fn init(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let d = config.d_model;
        let ff = config.ff_width();
        let layers = (0..config.n_layers)
            .map(|_| LayerParams {
                attn_norm: NormParams::identity(d),
                wq: xavier(&mut rng, d, d),
                bq: Matrix::zeros(1, d),
                wk: xavier(&mut rng, d, d),
                bk: Matrix::zeros(1, d),
                wv: xavier(&mut rng, d, d),
                bv: Matrix::zeros(1, d),
                wo: xavier(&mut rng, d, d),
                bo: Matrix::zeros(1, d),
                ff_norm: NormParams::identity(d),
                w1: xavier(&mut rng, d, ff),
                b1: Matrix::zeros(1, ff),
                w2: xavier(&mut rng, ff, d),
                b2: Matrix::zeros(1, d),
            })
            .collect();
        Ok(Self {
            surface_projection: xavier(&mut rng, SURFACE_DIM, d),
            surface_bias: Matrix::zeros(1, d),
            position_table: small(&mut rng, config.max_positions, d, 0.02),
            layers,
            final_norm: NormParams::identity(d),
            head: xavier(&mut rng, d, 2),
            head_bias: Matrix::zeros(1, 2),
        })
    }

    /// Same shapes, all zeros; used as a gradient accumulator.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for m in z.tensors_mut() {
            m.as_mut_slice().fill(0.0);
        }
        z
    }

    pub fn d_model(&self) -> usize {
        self.surface_bias.cols()
    }

    pub fn max_positions(&self) -> usize {
        self.position_table.rows()
    }

    /// Named views of every tensor, in a fixed order.
    pub fn tensors(&self) -> Vec<(String, &Matrix)> {
        let mut out: Vec<(String, &Matrix)> = Vec::new();
        out.push((String::from("surface_projection"), &self.surface_projection));
        out.push((String::from("surface_bias"), &self.surface_bias));
        out.push((String::from("position_table"), &self.position_table));
        for (i, l) in self.layers.iter().enumerate() {
            let named = [
                ("attn_norm.gain", &l.attn_norm.gain),
                ("attn_norm.bias", &l.attn_norm.bias),
                ("wq", &l.wq),
                ("bq", &l.bq),
                ("wk", &l.wk),
                ("bk", &l.bk),
                ("wv", &l.wv),
                ("bv", &l.bv),
                ("wo", &l.wo),
                ("bo", &l.bo),
                ("ff_norm.gain", &l.ff_norm.gain),
                ("ff_norm.bias", &l.ff_norm.bias),
                ("w1", &l.w1),
                ("b1", &l.b1),
                ("w2", &l.w2),
                ("b2", &l.b2),
            ];
            out.extend(
                named
                    .into_iter()
                    .map(|(n, m)| (format!("layers.{i}.{n}"), m)),
            );
        }
        out.push((String::from("final_norm.gain"), &self.final_norm.gain));
        out.push((String::from("final_norm.bias"), &self.final_norm.bias));
        out.push((String::from("head"), &self.head));
        out.push((String::from("head_bias"), &self.head_bias));
        out
    }

    /// Mutable views in the same order as [`tensors`](Self::tensors).
    pub fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        let mut out: Vec<&mut Matrix> = alloc::vec![
            &mut self.surface_projection,
            &mut self.surface_bias,
            &mut self.position_table,
        ];
        for l in &mut self.layers {
            out.extend([
                &mut l.attn_norm.gain,
                &mut l.attn_norm.bias,
                &mut l.wq,
                &mut l.bq,
                &mut l.wk,
                &mut l.bk,
                &mut l.wv,
                &mut l.bv,
                &mut l.wo,
                &mut l.bo,
                &mut l.ff_norm.gain,
                &mut l.ff_norm.bias,
                &mut l.w1,
                &mut l.b1,
                &mut l.w2,
                &mut l.b2,
            ]);
        }
        out.extend([
            &mut self.final_norm.gain,
            &mut self.final_norm.bias,
            &mut self.head,
            &mut self.head_bias,
        ]);
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|(_, m)| m.as_slice().len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(_, m)| m.is_finite())
    }

    /// `self -= rate * grad`.
    pub fn descend(&mut self, grad: &SelectorParams, rate: f64) {
        for (p, (_, g)) in self.tensors_mut().into_iter().zip(grad.tensors()) {
            for (w, &d) in p.as_mut_slice().iter_mut().zip(g.as_slice()) {
                *w -= rate * d;
            }
        }
    }

    /// Checks every shape against `config`.
    pub fn validate(&self, config: &ModelConfig) -> Result<()> {
        let reference = Self::shape_template(config)?;
        if self.layers.len() != reference.layers.len() {
            return Err(Error::ShapeMismatch {
                what: "encoder layers",
                expected: reference.layers.len(),
                found: self.layers.len(),
            });
        }
        for ((_, ours), (_, want)) in self.tensors().into_iter().zip(reference.tensors()) {
            if ours.shape() != want.shape() {
                return Err(Error::ShapeMismatch {
                    what: "parameter tensor",
                    expected: want.rows() * want.cols(),
                    found: ours.rows() * ours.cols(),
                });
            }
        }
        if !self.is_finite() {
            return Err(Error::InvalidArgument(String::from(
                "parameters contain non-finite values",
            )));
        }
        Ok(())
    }

    fn shape_template(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        let d = config.d_model;
        let ff = config.ff_width();
        let layer = LayerParams {
            attn_norm: NormParams::identity(d),
            wq: Matrix::zeros(d, d),
            bq: Matrix::zeros(1, d),
            wk: Matrix::zeros(d, d),
            bk: Matrix::zeros(1, d),
            wv: Matrix::zeros(d, d),
            bv: Matrix::zeros(1, d),
            wo: Matrix::zeros(d, d),
            bo: Matrix::zeros(1, d),
            ff_norm: NormParams::identity(d),
            w1: Matrix::zeros(d, ff),
            b1: Matrix::zeros(1, ff),
            w2: Matrix::zeros(ff, d),
            b2: Matrix::zeros(1, d),
        };
        Ok(Self {
            surface_projection: Matrix::zeros(SURFACE_DIM, d),
            surface_bias: Matrix::zeros(1, d),
            position_table: Matrix::zeros(config.max_positions, d),
            layers: alloc::vec![layer; config.n_layers],
            final_norm: NormParams::identity(d),
            head: Matrix::zeros(d, 2),
            head_bias: Matrix::zeros(1, 2),
        })
    }
}

pub const MODEL_FORMAT: &str = "podsum-selector";
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Versioned on-disk form: config header plus nested row-major arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedModel {
    pub format: String,
    pub version: u32,
    pub config: ModelConfig,
    pub params: SelectorParams,
}

impl SavedModel {
    pub fn new(config: ModelConfig, params: SelectorParams) -> Self {
        Self {
            format: String::from(MODEL_FORMAT),
            version: MODEL_FORMAT_VERSION,
            config,
            params,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != MODEL_FORMAT || self.version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported model format {} v{}",
                self.format, self.version
            )));
        }
        self.params.validate(&self.config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_seeded() {
        let cfg = ModelConfig::default();
        let a = SelectorParams::init(&cfg).unwrap();
        let b = SelectorParams::init(&cfg).unwrap();
        assert_eq!(a, b);
        let c = SelectorParams::init(&ModelConfig {
            seed: 99,
            ..cfg.clone()
        })
        .unwrap();
        assert_ne!(a, c);
        a.validate(&cfg).unwrap();
    }

    #[test]
    fn tensor_views_align() {
        let mut p = SelectorParams::init(&ModelConfig::default()).unwrap();
        let shapes: Vec<_> = p.tensors().iter().map(|(_, m)| m.shape()).collect();
        let shapes_mut: Vec<_> = p.tensors_mut().iter().map(|m| m.shape()).collect();
        assert_eq!(shapes, shapes_mut);
        assert_eq!(shapes.len(), 3 + 16 * 2 + 4);
    }

    #[test]
    fn config_validation() {
        let bad = ModelConfig {
            d_model: 10,
            n_heads: 3,
            ..ModelConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(ModelConfig::full_width().validate().is_ok());
        assert_eq!(ModelConfig::full_width().head_dim(), 64);
    }

    #[test]
    fn shape_mismatch_detected() {
        let cfg = ModelConfig::default();
        let p = SelectorParams::init(&cfg).unwrap();
        let other = ModelConfig { d_model: 8, ..cfg };
        assert!(p.validate(&other).is_err());
    }

    #[test]
    fn saved_model_round_trip() {
        let cfg = ModelConfig {
            d_model: 4,
            n_layers: 1,
            n_heads: 2,
            max_positions: 3,
            ..ModelConfig::default()
        };
        let saved = SavedModel::new(cfg.clone(), SelectorParams::init(&cfg).unwrap());
        let json = serde_json::to_string(&saved).unwrap();
        let back: SavedModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, saved);
        back.validate().unwrap();
    }
}
