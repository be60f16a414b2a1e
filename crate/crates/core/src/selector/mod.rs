//! The segment selector: hybrid candidate representation, a small transformer
//! encoder over the candidate sequence, and per-candidate salience.

mod embed;
mod gradcheck;
mod network;
mod params;
mod source;
mod tensor;
mod train;

pub use embed::{check_embeddings, stub_embedding, ContextProvider, StubProvider, ZeroProvider};
pub use gradcheck::{check_gradients, GradCheck};
pub use network::{
    assemble_repr, assemble_sequence, encoder_forward, loss, loss_and_grad, predict,
    predict_salience, CandidateInput,
};
pub use params::{
    LayerParams, ModelConfig, NormParams, SavedModel, SelectorParams, MODEL_FORMAT,
    MODEL_FORMAT_VERSION,
};
pub use source::{select_source, truncate_lead, SourceText, DEFAULT_BUDGET};
pub use tensor::Matrix;
pub use train::{accuracy, dataset_loss, train, BatchMode, EpisodeExample, TrainOutcome, Trainer};

use alloc::vec::Vec;

use crate::error::Result;

/// Trained parameters together with the configuration they were built for.
#[derive(Debug, Clone, PartialEq)]
pub struct Selector {
    pub config: ModelConfig,
    pub params: SelectorParams,
}

impl Selector {
    pub fn new(config: ModelConfig, params: SelectorParams) -> Result<Self> {
        params.validate(&config)?;
        Ok(Self { config, params })
    }

    pub fn from_saved(saved: SavedModel) -> Result<Self> {
        saved.validate()?;
        Ok(Self {
            config: saved.config,
            params: saved.params,
        })
    }

    pub fn to_saved(&self) -> SavedModel {
        SavedModel::new(self.config.clone(), self.params.clone())
    }

    /// Salience probability per candidate; `|inputs|` in, `|inputs|` out.
    pub fn predict(&self, inputs: &[CandidateInput]) -> Result<Vec<f64>> {
        predict(inputs, &self.params, self.config.n_heads)
    }

    pub fn encode(&self, inputs: &[CandidateInput]) -> Result<Matrix> {
        let x0 = assemble_sequence(inputs, &self.params)?;
        encoder_forward(&x0, &self.params, self.config.n_heads)
    }
}
