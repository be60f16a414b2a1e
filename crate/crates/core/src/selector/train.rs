use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::{loss, loss_and_grad, predict, CandidateInput};
use super::params::{ModelConfig, SelectorParams};
use crate::error::{Error, Result};

/// One episode's candidate sequence with its labels.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeExample {
    pub episode_id: String,
    pub inputs: Vec<CandidateInput>,
    pub labels: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BatchMode {
    /// One update per episode, episodes shuffled every epoch.
    #[default]
    PerEpisode,
    /// One update per epoch from the gradient of the whole dataset.
    FullBatch,
}

/// Plain gradient descent with a fixed learning rate.
#[derive(Debug, Clone)]
pub struct Trainer {
    config: ModelConfig,
    mode: BatchMode,
    params: SelectorParams,
    rng: ChaCha8Rng,
    epoch: usize,
}

fn candidate_total(data: &[EpisodeExample]) -> usize {
    data.iter().map(|e| e.labels.len()).sum()
}

impl Trainer {
    pub fn new(config: ModelConfig, mode: BatchMode) -> Result<Self> {
        let params = SelectorParams::init(&config)?;
        Self::with_params(config, mode, params)
    }

    pub fn with_params(
        config: ModelConfig,
        mode: BatchMode,
        params: SelectorParams,
    ) -> Result<Self> {
        params.validate(&config)?;
        // shuffling stream is independent of the initialization stream
        let rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed_5eed_5eed_5eed);
        Ok(Self {
            config,
            mode,
            params,
            rng,
            epoch: 0,
        })
    }

    pub fn params(&self) -> &SelectorParams {
        &self.params
    }

    pub fn into_params(self) -> SelectorParams {
        self.params
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    /// Mean per-candidate cross-entropy over the whole dataset.
    pub fn dataset_loss(&self, data: &[EpisodeExample]) -> Result<f64> {
        dataset_loss(&self.params, &self.config, data)
    }

    /// Full-dataset mean loss and gradient, weighting every candidate equally.
    pub fn dataset_gradient(&self, data: &[EpisodeExample]) -> Result<(f64, SelectorParams)> {
        if data.is_empty() {
            return Err(Error::EmptyInput("training data"));
        }
        let total = candidate_total(data) as f64;
        let mut acc = self.params.zeros_like();
        let mut loss_sum = 0.0;
        for example in data {
            let (l, g) = loss_and_grad(
                &example.inputs,
                &example.labels,
                &self.params,
                self.config.n_heads,
            )?;
            let weight = example.labels.len() as f64 / total;
            loss_sum += l * weight;
            for (a, (_, b)) in acc.tensors_mut().into_iter().zip(g.tensors()) {
                for (x, &y) in a.as_mut_slice().iter_mut().zip(b.as_slice()) {
                    *x += y * weight;
                }
            }
        }
        Ok((loss_sum, acc))
    }

    /// One pass over the data; returns the mean loss of the steps taken.
    pub fn run_epoch(&mut self, data: &[EpisodeExample]) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::EmptyInput("training data"));
        }
        let epoch = self.epoch;
        let lr = self.config.learning_rate;
        let mean = match self.mode {
            BatchMode::FullBatch => {
                let (l, grad) = self.dataset_gradient(data)?;
                if !l.is_finite() {
                    return Err(Error::NonFiniteLoss {
                        epoch,
                        step: 0,
                        loss: l,
                    });
                }
                self.params.descend(&grad, lr);
                l
            }
            BatchMode::PerEpisode => {
                let mut order: Vec<usize> = (0..data.len()).collect();
                order.shuffle(&mut self.rng);
                let mut sum = 0.0;
                for (step, &i) in order.iter().enumerate() {
                    let example = &data[i];
                    let (l, grad) = loss_and_grad(
                        &example.inputs,
                        &example.labels,
                        &self.params,
                        self.config.n_heads,
                    )?;
                    if !l.is_finite() {
                        return Err(Error::NonFiniteLoss {
                            epoch,
                            step,
                            loss: l,
                        });
                    }
                    self.params.descend(&grad, lr);
                    sum += l;
                }
                sum / data.len() as f64
            }
        };
        if !self.params.is_finite() {
            return Err(Error::NonFiniteLoss {
                epoch,
                step: data.len(),
                loss: f64::NAN,
            });
        }
        self.epoch += 1;
        Ok(mean)
    }
}

pub fn dataset_loss(
    params: &SelectorParams,
    config: &ModelConfig,
    data: &[EpisodeExample],
) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyInput("training data"));
    }
    let total = candidate_total(data) as f64;
    let mut sum = 0.0;
    for example in data {
        sum += loss(&example.inputs, &example.labels, params, config.n_heads)?
            * example.labels.len() as f64;
    }
    Ok(sum / total)
}

/// Fraction of candidates whose thresholded prediction (p > 0.5) matches the label.
pub fn accuracy(
    params: &SelectorParams,
    config: &ModelConfig,
    data: &[EpisodeExample],
) -> Result<f64> {
    let mut correct = 0usize;
    let mut total = 0usize;
    for example in data {
        let probs = predict(&example.inputs, params, config.n_heads)?;
        correct += probs
            .iter()
            .zip(&example.labels)
            .filter(|(&p, &l)| (p > 0.5) == l)
            .count();
        total += example.labels.len();
    }
    if total == 0 {
        return Err(Error::EmptyInput("evaluation data"));
    }
    Ok(correct as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: SelectorParams,
    /// Dataset loss at initialization followed by the loss after each epoch.
    pub losses: Vec<f64>,
}

/// Trains for `config.epochs` epochs from a seeded initialization.
pub fn train(
    data: &[EpisodeExample],
    config: &ModelConfig,
    mode: BatchMode,
) -> Result<TrainOutcome> {
    let mut trainer = Trainer::new(config.clone(), mode)?;
    let mut losses = Vec::with_capacity(config.epochs + 1);
    losses.push(trainer.dataset_loss(data)?);
    for _ in 0..config.epochs {
        trainer.run_epoch(data)?;
        let l = trainer.dataset_loss(data)?;
        if !l.is_finite() {
            return Err(Error::NonFiniteLoss {
                epoch: trainer.epoch(),
                step: 0,
                loss: l,
            });
        }
        losses.push(l);
    }
    Ok(TrainOutcome {
        params: trainer.into_params(),
        losses,
    })
}
