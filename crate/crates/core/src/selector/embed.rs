//! Context embedding providers.
//!
//! The full pretrained segment encoder sits behind [`ContextProvider`]. The
//! stub provider hashes each text into a deterministic unit vector.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hash::{fnv1a64, SplitMix64};

pub trait ContextProvider {
    type Error: From<Error>;

    /// One `dim`-wide vector per text, in order.
    fn embed(&self, texts: &[&str], dim: usize)
        -> core::result::Result<Vec<Vec<f64>>, Self::Error>;
}

/// Deterministic unit vector for `text`; see [`crate::hash`] for the exact
/// construction.
pub fn stub_embedding(text: &str, dim: usize) -> Vec<f64> {
    let mut rng = SplitMix64::new(fnv1a64(text.as_bytes()));
    let mut v: Vec<f64> = (0..dim).map(|_| rng.next_signed_unit()).collect();
    let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StubProvider;

impl ContextProvider for StubProvider {
    type Error = Error;

    fn embed(&self, texts: &[&str], dim: usize) -> Result<Vec<Vec<f64>>> {
        Ok(texts.iter().map(|t| stub_embedding(t, dim)).collect())
    }
}

/// All-zero context, leaving only surface features and positions.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroProvider;

impl ContextProvider for ZeroProvider {
    type Error = Error;

    fn embed(&self, texts: &[&str], dim: usize) -> Result<Vec<Vec<f64>>> {
        Ok(texts.iter().map(|_| alloc::vec![0.0; dim]).collect())
    }
}

/// Checks a provider response: one vector per text, each `dim` wide and finite.
pub fn check_embeddings(vectors: &[Vec<f64>], n_texts: usize, dim: usize) -> Result<()> {
    if vectors.len() != n_texts {
        return Err(Error::ShapeMismatch {
            what: "embedding count",
            expected: n_texts,
            found: vectors.len(),
        });
    }
    for v in vectors {
        if v.len() != dim {
            return Err(Error::ShapeMismatch {
                what: "embedding width",
                expected: dim,
                found: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(alloc::string::String::from(
                "non-finite embedding value",
            )));
        }
    }
    Ok(())
}
