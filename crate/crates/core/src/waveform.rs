use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Mono sample sequence at a fixed rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Waveform {
    /// Rejects a zero sample rate and non-finite samples.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Domain("sample rate must be positive"));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidValue("waveform contains non-finite samples"));
        }
        Ok(Waveform {
            samples,
            sample_rate,
        })
    }

    pub fn silence(len: usize, sample_rate: u32) -> Result<Self> {
        Self::new(alloc::vec![0.0; len], sample_rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn nyquist(&self) -> f64 {
        self.sample_rate as f64 / 2.0
    }

    /// Energy-normalized RMS.
    pub fn rms(&self) -> f64 {
        rms(&self.samples)
    }

    /// Copy of `samples[start..end]`.
    pub fn slice(&self, start: usize, end: usize) -> Waveform {
        Waveform {
            samples: self.samples[start..end].to_vec(),
            sample_rate: self.sample_rate,
        }
    }
}

pub(crate) fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    libm::sqrt(x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_bad_input() {
        assert!(Waveform::new(vec![0.0], 0).is_err());
        assert!(Waveform::new(vec![f64::NAN], 44100).is_err());
        assert!(Waveform::new(vec![f64::INFINITY], 44100).is_err());
        assert!(Waveform::new(vec![], 44100).unwrap().is_empty());
    }

    #[test]
    fn rms_of_constant() {
        let w = Waveform::new(vec![-0.5; 10], 8000).unwrap();
        assert_eq!(w.rms(), 0.5);
    }
}
