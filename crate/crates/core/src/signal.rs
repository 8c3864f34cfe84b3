//! Constellation mapping, oversampled OFDM synthesis and PAPR measurement.
//!
//! The time-domain signal of a block `X` of `N` subcarriers, oversampled by
//! `L`, is
//!
//! ```text
//! x[k] = 1/sqrt(N) * sum_{n=0}^{N-1} X[n] * exp(j*2*pi*n*k / (L*N)),   k = 0..L*N-1
//! ```
//!
//! which is an unnormalized length-`LN` inverse DFT of `X` followed by `(L-1)N`
//! zeros, scaled by `1/sqrt(N)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Oversampling factor used when none is given.
pub const DEFAULT_OVERSAMPLING: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Modulation {
    Qpsk,
    Qam16,
}

impl Modulation {
    pub fn name(self) -> &'static str {
        match self {
            Modulation::Qpsk => "qpsk",
            Modulation::Qam16 => "16qam",
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A unit-average-energy symbol alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    modulation: Modulation,
    points: Vec<Complex64>,
}

impl Constellation {
    pub fn new(modulation: Modulation) -> Self {
        match modulation {
            Modulation::Qpsk => Self::qpsk(),
            Modulation::Qam16 => Self::qam16(),
        }
    }

    /// QPSK at the four diagonal points `(±1 ± j)/sqrt(2)`.
    pub fn qpsk() -> Self {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let points = vec![
            Complex64::new(a, a),
            Complex64::new(-a, a),
            Complex64::new(-a, -a),
            Complex64::new(a, -a),
        ];
        Constellation {
            modulation: Modulation::Qpsk,
            points,
        }
    }

    /// Square 16-QAM on the `{±1, ±3}²` lattice, scaled by `1/sqrt(10)`.
    pub fn qam16() -> Self {
        let scale = 1.0 / 10f64.sqrt();
        let levels = [-3.0, -1.0, 1.0, 3.0];
        let points = levels
            .iter()
            .flat_map(|&i| levels.iter().map(move |&q| Complex64::new(i * scale, q * scale)))
            .collect();
        Constellation {
            modulation: Modulation::Qam16,
            points,
        }
    }

    pub fn modulation(&self) -> Modulation {
        self.modulation
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.points.contains(&z)
    }
}

/// One OFDM block in the frequency domain.
#[derive(Clone, Debug, PartialEq)]
pub struct OfdmBlock {
    symbols: Vec<Complex64>,
}

impl OfdmBlock {
    /// Wraps an arbitrary frequency-domain vector. Used for synthetic inputs;
    /// blocks drawn from a constellation come from [`map_symbols`].
    pub fn from_symbols(symbols: Vec<Complex64>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidInput("an OFDM block needs at least one subcarrier".into()));
        }
        Ok(OfdmBlock { symbols })
    }

    pub fn n(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[Complex64] {
        &self.symbols
    }

    /// Mean subcarrier energy `(1/N) * sum |X_n|^2`.
    pub fn mean_energy(&self) -> f64 {
        self.symbols.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.n() as f64
    }
}

/// An oversampled time-domain signal of `N * L` samples.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSignal {
    samples: Vec<Complex64>,
    oversampling: usize,
}

impl TimeSignal {
    pub fn new(samples: Vec<Complex64>, oversampling: usize) -> Result<Self> {
        if oversampling == 0 || samples.is_empty() || !samples.len().is_multiple_of(oversampling) {
            return Err(Error::InvalidInput(format!(
                "{} samples cannot carry oversampling factor {}",
                samples.len(),
                oversampling
            )));
        }
        Ok(TimeSignal {
            samples,
            oversampling,
        })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn oversampling(&self) -> usize {
        self.oversampling
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean_power(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }
}

pub fn map_symbols(indices: &[usize], constellation: &Constellation) -> Result<OfdmBlock> {
    let points = constellation.points();
    let symbols = indices
        .iter()
        .map(|&i| {
            points.get(i).copied().ok_or_else(|| {
                Error::InvalidInput(format!(
                    "symbol index {i} outside a {}-point constellation",
                    points.len()
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    OfdmBlock::from_symbols(symbols)
}

/// Oversampled IDFT backed by a cached FFT plan of length `N * L`.
///
/// Cloning is cheap and the plan is shared, so one instance can serve any
/// number of worker threads.
#[derive(Clone)]
pub struct Modulator {
    n: usize,
    oversampling: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Modulator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Modulator")
            .field("n", &self.n)
            .field("oversampling", &self.oversampling)
            .finish()
    }
}

impl Modulator {
    pub fn new(n: usize, oversampling: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("subcarrier count must be positive".into()));
        }
        if oversampling == 0 {
            return Err(Error::InvalidInput("oversampling factor must be at least 1".into()));
        }
        let fft = FftPlanner::new().plan_fft_inverse(n * oversampling);
        Ok(Modulator {
            n,
            oversampling,
            fft,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn oversampling(&self) -> usize {
        self.oversampling
    }

    /// Transforms a raw frequency vector of length `N` into `buf` (resized
    /// to `N * L`). Zero padding goes at the tail.
    pub fn transform_into(&self, freq: &[Complex64], buf: &mut Vec<Complex64>) -> Result<()> {
        if freq.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "expected {} subcarriers, got {}",
                self.n,
                freq.len()
            )));
        }
        let len = self.n * self.oversampling;
        buf.clear();
        buf.extend_from_slice(freq);
        buf.resize(len, Complex64::new(0.0, 0.0));
        self.fft.process(buf);
        let scale = 1.0 / (self.n as f64).sqrt();
        buf.iter_mut().for_each(|z| *z *= scale);
        Ok(())
    }

    pub fn modulate(&self, block: &OfdmBlock) -> Result<TimeSignal> {
        let mut buf = Vec::with_capacity(self.n * self.oversampling);
        self.transform_into(block.symbols(), &mut buf)?;
        TimeSignal::new(buf, self.oversampling)
    }
}

/// Oversampled IDFT of a block through the FFT.
pub fn oversampled_idft(block: &OfdmBlock, oversampling: usize) -> Result<TimeSignal> {
    Modulator::new(block.n(), oversampling)?.modulate(block)
}

/// Direct `O(N * NL)` evaluation of the oversampled synthesis sum.
///
/// Independent of the FFT path; used as a reference in checks.
pub fn direct_idft(freq: &[Complex64], oversampling: usize) -> Result<TimeSignal> {
    let n = freq.len();
    if n == 0 || oversampling == 0 {
        return Err(Error::InvalidInput("empty block or zero oversampling".into()));
    }
    let len = n * oversampling;
    let scale = 1.0 / (n as f64).sqrt();
    let samples = (0..len)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, &x) in freq.iter().enumerate() {
                // reduce n*k modulo LN before converting to keep the angle small
                let r = (i * k) % len;
                let theta = 2.0 * PI * r as f64 / len as f64;
                acc += x * Complex64::from_polar(1.0, theta);
            }
            acc * scale
        })
        .collect();
    TimeSignal::new(samples, oversampling)
}

/// Peak-to-average power ratio of raw samples (linear).
pub fn papr_of(samples: &[Complex64]) -> Result<f64> {
    let mut peak = 0.0f64;
    let mut total = 0.0f64;
    for z in samples {
        let p = z.norm_sqr();
        total += p;
        if p > peak {
            peak = p;
        }
    }
    if samples.is_empty() || total <= 0.0 {
        return Err(Error::DegenerateSignal);
    }
    Ok(peak / (total / samples.len() as f64))
}

pub fn papr(signal: &TimeSignal) -> Result<f64> {
    papr_of(signal.samples())
}

pub fn papr_db(ratio: f64) -> Result<f64> {
    if !(ratio > 0.0) {
        return Err(Error::InvalidInput(format!("PAPR ratio must be positive, got {ratio}")));
    }
    Ok(10.0 * ratio.log10())
}
