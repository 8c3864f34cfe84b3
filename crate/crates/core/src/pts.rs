//! Partial transmit sequences: sub-block partitioning, phase-weighted
//! combining and the PAPR objective.
//!
//! A block is split into `M` disjoint sub-blocks; each is transformed once,
//! and every candidate phase vector `b` is scored by combining the stored
//! time signals as `sum_m b_m * x_m`. No transform runs per candidate.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, RngExt};

use crate::error::{Error, Result};
use crate::signal::{papr_of, Modulator, OfdmBlock, TimeSignal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PartitionScheme {
    Random,
    Adjacent,
    Interleaved,
}

impl PartitionScheme {
    pub fn name(self) -> &'static str {
        match self {
            PartitionScheme::Random => "random",
            PartitionScheme::Adjacent => "adjacent",
            PartitionScheme::Interleaved => "interleaved",
        }
    }
}

impl fmt::Display for PartitionScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Assignment of each subcarrier to one of `M` sub-blocks. Every sub-block is
/// non-empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    m: usize,
    scheme: PartitionScheme,
}

impl Partition {
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn scheme(&self) -> PartitionScheme {
        self.scheme
    }

    /// Sizes of the `M` sub-blocks.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.m];
        for &id in &self.assignment {
            sizes[id] += 1;
        }
        sizes
    }
}

pub fn make_partition<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    scheme: PartitionScheme,
    rng: &mut R,
) -> Result<Partition> {
    if m == 0 || m > n {
        return Err(Error::InvalidInput(format!(
            "cannot split {n} subcarriers into {m} non-empty sub-blocks"
        )));
    }
    let assignment = match scheme {
        PartitionScheme::Interleaved => (0..n).map(|i| i % m).collect(),
        PartitionScheme::Adjacent => (0..n).map(|i| i * m / n).collect(),
        PartitionScheme::Random => loop {
            let draw: Vec<usize> = (0..n).map(|_| rng.random_range(0..m)).collect();
            let mut seen = vec![false; m];
            draw.iter().for_each(|&id| seen[id] = true);
            if seen.iter().all(|&s| s) {
                break draw;
            }
        },
    };
    Ok(Partition {
        assignment,
        m,
        scheme,
    })
}

/// The `W` allowed phase rotations `exp(j*2*pi*l/W)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSet {
    elements: Vec<Complex64>,
}

impl PhaseSet {
    pub fn new(w: usize) -> Result<Self> {
        if w < 2 {
            return Err(Error::InvalidInput(format!("phase set needs at least 2 elements, got {w}")));
        }
        let elements = (0..w)
            .map(|l| {
                // quarter turns are represented exactly
                if (4 * l) % w == 0 {
                    match 4 * l / w {
                        0 => Complex64::new(1.0, 0.0),
                        1 => Complex64::new(0.0, 1.0),
                        2 => Complex64::new(-1.0, 0.0),
                        _ => Complex64::new(0.0, -1.0),
                    }
                } else {
                    Complex64::from_polar(1.0, 2.0 * PI * l as f64 / w as f64)
                }
            })
            .collect();
        Ok(PhaseSet { elements })
    }

    pub fn w(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Complex64] {
        &self.elements
    }

    pub fn element(&self, index: usize) -> Complex64 {
        self.elements[index]
    }
}

/// `M` phase factors, stored as indices into a [`PhaseSet`] of size `w`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PhaseVector {
    w: usize,
    indices: Vec<usize>,
}

impl PhaseVector {
    pub fn new(w: usize, indices: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= w) {
            return Err(Error::InvalidInput(format!("phase index {bad} outside a set of {w}")));
        }
        Ok(PhaseVector { w, indices })
    }

    /// The all-ones vector: no rotation on any sub-block.
    pub fn identity(w: usize, m: usize) -> Self {
        PhaseVector {
            w,
            indices: vec![0; m],
        }
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn index(&self, m: usize) -> usize {
        self.indices[m]
    }

    pub fn set_index(&mut self, m: usize, index: usize) {
        assert!(index < self.w, "phase index {index} outside a set of {}", self.w);
        self.indices[m] = index;
    }

    pub fn first_is_fixed(&self) -> bool {
        self.indices.first().is_none_or(|&i| i == 0)
    }

    pub fn factors(&self, set: &PhaseSet) -> Vec<Complex64> {
        self.indices.iter().map(|&i| set.element(i)).collect()
    }

    /// Multiplies every factor by the set element at `index` (a global rotation).
    pub fn rotated(&self, index: usize) -> Self {
        PhaseVector {
            w: self.w,
            indices: self.indices.iter().map(|&i| (i + index) % self.w).collect(),
        }
    }

    /// Draws each coordinate uniformly; coordinate 0 is pinned to 1 when
    /// `fixed_first` is set.
    pub fn random<R: Rng + ?Sized>(w: usize, m: usize, fixed_first: bool, rng: &mut R) -> Self {
        let indices = (0..m)
            .map(|i| if i == 0 && fixed_first { 0 } else { rng.random_range(0..w) })
            .collect();
        PhaseVector { w, indices }
    }
}

impl fmt::Display for PhaseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.indices.iter().map(|i| i.to_string()).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

/// Time-domain signals of the `M` sub-blocks of one OFDM block, stored
/// split into real and imaginary planes of `M * N * L` values each.
#[derive(Clone, Debug, PartialEq)]
pub struct SubblockSignals {
    n: usize,
    oversampling: usize,
    m: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl SubblockSignals {
    /// Builds from explicit time signals; all must share one length.
    pub fn from_signals(signals: &[Vec<Complex64>], n: usize, oversampling: usize) -> Result<Self> {
        let len = n * oversampling;
        if signals.is_empty() || len == 0 {
            return Err(Error::InvalidInput("need at least one non-empty sub-block".into()));
        }
        if let Some(bad) = signals.iter().find(|s| s.len() != len) {
            return Err(Error::InvalidInput(format!(
                "sub-block of {} samples, expected {len}",
                bad.len()
            )));
        }
        let re = signals.iter().flat_map(|s| s.iter().map(|z| z.re)).collect();
        let im = signals.iter().flat_map(|s| s.iter().map(|z| z.im)).collect();
        Ok(SubblockSignals {
            n,
            oversampling,
            m: signals.len(),
            re,
            im,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn oversampling(&self) -> usize {
        self.oversampling
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Samples per signal (`N * L`).
    pub fn len(&self) -> usize {
        self.n * self.oversampling
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn signal(&self, m: usize) -> Vec<Complex64> {
        let (re, im) = self.planes(m);
        re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect()
    }

    fn planes(&self, m: usize) -> (&[f64], &[f64]) {
        let len = self.len();
        let r = m * len..(m + 1) * len;
        (&self.re[r.clone()], &self.im[r])
    }

    fn check(&self, b: &PhaseVector) -> Result<()> {
        if b.len() != self.m {
            return Err(Error::InvalidInput(format!(
                "phase vector of length {} for {} sub-blocks",
                b.len(),
                self.m
            )));
        }
        Ok(())
    }

    /// General complex-weighted combination `sum_m b_m * x_m` into the
    /// scratch planes.
    fn combine_general(&self, factors: &[Complex64], out_re: &mut [f64], out_im: &mut [f64]) {
        out_re.fill(0.0);
        out_im.fill(0.0);
        for (m, b) in factors.iter().enumerate() {
            let (re, im) = self.planes(m);
            let (c, s) = (b.re, b.im);
            for k in 0..out_re.len() {
                out_re[k] += c * re[k] - s * im[k];
                out_im[k] += c * im[k] + s * re[k];
            }
        }
    }

    pub fn combine(&self, b: &PhaseVector) -> Result<TimeSignal> {
        self.check(b)?;
        let set = PhaseSet::new(b.w())?;
        let len = self.len();
        let (mut re, mut im) = (vec![0.0; len], vec![0.0; len]);
        self.combine_general(&b.factors(&set), &mut re, &mut im);
        let samples = re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect();
        TimeSignal::new(samples, self.oversampling)
    }
}

pub fn split_and_transform(
    block: &OfdmBlock,
    partition: &Partition,
    modulator: &Modulator,
) -> Result<SubblockSignals> {
    if partition.n() != block.n() || modulator.n() != block.n() {
        return Err(Error::InvalidInput(format!(
            "block of {} subcarriers, partition of {}, modulator of {}",
            block.n(),
            partition.n(),
            modulator.n()
        )));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut freq = vec![zero; block.n()];
    let mut buf = Vec::with_capacity(block.n() * modulator.oversampling());
    let mut signals = Vec::with_capacity(partition.m());
    for m in 0..partition.m() {
        for (slot, (&x, &id)) in freq
            .iter_mut()
            .zip(block.symbols().iter().zip(partition.assignment()))
        {
            *slot = if id == m { x } else { zero };
        }
        modulator.transform_into(&freq, &mut buf)?;
        signals.push(buf.clone());
    }
    SubblockSignals::from_signals(&signals, block.n(), modulator.oversampling())
}

pub fn combine(subblocks: &SubblockSignals, b: &PhaseVector) -> Result<TimeSignal> {
    subblocks.combine(b)
}

/// PAPR of the combination under `b`, via the general complex-weighted path.
pub fn objective(subblocks: &SubblockSignals, b: &PhaseVector) -> Result<f64> {
    papr_of(combine(subblocks, b)?.samples())
}

/// ABC nectar amount `1 / (1 + f)`.
pub fn fitness(f_value: f64) -> Result<f64> {
    if !(f_value >= 0.0) {
        return Err(Error::InvalidInput(format!("objective value must be non-negative, got {f_value}")));
    }
    Ok(1.0 / (1.0 + f_value))
}

/// A phase-vector cost function, as seen by the search strategies.
pub trait Objective {
    fn subblock_count(&self) -> usize;

    fn phase_set(&self) -> &PhaseSet;

    fn evaluate(&mut self, b: &PhaseVector) -> Result<f64>;
}

impl<O: Objective + ?Sized> Objective for &mut O {
    fn subblock_count(&self) -> usize {
        (**self).subblock_count()
    }

    fn phase_set(&self) -> &PhaseSet {
        (**self).phase_set()
    }

    fn evaluate(&mut self, b: &PhaseVector) -> Result<f64> {
        (**self).evaluate(b)
    }
}

/// Sub-blocks per group in the binary partial-sum table.
const GROUP: usize = 4;

/// Samples combined per pass, small enough to keep accumulators in L1.
const CHUNK: usize = 256;

/// Signed partial sums for `W = 2`. Sub-blocks are taken in groups of
/// [`GROUP`]; for each group every sign pattern with the group's first
/// factor at `+1` is summed once up front, so a candidate costs one signed
/// add per group instead of one per sub-block. Only additions and
/// subtractions of the stored signals are involved.
#[derive(Clone, Debug)]
struct BinaryTable {
    /// (first sub-block, group size, offset of pattern 0 in signals)
    groups: Vec<(usize, usize, usize)>,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl BinaryTable {
    fn new(sub: &SubblockSignals) -> Self {
        let len = sub.len();
        let mut groups = Vec::new();
        let (mut re, mut im) = (Vec::new(), Vec::new());
        let mut slot = 0;
        for first in (0..sub.m).step_by(GROUP) {
            let size = GROUP.min(sub.m - first);
            groups.push((first, size, slot));
            for pattern in 0..1usize << (size - 1) {
                let (r0, i0) = sub.planes(first);
                let mut acc_re = r0.to_vec();
                let mut acc_im = i0.to_vec();
                for t in 1..size {
                    let (r, i) = sub.planes(first + t);
                    if pattern >> (t - 1) & 1 == 0 {
                        acc_re.iter_mut().zip(r).for_each(|(a, x)| *a += x);
                        acc_im.iter_mut().zip(i).for_each(|(a, x)| *a += x);
                    } else {
                        acc_re.iter_mut().zip(r).for_each(|(a, x)| *a -= x);
                        acc_im.iter_mut().zip(i).for_each(|(a, x)| *a -= x);
                    }
                }
                re.extend_from_slice(&acc_re);
                im.extend_from_slice(&acc_im);
                slot += 1;
            }
        }
        debug_assert_eq!(re.len(), slot * len);
        BinaryTable { groups, re, im }
    }

    /// `(sign, table slot)` per group for the binary vector `b`.
    fn terms(&self, b: &PhaseVector, out: &mut Vec<(f64, usize)>) {
        out.clear();
        let idx = b.indices();
        for &(first, size, slot) in &self.groups {
            let lead = idx[first];
            let pattern = (1..size).fold(0, |p, t| p | (idx[first + t] ^ lead) << (t - 1));
            out.push((if lead == 0 { 1.0 } else { -1.0 }, slot + pattern));
        }
    }
}

/// Streams `sum_t sign_t * x_t` chunk by chunk and returns (peak, total)
/// power. `terms` index signals of length `len` inside `re`/`im`.
fn accumulate_power(re: &[f64], im: &[f64], len: usize, terms: &[(f64, usize)]) -> (f64, f64) {
    let mut acc_re = [0.0f64; CHUNK];
    let mut acc_im = [0.0f64; CHUNK];
    let mut peak = 0.0f64;
    let mut total = 0.0f64;
    let mut start = 0;
    while start < len {
        let width = CHUNK.min(len - start);
        let (ar, ai) = (&mut acc_re[..width], &mut acc_im[..width]);
        for (t, &(sign, slot)) in terms.iter().enumerate() {
            let base = slot * len + start;
            let (xr, xi) = (&re[base..base + width], &im[base..base + width]);
            if t == 0 {
                ar.iter_mut().zip(xr).for_each(|(a, x)| *a = sign * x);
                ai.iter_mut().zip(xi).for_each(|(a, x)| *a = sign * x);
            } else if sign > 0.0 {
                ar.iter_mut().zip(xr).for_each(|(a, x)| *a += x);
                ai.iter_mut().zip(xi).for_each(|(a, x)| *a += x);
            } else {
                ar.iter_mut().zip(xr).for_each(|(a, x)| *a -= x);
                ai.iter_mut().zip(xi).for_each(|(a, x)| *a -= x);
            }
        }
        for (a, b) in ar.iter().zip(ai.iter()) {
            let p = a * a + b * b;
            total += p;
            if p > peak {
                peak = p;
            }
        }
        start += width;
    }
    (peak, total)
}

/// PAPR of the PTS combination, with reusable scratch buffers.
///
/// For `W = 2` candidates are scored from a table of signed partial sums
/// (additions and subtractions only). The value for a given `b` is
/// bit-identical across calls, so results reported by different strategies
/// compare exactly.
#[derive(Clone, Debug)]
pub struct PtsObjective<'a> {
    subblocks: &'a SubblockSignals,
    set: PhaseSet,
    binary: Option<BinaryTable>,
    terms: Vec<(f64, usize)>,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl<'a> PtsObjective<'a> {
    pub fn new(subblocks: &'a SubblockSignals, w: usize) -> Result<Self> {
        let set = PhaseSet::new(w)?;
        let binary = (w == 2).then(|| BinaryTable::new(subblocks));
        let len = if binary.is_some() { 0 } else { subblocks.len() };
        Ok(PtsObjective {
            subblocks,
            set,
            binary,
            terms: Vec::with_capacity(subblocks.m()),
            re: vec![0.0; len],
            im: vec![0.0; len],
        })
    }

    pub fn subblocks(&self) -> &SubblockSignals {
        self.subblocks
    }
}

impl Objective for PtsObjective<'_> {
    fn subblock_count(&self) -> usize {
        self.subblocks.m()
    }

    fn phase_set(&self) -> &PhaseSet {
        &self.set
    }

    fn evaluate(&mut self, b: &PhaseVector) -> Result<f64> {
        self.subblocks.check(b)?;
        if b.w() != self.set.w() {
            return Err(Error::InvalidInput(format!(
                "phase vector over W={} for an objective over W={}",
                b.w(),
                self.set.w()
            )));
        }
        let len = self.subblocks.len();
        let (peak, total) = match &self.binary {
            Some(table) => {
                table.terms(b, &mut self.terms);
                accumulate_power(&table.re, &table.im, len, &self.terms)
            }
            None => {
                let factors = b.factors(&self.set);
                self.subblocks.combine_general(&factors, &mut self.re, &mut self.im);
                accumulate_power(&self.re, &self.im, len, &[(1.0, 0)])
            }
        };
        if total <= 0.0 {
            return Err(Error::DegenerateSignal);
        }
        Ok(peak / (total / len as f64))
    }
}

/// Counts calls through to the wrapped objective.
#[derive(Clone, Debug)]
pub struct CountingObjective<O> {
    inner: O,
    calls: u64,
}

impl<O: Objective> CountingObjective<O> {
    pub fn new(inner: O) -> Self {
        CountingObjective { inner, calls: 0 }
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<O: Objective> Objective for CountingObjective<O> {
    fn subblock_count(&self) -> usize {
        self.inner.subblock_count()
    }

    fn phase_set(&self) -> &PhaseSet {
        self.inner.phase_set()
    }

    fn evaluate(&mut self, b: &PhaseVector) -> Result<f64> {
        self.calls += 1;
        self.inner.evaluate(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{map_symbols, Constellation};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn toy() -> SubblockSignals {
        SubblockSignals::from_signals(&[vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]], 2, 1)
            .unwrap()
    }

    fn random_block(n: usize, rng: &mut ChaCha8Rng) -> OfdmBlock {
        let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..16)).collect();
        map_symbols(&idx, &Constellation::qam16()).unwrap()
    }

    #[test]
    fn deterministic_partitions() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = make_partition(8, 4, PartitionScheme::Interleaved, &mut rng).unwrap();
        assert_eq!(p.assignment(), &[0, 1, 2, 3, 0, 1, 2, 3]);
        let p = make_partition(8, 2, PartitionScheme::Adjacent, &mut rng).unwrap();
        assert_eq!(p.assignment(), &[0, 0, 0, 0, 1, 1, 1, 1]);
    }

    #[test]
    fn random_partition_covers_every_subblock() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let p = make_partition(256, 16, PartitionScheme::Random, &mut rng).unwrap();
        assert!(p.sizes().iter().all(|&s| s > 0));
        assert_eq!(p.sizes().iter().sum::<usize>(), 256);
        // tight case forces resampling until a permutation comes up
        let p = make_partition(4, 4, PartitionScheme::Random, &mut rng).unwrap();
        assert_eq!(p.sizes(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn partition_rejects_bad_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(make_partition(4, 5, PartitionScheme::Adjacent, &mut rng).is_err());
        assert!(make_partition(4, 0, PartitionScheme::Adjacent, &mut rng).is_err());
    }

    #[test]
    fn phase_set_elements() {
        for w in [2, 3, 4, 8] {
            let set = PhaseSet::new(w).unwrap();
            for (i, a) in set.elements().iter().enumerate() {
                assert!((a.norm() - 1.0).abs() < 1e-15);
                for b in &set.elements()[i + 1..] {
                    assert!((a - b).norm() > 1e-3);
                }
            }
        }
        assert_eq!(PhaseSet::new(4).unwrap().element(1), c(0.0, 1.0));
        assert!(PhaseSet::new(1).is_err());
    }

    #[test]
    fn subblocks_sum_to_full_signal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let block = random_block(64, &mut rng);
        let modulator = Modulator::new(64, 4).unwrap();
        let full = modulator.modulate(&block).unwrap();
        for m in [1, 4, 16] {
            let part = make_partition(64, m, PartitionScheme::Random, &mut rng).unwrap();
            let sub = split_and_transform(&block, &part, &modulator).unwrap();
            let ones = sub.combine(&PhaseVector::identity(2, m)).unwrap();
            let scale = full.samples().iter().map(|z| z.norm()).fold(0.0, f64::max);
            for (a, b) in ones.samples().iter().zip(full.samples()) {
                assert!((a - b).norm() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn split_rejects_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let block = random_block(16, &mut rng);
        let part = make_partition(8, 2, PartitionScheme::Adjacent, &mut rng).unwrap();
        let modulator = Modulator::new(16, 4).unwrap();
        assert!(split_and_transform(&block, &part, &modulator).is_err());
    }

    #[test]
    fn single_carrier_subblock_has_constant_modulus() {
        let mut x = vec![c(0.0, 0.0); 8];
        x[0] = c(1.0, 0.0);
        x[5] = c(0.0, 1.0);
        let block = OfdmBlock::from_symbols(x).unwrap();
        let part = make_partition(8, 8, PartitionScheme::Interleaved, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let sub = split_and_transform(&block, &part, &Modulator::new(8, 4).unwrap()).unwrap();
        let s5 = sub.signal(5);
        assert!(s5.iter().all(|z| (z.norm() - 1.0 / 8f64.sqrt()).abs() < 1e-12));
    }

    #[test]
    fn toy_combination_and_objective() {
        let sub = toy();
        let b = PhaseVector::new(2, vec![0, 1]).unwrap();
        assert_eq!(sub.combine(&b).unwrap().samples(), &[c(0.0, 0.0), c(1.0, 0.0)]);
        // (1,1): samples [2,1], peak 4, mean 2.5 -> 1.6; (1,-1): [0,1], peak 1, mean 0.5 -> 2.0
        assert!((objective(&sub, &PhaseVector::identity(2, 2)).unwrap() - 1.6).abs() < 1e-12);
        assert!((objective(&sub, &b).unwrap() - 2.0).abs() < 1e-12);
        let mut obj = PtsObjective::new(&sub, 2).unwrap();
        assert!((obj.evaluate(&b).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_and_degenerate_errors() {
        let sub = toy();
        assert!(sub.combine(&PhaseVector::identity(2, 3)).is_err());
        let zero = SubblockSignals::from_signals(&[vec![c(1.0, 0.0)], vec![c(1.0, 0.0)]], 1, 1).unwrap();
        let b = PhaseVector::new(2, vec![0, 1]).unwrap();
        assert_eq!(objective(&zero, &b), Err(Error::DegenerateSignal));
        let mut obj = PtsObjective::new(&zero, 2).unwrap();
        assert_eq!(obj.evaluate(&b), Err(Error::DegenerateSignal));
        assert!(obj.evaluate(&PhaseVector::identity(4, 2)).is_err());
    }

    #[test]
    fn coherent_alignment_peaks_at_n() {
        // one carrier per sub-block; b_m undoes each symbol's phase so all terms align at k=0
        let n = 8;
        let x: Vec<Complex64> = (0..n).map(|i| if i % 2 == 0 { c(1.0, 0.0) } else { c(-1.0, 0.0) }).collect();
        let block = OfdmBlock::from_symbols(x).unwrap();
        let part = make_partition(n, n, PartitionScheme::Interleaved, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let sub = split_and_transform(&block, &part, &Modulator::new(n, 4).unwrap()).unwrap();
        let b = PhaseVector::new(2, (0..n).map(|i| i % 2).collect()).unwrap();
        assert!((objective(&sub, &b).unwrap() - n as f64).abs() < 1e-9);
    }

    #[test]
    fn fitness_values() {
        assert_eq!(fitness(1.0).unwrap(), 0.5);
        assert_eq!(fitness(0.0).unwrap(), 1.0);
        assert_eq!(fitness(3.0).unwrap(), 0.25);
        assert!(fitness(-0.1).is_err());
        assert!(fitness(2.0).unwrap() > fitness(2.5).unwrap());
    }

    fn fixture(seed: u64) -> (SubblockSignals, ChaCha8Rng) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let block = random_block(64, &mut rng);
        let part = make_partition(64, 8, PartitionScheme::Random, &mut rng).unwrap();
        let sub = split_and_transform(&block, &part, &Modulator::new(64, 4).unwrap()).unwrap();
        (sub, rng)
    }

    #[test]
    fn average_power_independent_of_phases() {
        for w in [2, 4] {
            let (sub, mut rng) = fixture(11);
            let powers: Vec<f64> = (0..100)
                .map(|_| sub.combine(&PhaseVector::random(w, 8, false, &mut rng)).unwrap().mean_power())
                .collect();
            let lo = powers.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = powers.iter().cloned().fold(0.0, f64::max);
            assert!((hi - lo) / hi < 1e-9);
        }
    }

    #[test]
    fn global_rotation_leaves_objective_unchanged() {
        for w in [2, 4, 8] {
            let (sub, mut rng) = fixture(5);
            let mut obj = PtsObjective::new(&sub, w).unwrap();
            for _ in 0..20 {
                let b = PhaseVector::random(w, 8, false, &mut rng);
                let f = obj.evaluate(&b).unwrap();
                for r in 0..w {
                    let g = obj.evaluate(&b.rotated(r)).unwrap();
                    assert!((f - g).abs() <= 1e-12 * f);
                }
            }
        }
    }

    #[test]
    fn binary_path_matches_general_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let block = random_block(64, &mut rng);
        let modulator = Modulator::new(64, 4).unwrap();
        for m in [1, 2, 5, 7, 8, 16] {
            let part = make_partition(64, m, PartitionScheme::Random, &mut rng).unwrap();
            let sub = split_and_transform(&block, &part, &modulator).unwrap();
            let mut obj = PtsObjective::new(&sub, 2).unwrap();
            for _ in 0..100 {
                let b = PhaseVector::random(2, m, false, &mut rng);
                let fast = obj.evaluate(&b).unwrap();
                let general = objective(&sub, &b).unwrap();
                assert!((fast - general).abs() <= 1e-12 * general, "m={m}");
                // global sign flip is exact on the binary path
                assert_eq!(fast, obj.evaluate(&b.rotated(1)).unwrap());
            }
        }
    }

    #[test]
    fn counting_wrapper_counts() {
        let sub = toy();
        let mut obj = CountingObjective::new(PtsObjective::new(&sub, 2).unwrap());
        for _ in 0..5 {
            obj.evaluate(&PhaseVector::identity(2, 2)).unwrap();
        }
        assert_eq!(obj.calls(), 5);
    }
}
