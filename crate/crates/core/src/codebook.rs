//! Index-modulation codebooks.
//!
//! Every scheme is reduced to a flat list of `2^eta` transmit vectors of length
//! `n_t`. Non-quadrature labels are laid out as `[activation | symbol]`,
//! quadrature labels as `[in-phase activation | quadrature activation | symbol]`,
//! with natural binary on the activation index and Gray coding inside the QAM
//! constellation. Antenna indices are zero-based.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use num_integer::binomial;

use crate::error::{Error, Result};
use crate::qam::Constellation;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Ssk,
    Gssk,
    Sm,
    Gsm,
    Qssk,
    Gqssk,
    Qsm,
    Gqsm,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 8] = [
        SchemeKind::Ssk,
        SchemeKind::Gssk,
        SchemeKind::Sm,
        SchemeKind::Gsm,
        SchemeKind::Qssk,
        SchemeKind::Gqssk,
        SchemeKind::Qsm,
        SchemeKind::Gqsm,
    ];

    /// In-phase and quadrature parts ride on separately selected antennas.
    pub fn is_quadrature(self) -> bool {
        matches!(self, Self::Qssk | Self::Gqssk | Self::Qsm | Self::Gqsm)
    }

    /// Carries a QAM symbol in addition to the index bits.
    pub fn is_modulated(self) -> bool {
        matches!(self, Self::Sm | Self::Gsm | Self::Qsm | Self::Gqsm)
    }

    /// Any number of active antennas per index group is allowed.
    pub fn is_generalized(self) -> bool {
        matches!(self, Self::Gssk | Self::Gsm | Self::Gqssk | Self::Gqsm)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Ssk => "SSK",
            Self::Gssk => "GSSK",
            Self::Sm => "SM",
            Self::Gsm => "GSM",
            Self::Qssk => "QSSK",
            Self::Gqssk => "GQSSK",
            Self::Qsm => "QSM",
            Self::Gqsm => "GQSM",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidScheme(format!("unknown scheme name `{s}`")))
    }
}

/// Which scheme, how many antennas, and which constellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeSpec {
    pub kind: SchemeKind,
    pub n_t: usize,
    pub n_a: usize,
    /// Constellation order; always 1 for the shift-keying schemes.
    pub m: usize,
}

impl SchemeSpec {
    /// Validates and builds a spec. For SSK/GSSK/QSSK/GQSSK the modulation
    /// order is ignored and stored as 1.
    pub fn new(kind: SchemeKind, n_t: usize, n_a: usize, m: usize) -> Result<Self> {
        let m = if kind.is_modulated() { m } else { 1 };
        let spec = Self { kind, n_t, n_a, m };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScheme(msg));
        if self.n_t < 2 {
            return bad(format!("n_t = {} (need at least 2 antennas)", self.n_t));
        }
        if self.n_a == 0 || self.n_a > self.n_t {
            return bad(format!("n_a = {} must lie in 1..={}", self.n_a, self.n_t));
        }
        if !self.kind.is_generalized() && self.n_a != 1 {
            return bad(format!("{} activates exactly one antenna per group, got n_a = {}", self.kind, self.n_a));
        }
        if self.m == 0 || !self.m.is_power_of_two() {
            return bad(format!("modulation order {} is not a power of two", self.m));
        }
        if !self.kind.is_modulated() && self.m != 1 {
            return bad(format!("{} carries no QAM symbol", self.kind));
        }
        if self.kind.is_quadrature() && self.kind.is_modulated() && self.m < 4 {
            return bad(format!("{} needs a complex constellation (M >= 4), got M = {}", self.kind, self.m));
        }
        if index_bits(self.n_t, self.n_a) == 0 {
            return bad(format!("C({}, {}) < 2 leaves no index bits", self.n_t, self.n_a));
        }
        Ok(())
    }

    /// Index bits per activation group, `floor(log2 C(n_t, n_a))`.
    pub fn index_bits(&self) -> usize {
        index_bits(self.n_t, self.n_a)
    }

    pub fn symbol_bits(&self) -> usize {
        self.m.trailing_zeros() as usize
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(nt={},na={}", self.kind, self.n_t, self.n_a)?;
        if self.kind.is_modulated() {
            write!(f, ",M={}", self.m)?;
        }
        f.write_str(")")
    }
}

/// `floor(log2 C(n_t, n_a))`, or 0 when the binomial is below 2.
pub fn index_bits(n_t: usize, n_a: usize) -> usize {
    if n_a > n_t {
        return 0;
    }
    let c = binomial(n_t as u128, n_a as u128);
    if c < 2 {
        0
    } else {
        c.ilog2() as usize
    }
}

/// Bits per channel use.
pub fn spectral_efficiency(spec: &SchemeSpec) -> Result<usize> {
    spec.validate()?;
    let idx = spec.index_bits();
    let groups = if spec.kind.is_quadrature() { 2 } else { 1 };
    Ok(groups * idx + spec.symbol_bits())
}

/// The first `2^floor(log2 C(n_t, n_a))` size-`n_a` antenna subsets in
/// lexicographic order.
pub fn enumerate_legal_activations(n_t: usize, n_a: usize) -> Result<Vec<Vec<usize>>> {
    if n_a == 0 || n_a > n_t {
        return Err(Error::InvalidScheme(format!("n_a = {n_a} must lie in 1..={n_t}")));
    }
    let keep = 1usize << index_bits(n_t, n_a);
    Ok((0..n_t).combinations(n_a).take(keep).collect())
}

/// One transmit hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct Codeword {
    pub label: usize,
    pub active_re: Vec<usize>,
    pub active_im: Vec<usize>,
    pub symbol: C64,
    pub tx_vector: DVector<C64>,
    support: Vec<(usize, C64)>,
}

impl Codeword {
    /// Non-zero entries of `tx_vector` as `(antenna, value)`.
    pub fn support(&self) -> &[(usize, C64)] {
        &self.support
    }

    /// `h * tx_vector`, touching only the active columns.
    pub fn project(&self, h: &DMatrix<C64>) -> DVector<C64> {
        let mut out = DVector::zeros(h.nrows());
        self.project_into(h, C64::new(1.0, 0.0), out.as_mut_slice());
        out
    }

    /// Writes `scale * h * tx_vector` into `out`.
    pub fn project_into(&self, h: &DMatrix<C64>, scale: C64, out: &mut [C64]) {
        out.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for &(col, val) in &self.support {
            let coef = val * scale;
            for (r, o) in out.iter_mut().enumerate() {
                *o += h[(r, col)] * coef;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Codebook {
    pub spec: SchemeSpec,
    pub eta: usize,
    pub words: Vec<Codeword>,
    pub legal_activations: Vec<Vec<usize>>,
    constellation: Constellation,
}

impl Codebook {
    pub fn build(spec: SchemeSpec) -> Result<Self> {
        let eta = spectral_efficiency(&spec)?;
        let legal = enumerate_legal_activations(spec.n_t, spec.n_a)?;
        let constellation = if spec.kind.is_modulated() {
            Constellation::qam(spec.m)?
        } else {
            Constellation::qam(1)?
        };
        let idx_bits = spec.index_bits();
        let sym_bits = spec.symbol_bits();
        let inv_sqrt_na = 1.0 / (spec.n_a as f64).sqrt();
        let fixed_qssk = C64::new(1.0, 1.0) / 2f64.sqrt();

        let words = (0..1usize << eta)
            .map(|label| {
                let sym_idx = label & ((1 << sym_bits) - 1);
                let rest = label >> sym_bits;
                let symbol = match (spec.kind.is_quadrature(), spec.kind.is_modulated()) {
                    (true, false) => fixed_qssk,
                    _ => constellation.point(sym_idx),
                };
                let mut x = DVector::<C64>::zeros(spec.n_t);
                let (active_re, active_im) = if spec.kind.is_quadrature() {
                    let re = legal[rest >> idx_bits].clone();
                    let im = legal[rest & ((1 << idx_bits) - 1)].clone();
                    for &a in &re {
                        x[a] += C64::new(symbol.re * inv_sqrt_na, 0.0);
                    }
                    for &a in &im {
                        x[a] += C64::new(0.0, symbol.im * inv_sqrt_na);
                    }
                    (re, im)
                } else {
                    let act = legal[rest].clone();
                    for &a in &act {
                        x[a] = symbol * inv_sqrt_na;
                    }
                    (act.clone(), act)
                };
                let support = x
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| v.norm_sqr() > 0.0)
                    .map(|(i, v)| (i, *v))
                    .collect();
                Codeword { label, active_re, active_im, symbol, tx_vector: x, support }
            })
            .collect();

        Ok(Self { spec, eta, words, legal_activations: legal, constellation })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    /// Label of the codeword whose transmit vector equals `x` (to 1e-12).
    pub fn label_of(&self, x: &DVector<C64>) -> Option<usize> {
        self.words
            .iter()
            .find(|w| (&w.tx_vector - x).norm() < 1e-12)
            .map(|w| w.label)
    }

    /// Hamming distance between the `eta`-bit labels `j` and `k`.
    pub fn bit_errors(&self, j: usize, k: usize) -> u32 {
        bit_errors(j, k)
    }

    /// Mean of `|x|^2` over the codebook.
    pub fn mean_power(&self) -> f64 {
        self.words.iter().map(|w| w.tx_vector.norm_squared()).sum::<f64>() / self.len() as f64
    }
}

pub fn bit_errors(j: usize, k: usize) -> u32 {
    (j ^ k).count_ones()
}
