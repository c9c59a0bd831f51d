//! Probability measures on infinite strings over a finite alphabet.
//!
//! A measure `P` on `Σ^∞` is represented by its values on cylinder sets:
//! `Γ_u` is the set of all infinite strings with finite prefix `u`, and the
//! measure is stored as conditional next-symbol probabilities
//! `P(Γ_ua | Γ_u)`. The cylinder value of `u` is the product of the
//! conditionals along `u`, with `P(Γ_ε) = 1` for the empty prefix. This is
//! the only representation used anywhere in this crate; the σ-algebra is
//! never materialized, and prefix-indexed evaluation plays the role of the
//! filtration.
//!
//! Measures are immutable after construction and safe to share across
//! worker threads. Walking a prefix is done through a per-path *state*
//! value (see [`PrefixMeasure::init`] / [`PrefixMeasure::advance`]) so that
//! independent paths can be evaluated concurrently.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Conditional probabilities below this threshold are treated as exactly
/// zero when deciding "p_u = 0" branches. Keeps branch decisions stable
/// against denormal noise accumulated by long products.
pub const ZERO_PROB_CUTOFF: f64 = 1e-15;

/// Largest alphabet accepted. Symbol groups are stored as `u32` bitmasks.
pub const MAX_ALPHABET: usize = 32;

/// Hard cap on exhaustive prefix-tree enumeration: `|Σ|^depth ≤ 2^24`.
pub const MAX_TREE_NODES: u128 = 1 << 24;

/// Errors from measure construction and prefix evaluation.
#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("alphabet must have at least two symbols, got {0}")]
    AlphabetTooSmall(usize),
    #[error("alphabet size {0} exceeds the supported maximum {MAX_ALPHABET}")]
    AlphabetTooLarge(usize),
    #[error("symbol {symbol} outside alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: u8, alphabet: usize },
    #[error("conditional probabilities sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("enumeration of {alphabet}^{depth} prefixes exceeds the 2^24 node guard")]
    EnumerationTooLarge { alphabet: usize, depth: u32 },
    #[error("eps {0} outside (0, 1/2)")]
    InvalidEps(f64),
}

/// A finite alphabet; symbols are identified with the indices `0..size`.
///
/// At least two distinct symbols are required.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self, MeasureError> {
        if size < 2 {
            return Err(MeasureError::AlphabetTooSmall(size));
        }
        if size > MAX_ALPHABET {
            return Err(MeasureError::AlphabetTooLarge(size));
        }
        Ok(Alphabet { size })
    }

    pub fn binary() -> Self {
        Alphabet { size: 2 }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn symbols(&self) -> impl Iterator<Item = u8> {
        0..self.size as u8
    }

    pub fn contains(&self, symbol: u8) -> bool {
        (symbol as usize) < self.size
    }

    /// Number of prefix-tree nodes of the full tree of the given depth,
    /// or an error when it exceeds the enumeration guard.
    pub fn check_tree_size(&self, depth: u32) -> Result<(), MeasureError> {
        let leaves = (self.size as u128).checked_pow(depth);
        match leaves {
            Some(n) if n <= MAX_TREE_NODES => Ok(()),
            _ => Err(MeasureError::EnumerationTooLarge {
                alphabet: self.size,
                depth,
            }),
        }
    }
}

/// A probability measure on `Σ^∞` given by conditional next-symbol
/// probabilities at every finite prefix.
///
/// Implementations must guarantee, for every reachable state:
/// * the conditionals written by [`conds`](Self::conds) sum to 1 (within
///   floating-point accumulation),
/// * cylinder values are therefore monotone non-increasing along prefixes,
/// * `advance` is deterministic, so the value at a prefix does not depend
///   on how the prefix was walked.
pub trait PrefixMeasure: Send + Sync {
    /// Per-path walking state; encodes the current prefix.
    type State: Clone + Send;

    fn alphabet(&self) -> Alphabet;

    /// State at the empty prefix.
    fn init(&self) -> Self::State;

    /// Write the conditional next-symbol probabilities at the current
    /// prefix into `out` (length must equal the alphabet size).
    fn conds(&self, state: &Self::State, out: &mut [f64]);

    /// Extend the current prefix by one symbol.
    fn advance(&self, state: &mut Self::State, symbol: u8);
}

/// Cylinder probability `P(Γ_u)`: the product of the conditionals along `u`.
///
/// `cylinder_prob(m, "") = 1`. Symbols outside the alphabet are a domain
/// error.
pub fn cylinder_prob<M: PrefixMeasure>(measure: &M, u: &[u8]) -> Result<f64, MeasureError> {
    let alphabet = measure.alphabet();
    let mut state = measure.init();
    let mut conds = vec![0.0; alphabet.size()];
    let mut prob = 1.0;
    for &symbol in u {
        if !alphabet.contains(symbol) {
            return Err(MeasureError::SymbolOutOfRange {
                symbol,
                alphabet: alphabet.size(),
            });
        }
        measure.conds(&state, &mut conds);
        prob *= conds[symbol as usize];
        if prob == 0.0 {
            return Ok(0.0);
        }
        measure.advance(&mut state, symbol);
    }
    Ok(prob)
}

/// Outcome of the perpetual-entropy check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyReport {
    pub eps: f64,
    pub depth: u32,
    pub pass: bool,
    /// First prefix (as symbol indices) with positive cylinder probability
    /// at which no symbol has conditional probability inside `(eps, 1-eps)`.
    pub first_failure: Option<Vec<u8>>,
}

/// Check a sufficient condition for perpetual entropy up to a finite depth.
///
/// A measure has perpetual entropy when, forever along any observed string,
/// some future symbol has conditional probability strictly inside
/// `(eps, 1-eps)`. The full condition quantifies over all future offsets
/// and is not decidable from finitely many conditionals. This checker tests
/// the stronger offset-zero condition: **every** prefix `u` with
/// `P(Γ_u) > 0` and `|u| ≤ depth` must already have a witness symbol `a`
/// with `eps < P(Γ_ua | Γ_u) < 1-eps`. A measure passing the check
/// satisfies the original condition restricted to the tested depth;
/// a measure failing it may still have perpetual entropy via a witness at
/// a later offset.
pub fn verify_perpetual_entropy<M: PrefixMeasure>(
    measure: &M,
    eps: f64,
    depth: u32,
) -> Result<EntropyReport, MeasureError> {
    if !(0.0 < eps && eps < 0.5) {
        return Err(MeasureError::InvalidEps(eps));
    }
    let alphabet = measure.alphabet();
    alphabet.check_tree_size(depth)?;

    let mut conds = vec![0.0; alphabet.size()];
    // Iterative DFS over prefixes of length < depth... prefixes up to and
    // including length `depth` must each have an immediate witness.
    let mut stack: Vec<(M::State, Vec<u8>)> = vec![(measure.init(), Vec::new())];
    while let Some((state, prefix)) = stack.pop() {
        measure.conds(&state, &mut conds);
        let witness = conds.iter().any(|&c| eps < c && c < 1.0 - eps);
        if !witness {
            return Ok(EntropyReport {
                eps,
                depth,
                pass: false,
                first_failure: Some(prefix),
            });
        }
        if prefix.len() < depth as usize {
            for a in alphabet.symbols() {
                if conds[a as usize] > ZERO_PROB_CUTOFF {
                    let mut child = state.clone();
                    measure.advance(&mut child, a);
                    let mut child_prefix = prefix.clone();
                    child_prefix.push(a);
                    stack.push((child, child_prefix));
                }
            }
        }
    }
    Ok(EntropyReport {
        eps,
        depth,
        pass: true,
        first_failure: None,
    })
}

/// An i.i.d. binary measure; `p` is the probability of symbol `1`.
///
/// `P(Γ_u) = p^ones(u) (1-p)^zeros(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bernoulli {
    p: f64,
}

impl Bernoulli {
    pub fn new(p: f64) -> Result<Self, MeasureError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(MeasureError::InvalidProbability(p));
        }
        Ok(Bernoulli { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

impl PrefixMeasure for Bernoulli {
    type State = ();

    fn alphabet(&self) -> Alphabet {
        Alphabet::binary()
    }

    fn init(&self) -> Self::State {}

    fn conds(&self, _state: &Self::State, out: &mut [f64]) {
        out[0] = 1.0 - self.p;
        out[1] = self.p;
    }

    fn advance(&self, _state: &mut Self::State, _symbol: u8) {}
}

/// An i.i.d. measure over an arbitrary finite alphabet.
///
/// Degenerate distributions are allowed (e.g. all mass on one symbol);
/// such measures fail the perpetual-entropy check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iid {
    probs: Vec<f64>,
}

impl Iid {
    pub fn new(probs: Vec<f64>) -> Result<Self, MeasureError> {
        Alphabet::new(probs.len())?;
        for &p in &probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(MeasureError::InvalidProbability(p));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(MeasureError::NotNormalized(total));
        }
        Ok(Iid { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

impl PrefixMeasure for Iid {
    type State = ();

    fn alphabet(&self) -> Alphabet {
        Alphabet::new(self.probs.len()).expect("validated at construction")
    }

    fn init(&self) -> Self::State {}

    fn conds(&self, _state: &Self::State, out: &mut [f64]) {
        out.copy_from_slice(&self.probs);
    }

    fn advance(&self, _state: &mut Self::State, _symbol: u8) {}
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Parse "0110" into symbol indices.
    pub(crate) fn bits(s: &str) -> Vec<u8> {
        s.bytes().map(|b| b - b'0').collect()
    }

    #[test]
    fn bernoulli_cylinder_values() {
        let p = Bernoulli::new(2.0 / 3.0).unwrap();
        assert!((cylinder_prob(&p, &bits("0")).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(cylinder_prob(&p, &[]).unwrap(), 1.0);
        assert!((cylinder_prob(&p, &bits("01")).unwrap() - 2.0 / 9.0).abs() < 1e-15);
        assert!((cylinder_prob(&p, &bits("11")).unwrap() - 4.0 / 9.0).abs() < 1e-15);

        let uniform = Bernoulli::new(0.5).unwrap();
        assert!((cylinder_prob(&uniform, &bits("0110")).unwrap() - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn bernoulli_closed_form_to_depth_12() {
        let p = Bernoulli::new(2.0 / 3.0).unwrap();
        for len in 0..=12u32 {
            // check a pseudo-arbitrary selection of prefixes per length
            for pattern in [0u32, 1, (1 << len.min(31)) - 1, 0b1010_1010_1010] {
                let u: Vec<u8> = (0..len).map(|i| ((pattern >> i) & 1) as u8).collect();
                let ones = u.iter().filter(|&&b| b == 1).count() as i32;
                let zeros = len as i32 - ones;
                let expected = (2.0f64 / 3.0).powi(ones) * (1.0f64 / 3.0).powi(zeros);
                let got = cylinder_prob(&p, &u).unwrap();
                assert!((got - expected).abs() < 1e-12, "len {len} pattern {pattern:b}");
            }
        }
    }

    #[test]
    fn cylinder_rejects_foreign_symbols() {
        let p = Bernoulli::new(0.5).unwrap();
        assert_eq!(
            cylinder_prob(&p, &[2]),
            Err(MeasureError::SymbolOutOfRange { symbol: 2, alphabet: 2 })
        );
    }

    #[test]
    fn invalid_probability_rejected() {
        assert!(Bernoulli::new(-0.1).is_err());
        assert!(Bernoulli::new(1.5).is_err());
        assert!(Iid::new(vec![0.5, 0.6]).is_err());
        assert!(Iid::new(vec![1.0]).is_err());
    }

    #[test]
    fn perpetual_entropy_verdicts() {
        let fair = Bernoulli::new(0.5).unwrap();
        assert!(verify_perpetual_entropy(&fair, 0.4, 8).unwrap().pass);

        let deterministic = Iid::new(vec![1.0, 0.0]).unwrap();
        let report = verify_perpetual_entropy(&deterministic, 0.1, 3).unwrap();
        assert!(!report.pass);
        assert_eq!(report.first_failure, Some(vec![]));

        let skewed = Bernoulli::new(2.0 / 3.0).unwrap();
        assert!(verify_perpetual_entropy(&skewed, 0.25, 8).unwrap().pass);
        // 1/3 and 2/3 both lie outside (0.4, 0.6)
        assert!(!verify_perpetual_entropy(&skewed, 0.4, 3).unwrap().pass);
    }

    #[test]
    fn perpetual_entropy_rejects_bad_eps() {
        let fair = Bernoulli::new(0.5).unwrap();
        assert!(verify_perpetual_entropy(&fair, 0.0, 3).is_err());
        assert!(verify_perpetual_entropy(&fair, 0.5, 3).is_err());
    }

    #[test]
    fn enumeration_guard_trips() {
        let fair = Bernoulli::new(0.5).unwrap();
        assert!(matches!(
            verify_perpetual_entropy(&fair, 0.1, 60),
            Err(MeasureError::EnumerationTooLarge { .. })
        ));
    }

    proptest! {
        #[test]
        fn conds_sum_to_one_and_cylinders_decrease(
            p in 0.0f64..=1.0,
            u in proptest::collection::vec(0u8..2, 0..24)
        ) {
            let m = Bernoulli::new(p).unwrap();
            let mut conds = [0.0; 2];
            m.conds(&(), &mut conds);
            prop_assert!((conds.iter().sum::<f64>() - 1.0).abs() < 1e-12);

            // monotone non-increasing cylinders along the prefix
            let mut last = 1.0;
            for end in 0..=u.len() {
                let prob = cylinder_prob(&m, &u[..end]).unwrap();
                prop_assert!(prob <= last + 1e-15);
                last = prob;
            }
        }

        #[test]
        fn iid_cylinder_matches_product(
            probs_raw in proptest::collection::vec(0.01f64..1.0, 3),
            u in proptest::collection::vec(0u8..3, 0..16)
        ) {
            let total: f64 = probs_raw.iter().sum();
            let probs: Vec<f64> = probs_raw.iter().map(|p| p / total).collect();
            let m = Iid::new(probs.clone()).unwrap();
            let expected: f64 = u.iter().map(|&a| probs[a as usize]).product();
            let got = cylinder_prob(&m, &u).unwrap();
            prop_assert!((got - expected).abs() < 1e-12);
        }
    }
}
