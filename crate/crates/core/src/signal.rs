//! Spike trains, their autocorrelation, and the solution equivalence class.
//!
//! A [`SpikeSignal`] is a finite train of weighted Dirac deltas in D
//! dimensions. Its autocorrelation [`DeltaAcf`] is the centro-symmetric delta
//! train supported on the pairwise position differences; it is what a
//! Fourier-magnitude measurement determines. Signals related by translation,
//! point reflection and a global sign flip share the same ACF, so solvers
//! report [`EquivalenceClass`] values produced by [`canonicalize`].

use core::cmp::Ordering;

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::scalar::{lex_cmp, lex_positive, Scalar, Tolerance};
use crate::Result;

/// One weighted delta: a position in D dimensions and a nonzero coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Spike<S> {
    pub pos: Vec<S>,
    pub coef: S,
}

/// A finite train of weighted deltas, the unknown signal of the retrieval
/// problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeSignal<S> {
    dim: usize,
    spikes: Vec<Spike<S>>,
}

impl<S: Scalar> SpikeSignal<S> {
    /// Validates dimensions, nonzero coefficients and pairwise-distinct
    /// positions (within the absolute tolerance in floating mode).
    pub fn new(dim: usize, spikes: Vec<Spike<S>>, tol: Tolerance) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSignal("dimension must be at least 1"));
        }
        if spikes.is_empty() {
            return Err(Error::InvalidSignal("signal needs at least one spike"));
        }
        for spike in &spikes {
            if spike.pos.len() != dim {
                return Err(Error::InvalidSignal("position length differs from dim"));
            }
            if spike.coef.is_zero() {
                return Err(Error::InvalidSignal("spike coefficient must be nonzero"));
            }
        }
        for i in 0..spikes.len() {
            for j in i + 1..spikes.len() {
                let same = spikes[i]
                    .pos
                    .iter()
                    .zip(spikes[j].pos.iter())
                    .all(|(a, b)| a.matches_abs(b, tol));
                if same {
                    return Err(Error::InvalidSignal("two spikes share a position"));
                }
            }
        }
        Ok(SpikeSignal { dim, spikes })
    }

    /// 1-D signal from (position, coefficient) pairs.
    pub fn new_1d(pairs: Vec<(S, S)>, tol: Tolerance) -> Result<Self> {
        let spikes = pairs
            .into_iter()
            .map(|(p, c)| Spike { pos: vec![p], coef: c })
            .collect();
        Self::new(1, spikes, tol)
    }

    /// 1-D unit-coefficient signal on an integer support.
    pub fn from_int_support(support: &[i64]) -> Result<Self> {
        let pairs = support
            .iter()
            .map(|&p| (S::from_int(p), S::one()))
            .collect();
        Self::new_1d(pairs, Tolerance::exact())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spikes(&self) -> &[Spike<S>] {
        &self.spikes
    }

    /// Number of spikes N.
    pub fn len(&self) -> usize {
        self.spikes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spikes.is_empty()
    }

    /// Scalar positions of a 1-D signal, in spike order.
    pub fn positions_1d(&self) -> Result<Vec<S>> {
        if self.dim != 1 {
            return Err(Error::InvalidSignal("expected a 1-D signal"));
        }
        Ok(self.spikes.iter().map(|s| s.pos[0].clone()).collect())
    }
}

/// One delta of an autocorrelation: a lag vector and its coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct AcfDelta<S> {
    pub lag: Vec<S>,
    pub coef: S,
}

/// A centro-symmetric weighted delta train: the autocorrelation of a
/// [`SpikeSignal`], or equivalently everything a Fourier-magnitude
/// measurement reveals.
///
/// The zero lag is always stored explicitly and carries the total energy
/// `sum of c^2`. In half-support form only the zero lag plus one
/// lex-positive representative per centro-symmetric pair are kept; the two
/// forms are interchangeable through [`half_support`] and [`expand_full`].
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaAcf<S> {
    dim: usize,
    deltas: Vec<AcfDelta<S>>,
    half: bool,
}

impl<S: Scalar> DeltaAcf<S> {
    /// Validates and sorts a delta list into an ACF.
    ///
    /// Requires exactly one zero lag, merged (non-coincident) lags, and, for
    /// the full form, an exact centro-symmetric partner for every nonzero
    /// delta (within tolerance in floating mode).
    pub fn new(dim: usize, mut deltas: Vec<AcfDelta<S>>, half: bool, tol: Tolerance) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidAcf("dimension must be at least 1"));
        }
        if deltas.is_empty() {
            return Err(Error::InvalidAcf("ACF needs at least the zero lag"));
        }
        for d in &deltas {
            if d.lag.len() != dim {
                return Err(Error::InvalidAcf("lag length differs from dim"));
            }
        }
        deltas.sort_by(|a, b| lex_cmp(&a.lag, &b.lag));
        let zero_count = deltas.iter().filter(|d| d.lag.iter().all(S::is_zero)).count();
        if zero_count == 0 {
            return Err(Error::InvalidAcf("missing zero lag"));
        }
        if zero_count > 1 {
            return Err(Error::InvalidAcf("zero lag stored more than once"));
        }
        for pair in deltas.windows(2) {
            let coincident = pair[0]
                .lag
                .iter()
                .zip(pair[1].lag.iter())
                .all(|(a, b)| a.matches_abs(b, tol));
            if coincident {
                return Err(Error::InvalidAcf("coincident lags must be merged"));
            }
        }
        if half {
            for d in &deltas {
                if !d.lag.iter().all(S::is_zero) && !lex_positive(&d.lag) {
                    return Err(Error::InvalidAcf("half form must store lex-positive lags"));
                }
            }
        } else {
            let positives: Vec<&AcfDelta<S>> =
                deltas.iter().filter(|d| lex_positive(&d.lag)).collect();
            let mut mirrored: Vec<(Vec<S>, S)> = deltas
                .iter()
                .filter(|d| !d.lag.iter().all(S::is_zero) && !lex_positive(&d.lag))
                .map(|d| (d.lag.iter().map(|x| -x.clone()).collect(), d.coef.clone()))
                .collect();
            mirrored.sort_by(|a, b| lex_cmp(&a.0, &b.0));
            if positives.len() != mirrored.len() {
                return Err(Error::InvalidAcf("not centro-symmetric"));
            }
            for (p, (m_lag, m_coef)) in positives.iter().zip(mirrored.iter()) {
                let lag_ok = p
                    .lag
                    .iter()
                    .zip(m_lag.iter())
                    .all(|(a, b)| a.matches_abs(b, tol));
                if !lag_ok || !p.coef.matches_rel(m_coef, tol) {
                    return Err(Error::InvalidAcf("not centro-symmetric"));
                }
            }
        }
        Ok(DeltaAcf { dim, deltas, half })
    }

    fn from_sorted_unchecked(dim: usize, deltas: Vec<AcfDelta<S>>, half: bool) -> Self {
        DeltaAcf { dim, deltas, half }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_half(&self) -> bool {
        self.half
    }

    /// Stored deltas, sorted by lag (lexicographic).
    pub fn deltas(&self) -> &[AcfDelta<S>] {
        &self.deltas
    }

    pub fn zero_lag_coef(&self) -> S {
        self.deltas
            .iter()
            .find(|d| d.lag.iter().all(S::is_zero))
            .map(|d| d.coef.clone())
            .expect("constructor guarantees a zero lag")
    }

    /// Full centro-symmetric form.
    pub fn to_full(&self) -> DeltaAcf<S> {
        if !self.half {
            return self.clone();
        }
        let mut deltas = Vec::with_capacity(self.deltas.len() * 2 - 1);
        for d in &self.deltas {
            deltas.push(d.clone());
            if !d.lag.iter().all(S::is_zero) {
                deltas.push(AcfDelta {
                    lag: d.lag.iter().map(|x| -x.clone()).collect(),
                    coef: d.coef.clone(),
                });
            }
        }
        deltas.sort_by(|a, b| lex_cmp(&a.lag, &b.lag));
        DeltaAcf::from_sorted_unchecked(self.dim, deltas, false)
    }

    /// Half-support form: zero lag plus one representative per pair.
    pub fn to_half(&self) -> DeltaAcf<S> {
        if self.half {
            return self.clone();
        }
        let deltas = self
            .deltas
            .iter()
            .filter(|d| d.lag.iter().all(S::is_zero) || lex_positive(&d.lag))
            .cloned()
            .collect();
        DeltaAcf::from_sorted_unchecked(self.dim, deltas, true)
    }

    /// Nonzero deltas of the full form.
    pub fn nonzero_lags(&self) -> Vec<(Vec<S>, S)> {
        self.to_full()
            .deltas
            .iter()
            .filter(|d| !d.lag.iter().all(S::is_zero))
            .map(|d| (d.lag.clone(), d.coef.clone()))
            .collect()
    }

    /// `(lag, coefficient)` pairs for the strictly positive lags of a 1-D ACF.
    pub fn positive_lags_1d(&self) -> Result<Vec<(S, S)>> {
        if self.dim != 1 {
            return Err(Error::InvalidAcf("expected a 1-D ACF"));
        }
        Ok(self
            .to_full()
            .deltas
            .iter()
            .filter(|d| lex_positive(&d.lag))
            .map(|d| (d.lag[0].clone(), d.coef.clone()))
            .collect())
    }

    /// Compares two ACFs delta by delta (full forms, absolute tolerance on
    /// lags, relative on coefficients).
    pub fn matches(&self, other: &DeltaAcf<S>, tol: Tolerance) -> bool {
        if self.dim != other.dim {
            return false;
        }
        let a = self.to_full();
        let b = other.to_full();
        if a.deltas.len() != b.deltas.len() {
            return false;
        }
        a.deltas.iter().zip(b.deltas.iter()).all(|(x, y)| {
            x.lag
                .iter()
                .zip(y.lag.iter())
                .all(|(p, q)| p.matches_abs(q, tol))
                && x.coef.matches_rel(&y.coef, tol)
        })
    }
}

/// Orients a nonzero lag to its lex-positive representative.
fn orient<S: Scalar>(mut lag: Vec<S>, coef: S) -> (Vec<S>, S) {
    if !lex_positive(&lag) {
        lag = lag.into_iter().map(|x| -x).collect();
    }
    (lag, coef)
}

/// Sorts oriented lags and merges coincident ones (within the absolute
/// tolerance), summing coefficients in sorted order so floating results are
/// deterministic. Attached payloads are concatenated per merged group.
fn merge_sorted<S: Scalar, T: Clone>(
    mut entries: Vec<(Vec<S>, S, T)>,
    tol: Tolerance,
) -> Vec<(Vec<S>, S, Vec<T>)> {
    entries.sort_by(|a, b| lex_cmp(&a.0, &b.0));
    let mut merged: Vec<(Vec<S>, S, Vec<T>)> = Vec::new();
    let mut used = vec![false; entries.len()];
    for i in 0..entries.len() {
        if used[i] {
            continue;
        }
        let anchor = entries[i].0.clone();
        let mut coef = entries[i].1.clone();
        let mut payload = vec![entries[i].2.clone()];
        for j in i + 1..entries.len() {
            if used[j] {
                continue;
            }
            // Sorted by first component: once out of the window, stop scanning.
            if !entries[j].0[0].matches_abs(&anchor[0], tol)
                && entries[j].0[0].cmp_total(&anchor[0]) == Ordering::Greater
            {
                break;
            }
            let same = entries[j]
                .0
                .iter()
                .zip(anchor.iter())
                .all(|(a, b)| a.matches_abs(b, tol));
            if same {
                coef = coef + entries[j].1.clone();
                payload.push(entries[j].2.clone());
                used[j] = true;
            }
        }
        merged.push((anchor, coef, payload));
    }
    merged
}

/// Builds the full centro-symmetric ACF of a signal.
///
/// Coincident lags (collisions) are merged by summing coefficients; the zero
/// lag carries `sum of c^2`; output is sorted by lag.
pub fn compute_acf<S: Scalar>(signal: &SpikeSignal<S>, tol: Tolerance) -> DeltaAcf<S> {
    let spikes = signal.spikes();
    let n = spikes.len();

    let mut oriented: Vec<(Vec<S>, S, ())> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let lag: Vec<S> = spikes[j]
                .pos
                .iter()
                .zip(spikes[i].pos.iter())
                .map(|(a, b)| a.clone() - b.clone())
                .collect();
            let coef = spikes[i].coef.clone() * spikes[j].coef.clone();
            let (lag, coef) = orient(lag, coef);
            oriented.push((lag, coef, ()));
        }
    }
    let merged = merge_sorted(oriented, tol);

    let mut zero_coef = S::zero();
    for s in spikes {
        zero_coef = zero_coef + s.coef.clone() * s.coef.clone();
    }

    let mut deltas = Vec::with_capacity(2 * merged.len() + 1);
    deltas.push(AcfDelta { lag: vec![S::zero(); signal.dim()], coef: zero_coef });
    for (lag, coef, _) in merged {
        deltas.push(AcfDelta {
            lag: lag.iter().map(|x| -x.clone()).collect(),
            coef: coef.clone(),
        });
        deltas.push(AcfDelta { lag, coef });
    }
    deltas.sort_by(|a, b| lex_cmp(&a.lag, &b.lag));
    DeltaAcf::from_sorted_unchecked(signal.dim(), deltas, false)
}

/// Half-support form of an ACF (zero lag plus lex-positive representatives).
pub fn half_support<S: Scalar>(acf: &DeltaAcf<S>) -> DeltaAcf<S> {
    acf.to_half()
}

/// Full centro-symmetric form of an ACF.
pub fn expand_full<S: Scalar>(acf: &DeltaAcf<S>) -> DeltaAcf<S> {
    acf.to_full()
}

/// A group of spike pairs whose differences coincide on one lag.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionGroup<S> {
    /// The shared (lex-positive) lag.
    pub lag: Vec<S>,
    /// Unordered spike index pairs producing it.
    pub pairs: Vec<(usize, usize)>,
}

/// Collision diagnosis: which nonzero lags are produced by more than one
/// spike pair. The zero lag never counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionReport<S> {
    pub groups: Vec<CollisionGroup<S>>,
    pub has_collisions: bool,
}

/// Detects collisions from a signal's difference multiset.
pub fn detect_collisions<S: Scalar>(signal: &SpikeSignal<S>, tol: Tolerance) -> CollisionReport<S> {
    let spikes = signal.spikes();
    let n = spikes.len();
    let mut oriented: Vec<(Vec<S>, S, (usize, usize))> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let lag: Vec<S> = spikes[j]
                .pos
                .iter()
                .zip(spikes[i].pos.iter())
                .map(|(a, b)| a.clone() - b.clone())
                .collect();
            let (lag, _) = orient(lag, S::one());
            oriented.push((lag, S::one(), (i, j)));
        }
    }
    let merged = merge_sorted(oriented, tol);
    let groups: Vec<CollisionGroup<S>> = merged
        .into_iter()
        .filter(|(_, _, pairs)| pairs.len() > 1)
        .map(|(lag, _, pairs)| CollisionGroup { lag, pairs })
        .collect();
    CollisionReport { has_collisions: !groups.is_empty(), groups }
}

/// Detects collisions from a pre-merged ACF and the claimed spike count:
/// a collision-free ACF of an `n`-spike signal has exactly `n^2 - n + 1`
/// deltas, and a lower count means lags were merged. The producing pairs are
/// unknowable from the ACF alone, so the report carries no groups.
pub fn detect_collisions_acf<S: Scalar>(acf: &DeltaAcf<S>, claimed_n: usize) -> Result<CollisionReport<S>> {
    if claimed_n == 0 {
        return Err(Error::InvalidAcf("claimed spike count must be positive"));
    }
    let count = acf.to_full().deltas().len();
    let expected = claimed_n * claimed_n - claimed_n + 1;
    if count > expected {
        return Err(Error::InvalidAcf("more deltas than n^2 - n + 1 allows"));
    }
    Ok(CollisionReport { groups: Vec::new(), has_collisions: count < expected })
}

/// The canonical representative of a signal under translation, point
/// reflection and global sign flip.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceClass<S> {
    representative: SpikeSignal<S>,
}

impl<S: Scalar> EquivalenceClass<S> {
    pub fn representative(&self) -> &SpikeSignal<S> {
        &self.representative
    }

    pub fn into_representative(self) -> SpikeSignal<S> {
        self.representative
    }

    /// Tolerant equality of representatives (exact equality in exact mode).
    pub fn matches(&self, other: &EquivalenceClass<S>, tol: Tolerance) -> bool {
        let a = &self.representative;
        let b = &other.representative;
        if a.dim() != b.dim() || a.len() != b.len() {
            return false;
        }
        a.spikes().iter().zip(b.spikes().iter()).all(|(x, y)| {
            x.pos
                .iter()
                .zip(y.pos.iter())
                .all(|(p, q)| p.matches_abs(q, tol))
                && x.coef.matches_rel(&y.coef, tol)
        })
    }

    /// Deterministic ordering used to sort solution lists.
    pub fn cmp_canonical(&self, other: &EquivalenceClass<S>) -> Ordering {
        cmp_pose(self.representative.spikes(), other.representative.spikes())
    }
}

/// Compares two equally sized spike lists: positions first (lexicographic),
/// then coefficients, preferring the larger coefficient sequence so that the
/// positive-sign pose beats its negation.
fn cmp_pose<S: Scalar>(a: &[Spike<S>], b: &[Spike<S>]) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match lex_cmp(&x.pos, &y.pos) {
            Ordering::Equal => {}
            other => return other,
        }
    }
    for (x, y) in a.iter().zip(b.iter()) {
        match x.coef.cmp_total(&y.coef) {
            Ordering::Equal => {}
            other => return other.reverse(),
        }
    }
    Ordering::Equal
}

/// Canonicalizes a signal within its equivalence class.
///
/// Enumerates the four poses (identity/point reflection times sign flip),
/// translates each so the lexicographically smallest position sits at the
/// origin, sorts spikes, and keeps the smallest pose under [`cmp_pose`]. The
/// result is idempotent and invariant under translation, reflection and sign.
pub fn canonicalize<S: Scalar>(signal: &SpikeSignal<S>, _tol: Tolerance) -> EquivalenceClass<S> {
    let mut best: Option<Vec<Spike<S>>> = None;
    for reflect in [false, true] {
        for flip in [false, true] {
            let mut spikes: Vec<Spike<S>> = signal
                .spikes()
                .iter()
                .map(|s| {
                    let pos: Vec<S> = if reflect {
                        s.pos.iter().map(|x| -x.clone()).collect()
                    } else {
                        s.pos.clone()
                    };
                    let coef = if flip { -s.coef.clone() } else { s.coef.clone() };
                    Spike { pos, coef }
                })
                .collect();
            let min_pos = spikes
                .iter()
                .map(|s| s.pos.clone())
                .min_by(|a, b| lex_cmp(a, b))
                .expect("nonempty signal");
            for s in &mut spikes {
                for (x, m) in s.pos.iter_mut().zip(min_pos.iter()) {
                    *x = x.clone() - m.clone();
                }
            }
            spikes.sort_by(|x, y| lex_cmp(&x.pos, &y.pos).then_with(|| x.coef.cmp_total(&y.coef)));
            match &best {
                None => best = Some(spikes),
                Some(current) => {
                    if cmp_pose(&spikes, current) == Ordering::Less {
                        best = Some(spikes);
                    }
                }
            }
        }
    }
    EquivalenceClass {
        representative: SpikeSignal { dim: signal.dim(), spikes: best.expect("poses examined") },
    }
}

/// Removes tolerant duplicates from a list of classes and sorts it
/// canonically, making solver output order schedule-independent.
pub fn dedup_classes<S: Scalar>(
    mut classes: Vec<EquivalenceClass<S>>,
    tol: Tolerance,
) -> Vec<EquivalenceClass<S>> {
    classes.sort_by(|a, b| a.cmp_canonical(b));
    let mut out: Vec<EquivalenceClass<S>> = Vec::with_capacity(classes.len());
    'outer: for c in classes {
        for kept in &out {
            if kept.matches(&c, tol) {
                continue 'outer;
            }
        }
        out.push(c);
    }
    out
}
