//! D-dimensional recovery by projection onto 1-D subspaces.
//!
//! Projection commutes with autocorrelation: the projected ACF is the ACF of
//! the projected signal. A collision-free D-dimensional ACF therefore splits
//! into 1-D problems along random directions; directions whose projection
//! collides or lands on the six-point counterexample family are resampled
//! (they form a measure-zero set), `dim` accepted base directions plus one
//! validation direction determine the spike positions, and every fused
//! candidate is checked against the full ACF. The module also ships the
//! visibility ("general position") checker, a sufficient condition that is
//! strictly weaker than what the projection scheme recovers.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::coefficients::{classify_uniqueness_1d, scalar_sqrt, UniquenessVerdict};
use crate::error::{AttemptSummary, Error};
use crate::linalg;
use crate::scalar::{Scalar, Tolerance};
use crate::signal::{
    canonicalize, compute_acf, dedup_classes, AcfDelta, DeltaAcf, EquivalenceClass, Spike,
    SpikeSignal,
};
use crate::turnpike::triangular_n;
use crate::Result;

/// A 1-D subspace to project onto: unit norm in floating mode, a primitive
/// integer vector in exact mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionDirection<S> {
    components: Vec<S>,
}

impl<S: Scalar> ProjectionDirection<S> {
    pub fn new(components: Vec<S>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidSignal("direction needs at least one component"));
        }
        if components.iter().all(S::is_zero) {
            return Err(Error::InvalidSignal("direction must be nonzero"));
        }
        Ok(ProjectionDirection { components: S::canonicalize_direction(components) })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[S] {
        &self.components
    }

    /// Inner product with a coordinate vector.
    pub fn project(&self, v: &[S]) -> S {
        let mut acc = S::zero();
        for (p, x) in self.components.iter().zip(v.iter()) {
            acc = acc + p.clone() * x.clone();
        }
        acc
    }
}

/// Clusters sorted scalar entries within the absolute tolerance, summing
/// coefficients in sorted order.
fn merge_1d<S: Scalar>(mut entries: Vec<(S, S)>, tol: Tolerance) -> Vec<(S, S)> {
    entries.sort_by(|a, b| a.0.cmp_total(&b.0).then_with(|| a.1.cmp_total(&b.1)));
    let mut out: Vec<(S, S)> = Vec::new();
    for (pos, coef) in entries {
        match out.last_mut() {
            Some((anchor, acc)) if pos.matches_abs(anchor, tol) => {
                *acc = acc.clone() + coef;
            }
            _ => out.push((pos, coef)),
        }
    }
    out
}

/// Projects a signal onto a direction: positions become inner products,
/// coefficients are preserved, coincident projections merge (and vanish when
/// they cancel).
pub fn project_signal<S: Scalar>(
    signal: &SpikeSignal<S>,
    dir: &ProjectionDirection<S>,
    tol: Tolerance,
) -> Result<SpikeSignal<S>> {
    if signal.dim() != dir.dim() {
        return Err(Error::InvalidSignal("direction dimension differs from signal"));
    }
    let entries: Vec<(S, S)> = signal
        .spikes()
        .iter()
        .map(|s| (dir.project(&s.pos), s.coef.clone()))
        .collect();
    let pairs: Vec<(S, S)> = merge_1d(entries, tol)
        .into_iter()
        .filter(|(_, coef)| !coef.is_zero())
        .collect();
    SpikeSignal::new_1d(pairs, tol)
}

/// Projects an ACF onto a direction; lags map to inner products, coincident
/// projected lags merge, and centro-symmetry is preserved by construction.
pub fn project_acf<S: Scalar>(
    acf: &DeltaAcf<S>,
    dir: &ProjectionDirection<S>,
    tol: Tolerance,
) -> Result<DeltaAcf<S>> {
    if acf.dim() != dir.dim() {
        return Err(Error::InvalidAcf("direction dimension differs from ACF"));
    }
    let full = acf.to_full();
    let mut zero_acc = full.zero_lag_coef();
    let mut positives: Vec<(S, S)> = Vec::new();
    for d in full.deltas() {
        if d.lag.iter().all(S::is_zero) || !crate::scalar::lex_positive(&d.lag) {
            continue;
        }
        let w = dir.project(&d.lag);
        if w.matches_abs(&S::zero(), tol) {
            // The pair (y, -y) lands on the zero lag, contributing twice.
            zero_acc = zero_acc + d.coef.clone() + d.coef.clone();
        } else {
            positives.push((w.abs(), d.coef.clone()));
        }
    }
    let merged = merge_1d(positives, tol);
    let mut deltas = Vec::with_capacity(2 * merged.len() + 1);
    deltas.push(AcfDelta { lag: vec![S::zero()], coef: zero_acc });
    for (w, coef) in merged {
        deltas.push(AcfDelta { lag: vec![-w.clone()], coef: coef.clone() });
        deltas.push(AcfDelta { lag: vec![w], coef });
    }
    DeltaAcf::new(1, deltas, false, tol)
}

/// Per-delta visibility: a nonzero ACF delta is visible when the line
/// through the origin and the delta carries no other delta besides its
/// centro-symmetric twin.
#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityReport<S> {
    /// Each nonzero delta of the full ACF with its visibility flag.
    pub deltas: Vec<(Vec<S>, bool)>,
    /// All deltas visible: the sufficient condition for support uniqueness.
    pub all_visible: bool,
}

fn collinear<S: Scalar>(a: &[S], b: &[S], tol: Tolerance) -> bool {
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let left = a[i].clone() * b[j].clone();
            let right = a[j].clone() * b[i].clone();
            let scale = 1.0 + left.abs().to_f64().max(right.abs().to_f64());
            let det = (left - right).abs().to_f64();
            if det > tol.eps * scale {
                return false;
            }
        }
    }
    true
}

/// Checks the general-position condition of an ACF with `dim >= 2`.
pub fn check_general_position<S: Scalar>(
    acf: &DeltaAcf<S>,
    tol: Tolerance,
) -> Result<VisibilityReport<S>> {
    if acf.dim() < 2 {
        return Err(Error::InvalidAcf("visibility needs dim >= 2"));
    }
    let nonzero = acf.nonzero_lags();
    let mut deltas = Vec::with_capacity(nonzero.len());
    for (idx, (lag, _)) in nonzero.iter().enumerate() {
        let mirror: Vec<S> = lag.iter().map(|x| -x.clone()).collect();
        let mut visible = true;
        for (other_idx, (other, _)) in nonzero.iter().enumerate() {
            if other_idx == idx {
                continue;
            }
            let is_twin = other
                .iter()
                .zip(mirror.iter())
                .all(|(a, b)| a.matches_abs(b, tol));
            if is_twin {
                continue;
            }
            if collinear(lag, other, tol) {
                visible = false;
                break;
            }
        }
        deltas.push((lag.clone(), visible));
    }
    let all_visible = deltas.iter().all(|(_, v)| *v);
    Ok(VisibilityReport { deltas, all_visible })
}

/// How a candidate projection direction fared.
#[derive(Debug, Clone, PartialEq)]
pub enum DirectionOutcome<S> {
    /// Collision-free projection with a unique 1-D solution.
    Usable(EquivalenceClass<S>),
    /// Distinct lags merged under projection.
    Collision,
    /// The projection landed on the counterexample family.
    Ambiguous,
    /// The 1-D solver failed for another reason.
    Failed,
}

/// Projects the ACF onto one direction and classifies the 1-D problem.
/// This is the accept/reject test of the resampling loop, exposed so the
/// rejection behavior is observable on chosen directions.
pub fn evaluate_direction<S: Scalar>(
    acf: &DeltaAcf<S>,
    dir: &ProjectionDirection<S>,
    tol: Tolerance,
) -> Result<DirectionOutcome<S>> {
    let projected = project_acf(acf, dir, tol)?;
    let expected = acf.to_full().deltas().len();
    if projected.to_full().deltas().len() != expected {
        return Ok(DirectionOutcome::Collision);
    }
    Ok(match classify_uniqueness_1d(&projected, tol) {
        Ok(UniquenessVerdict::Unique(class)) => DirectionOutcome::Usable(class),
        Ok(UniquenessVerdict::Ambiguous(_)) => DirectionOutcome::Ambiguous,
        Ok(UniquenessVerdict::NotCovered(_)) => DirectionOutcome::Collision,
        Err(_) => DirectionOutcome::Failed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttemptOutcome {
    Accepted,
    RejectedCollision,
    RejectedAmbiguous,
    RejectedDependent,
    RejectedDuplicate,
    RejectedSolver,
}

/// One entry of the direction resampling log.
#[derive(Debug, Clone, PartialEq)]
pub struct AttemptRecord<S> {
    pub direction: Vec<S>,
    pub outcome: AttemptOutcome,
}

/// Result of a multidimensional recovery together with its attempt log.
#[derive(Debug, Clone, PartialEq)]
pub struct MultidimRecovery<S> {
    pub verdict: UniquenessVerdict<S>,
    pub attempts: Vec<AttemptRecord<S>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecoverOptions {
    /// Resampling budget per needed direction.
    pub attempts_per_direction: usize,
    /// Total accepted directions to gather; defaults to `dim + 1`.
    pub direction_count: Option<usize>,
}

impl Default for RecoverOptions {
    fn default() -> Self {
        RecoverOptions { attempts_per_direction: 64, direction_count: None }
    }
}

fn summarize<S>(attempts: &[AttemptRecord<S>]) -> AttemptSummary {
    let mut summary = AttemptSummary { attempts: attempts.len(), ..AttemptSummary::default() };
    for a in attempts {
        match a.outcome {
            AttemptOutcome::Accepted => summary.accepted += 1,
            AttemptOutcome::RejectedCollision => summary.rejected_collision += 1,
            AttemptOutcome::RejectedAmbiguous => summary.rejected_ambiguous += 1,
            AttemptOutcome::RejectedDependent => summary.rejected_dependent += 1,
            _ => summary.rejected_other += 1,
        }
    }
    summary
}

/// One centered, sign-normalized 1-D solution, spikes sorted by coefficient.
struct CenteredSolution<S> {
    ws: Vec<S>,
    coefs: Vec<S>,
}

fn flip_to_canonical_sign<S: Scalar>(coefs: &[S]) -> bool {
    let mut sorted: Vec<S> = coefs.to_vec();
    sorted.sort_by(|a, b| b.cmp_total(a));
    let mut negated: Vec<S> = coefs.iter().map(|c| -c.clone()).collect();
    negated.sort_by(|a, b| b.cmp_total(a));
    for (a, b) in sorted.iter().zip(negated.iter()) {
        match b.cmp_total(a) {
            core::cmp::Ordering::Greater => return true,
            core::cmp::Ordering::Less => return false,
            core::cmp::Ordering::Equal => {}
        }
    }
    false
}

fn centered_solution<S: Scalar>(class: &EquivalenceClass<S>, n: usize) -> Result<CenteredSolution<S>> {
    let rep = class.representative();
    if rep.len() != n {
        return Err(Error::InvariantViolated("projected solution has the wrong spike count"));
    }
    let mut ws = rep.positions_1d()?;
    let mut coefs: Vec<S> = rep.spikes().iter().map(|s| s.coef.clone()).collect();
    let mut mean = S::zero();
    for w in &ws {
        mean = mean + w.clone();
    }
    mean = mean / S::from_int(n as i64);
    for w in &mut ws {
        *w = w.clone() - mean.clone();
    }
    if flip_to_canonical_sign(&coefs) {
        for c in &mut coefs {
            *c = -c.clone();
        }
    }
    let mut pairs: Vec<(S, S)> = coefs.into_iter().zip(ws).collect();
    pairs.sort_by(|a, b| a.0.cmp_total(&b.0).then_with(|| a.1.cmp_total(&b.1)));
    let (coefs, ws) = pairs.into_iter().unzip();
    Ok(CenteredSolution { ws, coefs })
}

struct FusionState<'a, S> {
    m_inv: &'a [Vec<S>],
    ref_coefs: &'a [S],
    base_ws: &'a [Vec<S>],
    val_dirs: &'a [&'a ProjectionDirection<S>],
    val_sols: &'a [CenteredSolution<S>],
    val_signs: &'a [bool],
    tol: Tolerance,
}

#[allow(clippy::too_many_arguments)]
fn associate<S: Scalar>(
    state: &FusionState<'_, S>,
    k: usize,
    used: &mut [Vec<bool>],
    val_used: &mut [Vec<bool>],
    positions: &mut Vec<Vec<S>>,
    out: &mut Vec<Vec<Vec<S>>>,
) {
    let n = state.ref_coefs.len();
    if k == n {
        out.push(positions.clone());
        return;
    }
    let d = state.base_ws.len();
    // Candidate index per non-reference direction, chosen by coefficient.
    let mut choice = vec![0usize; d];
    choice[0] = k;
    fn rec<S: Scalar>(
        state: &FusionState<'_, S>,
        k: usize,
        dir_idx: usize,
        choice: &mut [usize],
        used: &mut [Vec<bool>],
        val_used: &mut [Vec<bool>],
        positions: &mut Vec<Vec<S>>,
        out: &mut Vec<Vec<Vec<S>>>,
    ) {
        let d = state.base_ws.len();
        if dir_idx == d {
            // Solve for the spike position from the chosen projections.
            let b: Vec<S> = (0..d)
                .map(|i| state.base_ws[i][choice[i]].clone())
                .collect();
            let x: Vec<S> = state
                .m_inv
                .iter()
                .map(|row| {
                    let mut acc = S::zero();
                    for (m, w) in row.iter().zip(b.iter()) {
                        acc = acc + m.clone() * w.clone();
                    }
                    acc
                })
                .collect();
            // Validation pruning: each validation direction must hold a
            // matching unused spike.
            let mut val_choices = Vec::with_capacity(state.val_dirs.len());
            for (v, dir) in state.val_dirs.iter().enumerate() {
                let projected = dir.project(&x);
                let sol = &state.val_sols[v];
                let mut found = None;
                for l in 0..sol.ws.len() {
                    if val_used[v][l] {
                        continue;
                    }
                    if !sol.coefs[l].matches_rel(&state.ref_coefs[k], state.tol) {
                        continue;
                    }
                    let w = if state.val_signs[v] { sol.ws[l].clone() } else { -sol.ws[l].clone() };
                    if w.matches_abs(&projected, state.tol) {
                        found = Some(l);
                        break;
                    }
                }
                match found {
                    Some(l) => {
                        val_used[v][l] = true;
                        val_choices.push(l);
                    }
                    None => {
                        for (v2, l) in val_choices.into_iter().enumerate() {
                            val_used[v2][l] = false;
                        }
                        return;
                    }
                }
            }
            positions.push(x);
            associate(state, k + 1, used, val_used, positions, out);
            positions.pop();
            for (v, l) in val_choices.into_iter().enumerate() {
                val_used[v][l] = false;
            }
            return;
        }
        for j in 0..state.base_ws[dir_idx].len() {
            if used[dir_idx][j] {
                continue;
            }
            // All directions carry the same coefficient multiset; the spike
            // labeled k in the reference must match coefficient-wise.
            if !state.ref_coefs[j].matches_rel(&state.ref_coefs[k], state.tol) {
                continue;
            }
            used[dir_idx][j] = true;
            choice[dir_idx] = j;
            rec(state, k, dir_idx + 1, choice, used, val_used, positions, out);
            used[dir_idx][j] = false;
        }
    }
    rec(state, k, 1, &mut choice, used, val_used, positions, out);
}

/// Fuses per-direction 1-D solutions into D-dimensional candidate signals.
///
/// Every solution is centered at its unweighted support centroid (the
/// centroid projects to the projected centroid, so translation drops out)
/// and sign-normalized. Spikes are associated across directions by
/// coefficient; repeated coefficients fall back to a backtracking search
/// over assignments pruned by the validation directions. Per-direction
/// reflections are enumerated, and wrong associations are eliminated later
/// by the full ACF comparison.
fn fuse<S: Scalar>(
    base: &[(ProjectionDirection<S>, EquivalenceClass<S>)],
    validation: &[(ProjectionDirection<S>, EquivalenceClass<S>)],
    n: usize,
    tol: Tolerance,
) -> Result<Vec<SpikeSignal<S>>> {
    let d = base.len();
    let base_sols: Vec<CenteredSolution<S>> = base
        .iter()
        .map(|(_, class)| centered_solution(class, n))
        .collect::<Result<_>>()?;
    let val_sols: Vec<CenteredSolution<S>> = validation
        .iter()
        .map(|(_, class)| centered_solution(class, n))
        .collect::<Result<_>>()?;
    let ref_coefs = &base_sols[0].coefs;
    for sol in base_sols.iter().chain(val_sols.iter()) {
        let same = sol
            .coefs
            .iter()
            .zip(ref_coefs.iter())
            .all(|(a, b)| a.matches_rel(b, tol));
        if !same {
            return Err(Error::InconsistentAcf("projected coefficient multisets disagree"));
        }
    }
    let distinct = (0..n).all(|i| {
        (i + 1..n).all(|j| !ref_coefs[i].matches_rel(&ref_coefs[j], tol))
    });
    if !distinct && n > 8 {
        return Err(Error::TooLarge);
    }

    let m: Vec<Vec<S>> = base.iter().map(|(dir, _)| dir.components().to_vec()).collect();
    let m_inv = linalg::invert(&m)?;
    let val_dirs: Vec<&ProjectionDirection<S>> = validation.iter().map(|(dir, _)| dir).collect();

    let mut candidates = Vec::new();
    for base_mask in 0u32..(1 << d) {
        let base_ws: Vec<Vec<S>> = base_sols
            .iter()
            .enumerate()
            .map(|(i, sol)| {
                if base_mask & (1 << i) != 0 {
                    sol.ws.iter().map(|w| -w.clone()).collect()
                } else {
                    sol.ws.clone()
                }
            })
            .collect();
        for val_mask in 0u32..(1 << val_dirs.len()) {
            let val_signs: Vec<bool> = (0..val_dirs.len())
                .map(|v| val_mask & (1 << v) == 0)
                .collect();
            let state = FusionState {
                m_inv: &m_inv,
                ref_coefs,
                base_ws: &base_ws,
                val_dirs: &val_dirs,
                val_sols: &val_sols,
                val_signs: &val_signs,
                tol,
            };
            let mut used = vec![vec![false; n]; d];
            let mut val_used = vec![vec![false; n]; val_dirs.len()];
            let mut positions = Vec::with_capacity(n);
            let mut assignments = Vec::new();
            associate(&state, 0, &mut used, &mut val_used, &mut positions, &mut assignments);
            for pos_set in assignments {
                let spikes: Vec<Spike<S>> = pos_set
                    .into_iter()
                    .zip(ref_coefs.iter().cloned())
                    .map(|(pos, coef)| Spike { pos, coef })
                    .collect();
                if let Ok(signal) = SpikeSignal::new(base[0].0.dim(), spikes, tol) {
                    candidates.push(signal);
                }
            }
        }
    }
    Ok(candidates)
}

/// Recovers a D-dimensional signal (`dim >= 2`) from a collision-free ACF by
/// resampling projection directions until `dim + 1` of them are accepted
/// (collision-free projection, unique 1-D solution, base directions linearly
/// independent), fusing the 1-D solutions, and validating every candidate
/// against the full ACF. Deterministic given the seed.
pub fn recover_multidim<S: Scalar>(
    acf: &DeltaAcf<S>,
    seed: u64,
    opts: &RecoverOptions,
    tol: Tolerance,
) -> Result<MultidimRecovery<S>> {
    let dim = acf.dim();
    if dim < 2 {
        return Err(Error::InvalidAcf("multidimensional recovery needs dim >= 2"));
    }
    let full = acf.to_full();
    let nonzero = full.deltas().len() - 1;
    let positive = nonzero / 2;
    if positive == 0 {
        let coef = scalar_sqrt(&full.zero_lag_coef())?;
        let spike = Spike { pos: vec![S::zero(); dim], coef };
        let signal = SpikeSignal::new(dim, vec![spike], tol)?;
        return Ok(MultidimRecovery {
            verdict: UniquenessVerdict::Unique(canonicalize(&signal, tol)),
            attempts: Vec::new(),
        });
    }
    let n = match triangular_n(positive) {
        Some(n) => n,
        None => {
            return Ok(MultidimRecovery {
                verdict: UniquenessVerdict::NotCovered(String::from("collisions")),
                attempts: Vec::new(),
            })
        }
    };
    let needed = opts.direction_count.unwrap_or(dim + 1);
    if needed < dim + 1 {
        return Err(Error::BadOptions("need at least dim + 1 accepted directions"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempts: Vec<AttemptRecord<S>> = Vec::new();
    let mut accepted: Vec<(ProjectionDirection<S>, EquivalenceClass<S>)> = Vec::new();
    let mut fails_since_accept = 0usize;
    while accepted.len() < needed {
        if fails_since_accept >= opts.attempts_per_direction {
            return Err(Error::GaveUp(summarize(&attempts)));
        }
        let widen = (fails_since_accept / 8) as u32;
        let components = S::sample_direction_components(dim, widen, &mut rng);
        let dir = ProjectionDirection::new(components)?;

        if S::EXACT
            && attempts
                .iter()
                .any(|a| a.direction == dir.components())
        {
            attempts.push(AttemptRecord {
                direction: dir.components().to_vec(),
                outcome: AttemptOutcome::RejectedDuplicate,
            });
            fails_since_accept += 1;
            continue;
        }
        if accepted.len() < dim {
            let mut rows: Vec<Vec<S>> = accepted
                .iter()
                .map(|(d, _)| d.components().to_vec())
                .collect();
            rows.push(dir.components().to_vec());
            if linalg::rank_generic(&rows) < rows.len() {
                attempts.push(AttemptRecord {
                    direction: dir.components().to_vec(),
                    outcome: AttemptOutcome::RejectedDependent,
                });
                fails_since_accept += 1;
                continue;
            }
        }
        let outcome = evaluate_direction(&full, &dir, tol)?;
        let record_outcome = match &outcome {
            DirectionOutcome::Usable(_) => AttemptOutcome::Accepted,
            DirectionOutcome::Collision => AttemptOutcome::RejectedCollision,
            DirectionOutcome::Ambiguous => AttemptOutcome::RejectedAmbiguous,
            DirectionOutcome::Failed => AttemptOutcome::RejectedSolver,
        };
        attempts.push(AttemptRecord {
            direction: dir.components().to_vec(),
            outcome: record_outcome,
        });
        match outcome {
            DirectionOutcome::Usable(class) => {
                accepted.push((dir, class));
                fails_since_accept = 0;
            }
            _ => fails_since_accept += 1,
        }
    }

    let candidates = fuse(&accepted[..dim], &accepted[dim..], n, tol)?;
    let mut validated = Vec::new();
    for candidate in candidates {
        let candidate_acf = compute_acf(&candidate, tol);
        if candidate_acf.matches(&full, tol) {
            validated.push(canonicalize(&candidate, tol));
        }
    }
    let classes = dedup_classes(validated, tol);
    let verdict = match classes.len() {
        0 => return Err(Error::InconsistentAcf("no fused candidate reproduces the ACF")),
        1 => UniquenessVerdict::Unique(classes.into_iter().next().expect("one class")),
        _ => UniquenessVerdict::Ambiguous(classes),
    };
    Ok(MultidimRecovery { verdict, attempts })
}
