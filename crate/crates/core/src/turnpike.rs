//! 1-D support recovery from a difference multiset (the turnpike problem)
//! and the six-point parametric family of homometric counterexample pairs.
//!
//! For a collision-free difference multiset the solution is unique up to the
//! signal equivalence class, except when the support belongs to the unique
//! two-parameter family of six-point sets; in that case exactly two classes
//! share the multiset. [`support_uniqueness`] packages that trichotomy.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::scalar::{Scalar, Tolerance};
use crate::signal::{canonicalize, dedup_classes, DeltaAcf, EquivalenceClass, SpikeSignal};
use crate::Result;

/// Sorted multiset of strictly positive pairwise differences. A set of `n`
/// points induces `n(n-1)/2` of them.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceMultiset<S> {
    diffs: Vec<S>,
}

impl<S: Scalar> DifferenceMultiset<S> {
    pub fn new(mut diffs: Vec<S>) -> Result<Self> {
        if diffs.iter().any(|d| d.is_zero() || d.is_negative()) {
            return Err(Error::InvalidDiffs("differences must be strictly positive"));
        }
        diffs.sort_by(|a, b| a.cmp_total(b));
        Ok(DifferenceMultiset { diffs })
    }

    /// Positive lags of a 1-D ACF, discarding coefficients.
    pub fn from_acf(acf: &DeltaAcf<S>) -> Result<Self> {
        let diffs = acf
            .positive_lags_1d()?
            .into_iter()
            .map(|(lag, _)| lag)
            .collect();
        Self::new(diffs)
    }

    pub fn diffs(&self) -> &[S] {
        &self.diffs
    }

    pub fn len(&self) -> usize {
        self.diffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diffs.is_empty()
    }

    /// The point count `n` with `n(n-1)/2` differences, if the cardinality
    /// has that form.
    pub fn implied_n(&self) -> Option<usize> {
        triangular_n(self.diffs.len())
    }

    /// True when two entries coincide (within the absolute tolerance), i.e.
    /// the generating ACF had collisions.
    pub fn has_repeats(&self, tol: Tolerance) -> bool {
        self.diffs
            .windows(2)
            .any(|w| w[0].matches_abs(&w[1], tol))
    }
}

/// Smallest `n >= 2` with `n(n-1)/2 == len`, if any: the spike count whose
/// collision-free ACF has `len` positive lags.
pub fn triangular_n(len: usize) -> Option<usize> {
    let mut n = 2usize;
    loop {
        let t = n * (n - 1) / 2;
        if t == len {
            return Some(n);
        }
        if t > len {
            return None;
        }
        n += 1;
    }
}

/// Sorted multiset with tolerant removal, the working set of the
/// backtracking solver. Removal takes the closest entry inside the matching
/// window; ties go to the smaller value, keeping floating runs deterministic.
#[derive(Debug, Clone)]
struct SortedMultiset<S> {
    items: Vec<S>,
}

impl<S: Scalar> SortedMultiset<S> {
    fn new(mut items: Vec<S>) -> Self {
        items.sort_by(|a, b| a.cmp_total(b));
        SortedMultiset { items }
    }

    fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    fn pop_max(&mut self) -> Option<S> {
        self.items.pop()
    }

    fn peek_max(&self) -> Option<&S> {
        self.items.last()
    }

    fn insert(&mut self, value: S) {
        let idx = self
            .items
            .partition_point(|x| x.cmp_total(&value) == core::cmp::Ordering::Less);
        self.items.insert(idx, value);
    }

    fn take_closest(&mut self, target: &S, tol: Tolerance) -> Option<S> {
        let idx = self
            .items
            .partition_point(|x| x.cmp_total(target) == core::cmp::Ordering::Less);
        let mut best: Option<(usize, f64)> = None;
        let mut consider = |i: usize, items: &[S]| {
            let dist = (items[i].clone() - target.clone()).abs().to_f64();
            match best {
                Some((bi, bd)) if bd < dist || (bd == dist && bi < i) => {}
                _ => best = Some((i, dist)),
            }
        };
        let mut i = idx;
        while i > 0 && self.items[i - 1].matches_abs(target, tol) {
            consider(i - 1, &self.items);
            i -= 1;
        }
        let mut j = idx;
        while j < self.items.len() && self.items[j].matches_abs(target, tol) {
            consider(j, &self.items);
            j += 1;
        }
        best.map(|(i, _)| self.items.remove(i))
    }

    /// Removes the distances from `point` to every placed point, or restores
    /// the multiset and reports failure if one of them is absent.
    fn remove_distances(&mut self, point: &S, placed: &[S], tol: Tolerance) -> Option<Vec<S>> {
        let mut removed = Vec::with_capacity(placed.len());
        for p in placed {
            let dist = (point.clone() - p.clone()).abs();
            match self.take_closest(&dist, tol) {
                Some(v) => removed.push(v),
                None => {
                    for v in removed {
                        self.insert(v);
                    }
                    return None;
                }
            }
        }
        Some(removed)
    }
}

/// Recovers every point set realizing a difference multiset, up to the
/// signal equivalence class.
///
/// Backtracking scheme: pin 0 and `max(diffs)`, then repeatedly place the
/// largest unused difference `d` either at `d` or at `max - d`, keeping a
/// placement only when its distances to all placed points can be removed
/// from the remaining multiset. The very first branch places at `d` only:
/// that fixes the reflection, which canonicalization restores. Returns an
/// empty list when nothing realizes the input.
pub fn solve_turnpike<S: Scalar>(
    diffs: &DifferenceMultiset<S>,
    tol: Tolerance,
) -> Result<Vec<EquivalenceClass<S>>> {
    let n = diffs
        .implied_n()
        .ok_or(Error::InvalidCardinality(diffs.len()))?;
    let mut remaining = SortedMultiset::new(diffs.diffs().to_vec());
    let x_max = remaining.pop_max().expect("nonempty multiset");
    let mut placed = vec![S::zero(), x_max.clone()];
    let mut found = Vec::new();
    search(&mut remaining, &mut placed, &x_max, n, true, tol, &mut found);
    Ok(dedup_classes(found, tol))
}

fn search<S: Scalar>(
    remaining: &mut SortedMultiset<S>,
    placed: &mut Vec<S>,
    x_max: &S,
    n: usize,
    first_branch: bool,
    tol: Tolerance,
    out: &mut Vec<EquivalenceClass<S>>,
) {
    if placed.len() == n {
        if remaining.is_empty() {
            let pairs = placed.iter().map(|p| (p.clone(), S::one())).collect();
            if let Ok(signal) = SpikeSignal::new_1d(pairs, tol) {
                out.push(canonicalize(&signal, tol));
            }
        }
        return;
    }
    let d = match remaining.peek_max() {
        Some(d) => d.clone(),
        None => return,
    };
    let mirror = x_max.clone() - d.clone();
    let mut candidates = vec![d.clone()];
    if !first_branch && !mirror.matches_abs(&d, tol) {
        candidates.push(mirror);
    }
    for q in candidates {
        if placed.iter().any(|p| p.matches_abs(&q, tol)) {
            continue;
        }
        if let Some(removed) = remaining.remove_distances(&q, placed, tol) {
            placed.push(q);
            search(remaining, placed, x_max, n, false, tol, out);
            placed.pop();
            for v in removed {
                remaining.insert(v);
            }
        }
    }
}

/// Linear model of the X branch of the six-point counterexample family:
/// support values are `Q_X p` for the parameter `p = (p1, p2)`.
pub const BEKIR_QX: [[i64; 2]; 6] = [[0, 0], [1, 0], [-2, 1], [-2, 2], [0, 2], [-1, 3]];

/// Linear model of the Y branch (the homometric partner of the X branch).
pub const BEKIR_QY: [[i64; 2]; 6] = [[0, 0], [1, 0], [2, 1], [1, 2], [-1, 2], [-1, 3]];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BekirBranch {
    X,
    Y,
}

/// Support values of one branch at parameter `p`, in model row order.
pub fn bekir_support<S: Scalar>(p: &[S; 2], branch: BekirBranch) -> Vec<S> {
    let rows = match branch {
        BekirBranch::X => &BEKIR_QX,
        BekirBranch::Y => &BEKIR_QY,
    };
    rows.iter()
        .map(|row| {
            S::from_int(row[0]) * p[0].clone() + S::from_int(row[1]) * p[1].clone()
        })
        .collect()
}

/// The homometric six-point pair at parameter `p`, as unit-coefficient
/// signals with ascending supports.
///
/// Rejects parameters with repeated values inside either branch. The two
/// supports are homometric for every admissible `p`; whether their common
/// difference multiset is collision-free is up to the caller to check.
pub fn generate_bekir_pair<S: Scalar>(
    p: &[S; 2],
    tol: Tolerance,
) -> Result<(SpikeSignal<S>, SpikeSignal<S>)> {
    let mut pair = Vec::with_capacity(2);
    for branch in [BekirBranch::X, BekirBranch::Y] {
        let mut values = bekir_support(p, branch);
        values.sort_by(|a, b| a.cmp_total(b));
        for w in values.windows(2) {
            if w[0].matches_abs(&w[1], tol) {
                return Err(Error::DegenerateParameter);
            }
        }
        let pairs = values.into_iter().map(|v| (v, S::one())).collect();
        pair.push(SpikeSignal::new_1d(pairs, tol)?);
    }
    let y = pair.pop().expect("two branches");
    let x = pair.pop().expect("two branches");
    Ok((x, y))
}

fn permutations_of_five() -> Vec<[usize; 5]> {
    let mut out = Vec::with_capacity(120);
    let mut current = [0usize; 5];
    let mut used = [false; 5];
    fn rec(depth: usize, current: &mut [usize; 5], used: &mut [bool; 5], out: &mut Vec<[usize; 5]>) {
        if depth == 5 {
            out.push(*current);
            return;
        }
        for v in 0..5 {
            if !used[v] {
                used[v] = true;
                current[depth] = v;
                rec(depth + 1, current, used, out);
                used[v] = false;
            }
        }
    }
    rec(0, &mut current, &mut used, &mut out);
    out
}

fn match_branch<S: Scalar>(pose: &[S], branch: BekirBranch, tol: Tolerance) -> Vec<[S; 2]> {
    let rows = match branch {
        BekirBranch::X => &BEKIR_QX[1..],
        BekirBranch::Y => &BEKIR_QY[1..],
    };
    debug_assert!(rows[0] == [1, 0] && rows[1][1] == 1);
    let targets = &pose[1..];
    let mut found: Vec<[S; 2]> = Vec::new();
    for sigma in permutations_of_five() {
        let p1 = targets[sigma[0]].clone();
        let p2 = targets[sigma[1]].clone() - S::from_int(rows[1][0]) * p1.clone();
        let ok = (2..5).all(|i| {
            let value = S::from_int(rows[i][0]) * p1.clone() + S::from_int(rows[i][1]) * p2.clone();
            value.matches_abs(&targets[sigma[i]], tol)
        });
        if ok {
            let p = [p1, p2];
            if !found
                .iter()
                .any(|q| q[0].matches_abs(&p[0], tol) && q[1].matches_abs(&p[1], tol))
            {
                found.push(p);
            }
        }
    }
    found
}

/// All family memberships of a six-point support, over both poses
/// (as given and reflected) and both branches.
fn bekir_memberships<S: Scalar>(support: &[S], tol: Tolerance) -> Vec<([S; 2], BekirBranch)> {
    if support.len() != 6 {
        return Vec::new();
    }
    let mut sorted = support.to_vec();
    sorted.sort_by(|a, b| a.cmp_total(b));
    if sorted.windows(2).any(|w| w[0].matches_abs(&w[1], tol)) {
        return Vec::new();
    }
    let base: Vec<S> = sorted
        .iter()
        .map(|v| v.clone() - sorted[0].clone())
        .collect();
    let reflected: Vec<S> = sorted
        .iter()
        .rev()
        .map(|v| sorted[5].clone() - v.clone())
        .collect();
    let mut memberships = Vec::new();
    for pose in [base, reflected] {
        for branch in [BekirBranch::X, BekirBranch::Y] {
            for p in match_branch(&pose, branch, tol) {
                let dup = memberships.iter().any(|(q, b): &([S; 2], BekirBranch)| {
                    *b == branch && q[0].matches_abs(&p[0], tol) && q[1].matches_abs(&p[1], tol)
                });
                if !dup {
                    memberships.push((p, branch));
                }
            }
        }
    }
    memberships
}

/// Tests whether a six-point support belongs to the counterexample family,
/// returning the parameter and branch of the first match (pose as given
/// before its reflection, X branch before Y).
pub fn is_bekir_member<S: Scalar>(support: &[S], tol: Tolerance) -> Option<([S; 2], BekirBranch)> {
    bekir_memberships(support, tol).into_iter().next()
}

/// Support-level uniqueness trichotomy for a 1-D difference multiset.
#[derive(Debug, Clone, PartialEq)]
pub enum SupportVerdict<S> {
    UniqueSupport(EquivalenceClass<S>),
    /// Exactly the two counterexample-family supports share the multiset.
    TwoSupports {
        x: EquivalenceClass<S>,
        y: EquivalenceClass<S>,
        p: [S; 2],
    },
    HasCollisions,
}

fn class_positions<S: Scalar>(class: &EquivalenceClass<S>) -> Result<Vec<S>> {
    class.representative().positions_1d()
}

/// Classifies a difference multiset: repeated entries, a unique support, or
/// the two six-point family supports (cross-checked against family
/// membership of both outputs).
pub fn support_uniqueness<S: Scalar>(
    diffs: &DifferenceMultiset<S>,
    tol: Tolerance,
) -> Result<SupportVerdict<S>> {
    if diffs.has_repeats(tol) {
        return Ok(SupportVerdict::HasCollisions);
    }
    let classes = solve_turnpike(diffs, tol)?;
    match classes.len() {
        0 => Err(Error::NoSolution),
        1 => Ok(SupportVerdict::UniqueSupport(
            classes.into_iter().next().expect("one class"),
        )),
        2 => {
            let a = &classes[0];
            let b = &classes[1];
            let members_a = bekir_memberships(&class_positions(a)?, tol);
            let members_b = bekir_memberships(&class_positions(b)?, tol);
            for (pa, branch_a) in &members_a {
                for (pb, branch_b) in &members_b {
                    let same_p =
                        pa[0].matches_abs(&pb[0], tol) && pa[1].matches_abs(&pb[1], tol);
                    if !same_p {
                        continue;
                    }
                    match (branch_a, branch_b) {
                        (BekirBranch::X, BekirBranch::Y) => {
                            return Ok(SupportVerdict::TwoSupports {
                                x: a.clone(),
                                y: b.clone(),
                                p: pa.clone(),
                            })
                        }
                        (BekirBranch::Y, BekirBranch::X) => {
                            return Ok(SupportVerdict::TwoSupports {
                                x: b.clone(),
                                y: a.clone(),
                                p: pb.clone(),
                            })
                        }
                        _ => {}
                    }
                }
            }
            Err(Error::InvariantViolated(
                "two collision-free supports outside the counterexample family",
            ))
        }
        _ => Err(Error::InvariantViolated(
            "more than two collision-free supports",
        )),
    }
}
