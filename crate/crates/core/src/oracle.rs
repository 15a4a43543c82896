//! Independent brute-force verifiers.
//!
//! These enumerate instead of solving and share nothing with the main
//! solvers beyond the core types, so the two paths can be checked against
//! each other on every small instance. Exact integer arithmetic only.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::multidim::ProjectionDirection;
use crate::scalar::{Rational, Scalar, Tolerance};
use crate::signal::{canonicalize, compute_acf, dedup_classes, DeltaAcf, EquivalenceClass, Spike, SpikeSignal};
use crate::turnpike::{solve_turnpike, triangular_n, DifferenceMultiset};
use crate::Result;

/// Sorted positive difference multiset of an integer support.
fn int_diffs(support: &[i64]) -> Vec<i64> {
    let mut out = Vec::with_capacity(support.len() * (support.len() - 1) / 2);
    for i in 0..support.len() {
        for j in i + 1..support.len() {
            out.push((support[j] - support[i]).abs());
        }
    }
    out.sort_unstable();
    out
}

fn for_each_combination<F: FnMut(&[i64])>(low: i64, high: i64, k: usize, f: &mut F) {
    fn rec<F: FnMut(&[i64])>(next: i64, high: i64, k: usize, current: &mut Vec<i64>, f: &mut F) {
        if current.len() == k {
            f(current);
            return;
        }
        let remaining = (k - current.len()) as i64;
        let mut v = next;
        while v + remaining - 1 <= high {
            current.push(v);
            rec(v + 1, high, k, current, f);
            current.pop();
            v += 1;
        }
    }
    let mut current = Vec::with_capacity(k);
    rec(low, high, k, &mut current, f);
}

/// Recovers all integer supports realizing a difference multiset by full
/// enumeration: every support `{0 = s_1 < ... < s_n = max(diffs)}` inside
/// `[0, bound]` is tested for difference-multiset equality, then
/// canonicalized and deduplicated.
pub fn exhaustive_turnpike(diffs: &[i64], bound: i64) -> Result<Vec<EquivalenceClass<Rational>>> {
    if diffs.iter().any(|&d| d <= 0) {
        return Err(Error::InvalidDiffs("differences must be strictly positive"));
    }
    let n = triangular_n(diffs.len()).ok_or(Error::InvalidCardinality(diffs.len()))?;
    let max = *diffs.iter().max().expect("nonempty");
    if bound < max {
        return Err(Error::InvalidBound);
    }
    let mut sorted = diffs.to_vec();
    sorted.sort_unstable();

    let mut found = Vec::new();
    let mut support = Vec::with_capacity(n);
    for_each_combination(1, max - 1, n - 2, &mut |interior| {
        support.clear();
        support.push(0);
        support.extend_from_slice(interior);
        support.push(max);
        if int_diffs(&support) == sorted {
            let signal = SpikeSignal::<Rational>::from_int_support(&support)
                .expect("distinct integer support");
            found.push(canonicalize(&signal, Tolerance::exact()));
        }
    });
    Ok(dedup_classes(found, Tolerance::exact()))
}

/// True when two equal-sized integer point sets have equal difference
/// multisets (homometric sets).
pub fn homometry_check(x: &[i64], y: &[i64]) -> bool {
    x.len() == y.len() && int_diffs(x) == int_diffs(y)
}

fn invert_local<S: Scalar>(m: &[Vec<S>]) -> Option<Vec<Vec<S>>> {
    let n = m.len();
    let mut a: Vec<Vec<S>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            for j in 0..n {
                r.push(if i == j { S::one() } else { S::zero() });
            }
            r
        })
        .collect();
    for col in 0..n {
        let pivot_row = (col..n).find(|&r| {
            if S::EXACT {
                !a[r][col].is_zero()
            } else {
                a[r][col].abs().to_f64() > 1e-12
            }
        })?;
        a.swap(col, pivot_row);
        let pivot = a[col][col].clone();
        for j in 0..2 * n {
            a[col][j] = a[col][j].clone() / pivot.clone();
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for j in 0..2 * n {
                a[r][j] = a[r][j].clone() - factor.clone() * a[col][j].clone();
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

fn for_each_permutation<F: FnMut(&[usize])>(n: usize, f: &mut F) {
    fn rec<F: FnMut(&[usize])>(n: usize, current: &mut Vec<usize>, used: &mut [bool], f: &mut F) {
        if current.len() == n {
            f(current);
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                current.push(v);
                rec(n, current, used, f);
                current.pop();
                used[v] = false;
            }
        }
    }
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; n];
    rec(n, &mut current, &mut used, f);
}

/// Brute-force fusion oracle: tries every association permutation and every
/// per-direction reflection of the given 1-D solutions, solves for the
/// D-dimensional positions, and keeps exactly the candidates whose full ACF
/// equals the input. Output is canonicalized and deduplicated.
pub fn exhaustive_association<S: Scalar>(
    acf: &DeltaAcf<S>,
    one_d: &[SpikeSignal<S>],
    directions: &[ProjectionDirection<S>],
    tol: Tolerance,
) -> Result<Vec<EquivalenceClass<S>>> {
    let dim = acf.dim();
    if directions.len() < dim || one_d.len() != directions.len() {
        return Err(Error::BadOptions("need one 1-D solution per direction, at least dim of them"));
    }
    let n = one_d[0].len();
    if n > 6 {
        return Err(Error::TooLarge);
    }
    if one_d.iter().any(|s| s.len() != n || s.dim() != 1) {
        return Err(Error::BadOptions("1-D solutions must share the spike count"));
    }
    let factorial: u64 = (1..=n as u64).product();
    let work = factorial
        .saturating_pow(dim as u32 - 1)
        .saturating_mul(1 << dim);
    if work > 500_000 {
        return Err(Error::TooLarge);
    }

    // Center every solution at its unweighted support centroid.
    let mut centered: Vec<(Vec<S>, Vec<S>)> = Vec::with_capacity(dim);
    for sol in one_d.iter().take(dim) {
        let mut ws = sol.positions_1d()?;
        let coefs: Vec<S> = sol.spikes().iter().map(|s| s.coef.clone()).collect();
        let mut mean = S::zero();
        for w in &ws {
            mean = mean + w.clone();
        }
        mean = mean / S::from_int(n as i64);
        for w in &mut ws {
            *w = w.clone() - mean.clone();
        }
        centered.push((ws, coefs));
    }

    let m: Vec<Vec<S>> = directions
        .iter()
        .take(dim)
        .map(|d| d.components().to_vec())
        .collect();
    let m_inv = invert_local(&m).ok_or(Error::BadOptions("directions must be linearly independent"))?;

    let full = acf.to_full();
    let mut found = Vec::new();
    let mut assignments: Vec<Vec<usize>> = Vec::new();
    collect_assignment_products(dim, n, &mut assignments);

    for signs in 0u32..(1 << dim) {
        for assignment in &assignments {
            let mut spikes = Vec::with_capacity(n);
            for k in 0..n {
                let b: Vec<S> = (0..dim)
                    .map(|i| {
                        let idx = if i == 0 { k } else { assignment[(i - 1) * n + k] };
                        let w = centered[i].0[idx].clone();
                        if signs & (1 << i) != 0 {
                            -w
                        } else {
                            w
                        }
                    })
                    .collect();
                let pos: Vec<S> = m_inv
                    .iter()
                    .map(|row| {
                        let mut acc = S::zero();
                        for (c, w) in row.iter().zip(b.iter()) {
                            acc = acc + c.clone() * w.clone();
                        }
                        acc
                    })
                    .collect();
                spikes.push(Spike { pos, coef: centered[0].1[k].clone() });
            }
            let candidate = match SpikeSignal::new(dim, spikes, tol) {
                Ok(s) => s,
                Err(_) => continue,
            };
            if compute_acf(&candidate, tol).matches(&full, tol) {
                found.push(canonicalize(&candidate, tol));
            }
        }
    }
    Ok(dedup_classes(found, tol))
}

/// All products of permutations for directions 1..dim-1, flattened per
/// product as `(dim-1)` blocks of `n` images.
fn collect_assignment_products(dim: usize, n: usize, out: &mut Vec<Vec<usize>>) {
    let mut perms: Vec<Vec<usize>> = Vec::new();
    for_each_permutation(n, &mut |p| perms.push(p.to_vec()));
    let blocks = dim - 1;
    let mut current: Vec<usize> = Vec::with_capacity(blocks * n);
    fn rec(
        blocks: usize,
        perms: &[Vec<usize>],
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == blocks * perms[0].len() {
            out.push(current.clone());
            return;
        }
        for p in perms {
            current.extend_from_slice(p);
            rec(blocks, perms, current, out);
            current.truncate(current.len() - p.len());
        }
    }
    if blocks == 0 {
        out.push(Vec::new());
    } else {
        rec(blocks, &perms, &mut current, out);
    }
}

/// Result of sweeping all integer supports of a given size against both the
/// backtracking solver and the exhaustive oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepReport {
    /// Supports enumerated.
    pub examined: usize,
    /// Collision-free supports actually compared.
    pub collision_free: usize,
    /// Compared supports on which both sides returned identical class lists.
    pub agreements: usize,
    /// Supports where they differed.
    pub disagreements: Vec<Vec<i64>>,
}

impl SweepReport {
    pub fn all_agree(&self) -> bool {
        self.disagreements.is_empty() && self.agreements == self.collision_free
    }
}

/// Enumerates every integer support `{0 = s_1 < ... < s_n <= bound}` and
/// compares `solve_turnpike` with `exhaustive_turnpike` on the
/// collision-free ones.
pub fn sweep_agreement(n: usize, bound: i64) -> Result<SweepReport> {
    if n < 2 {
        return Err(Error::BadOptions("sweep needs n >= 2"));
    }
    if bound < n as i64 - 1 {
        return Err(Error::InvalidBound);
    }
    let mut report = SweepReport {
        examined: 0,
        collision_free: 0,
        agreements: 0,
        disagreements: Vec::new(),
    };
    for max in (n as i64 - 1)..=bound {
        let mut supports: Vec<Vec<i64>> = Vec::new();
        for_each_combination(1, max - 1, n - 2, &mut |interior| {
            let mut support = Vec::with_capacity(n);
            support.push(0);
            support.extend_from_slice(interior);
            support.push(max);
            supports.push(support);
        });
        for support in supports {
            report.examined += 1;
            let diffs = int_diffs(&support);
            if diffs.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
            report.collision_free += 1;
            let oracle_classes = exhaustive_turnpike(&diffs, max)?;
            let rat_diffs = DifferenceMultiset::new(
                diffs.iter().map(|&d| Rational::from_int(d)).collect(),
            )?;
            let solver_classes = solve_turnpike(&rat_diffs, Tolerance::exact())?;
            if oracle_classes == solver_classes {
                report.agreements += 1;
            } else {
                report.disagreements.push(support);
            }
        }
    }
    Ok(report)
}
