//! Coefficient recovery given support and ACF, disambiguation of the
//! six-point counterexample pair, and the full 1-D uniqueness classifier.
//!
//! With the support known and the ACF collision-free, every off-diagonal
//! entry of the rank-one matrix `C = c c^T` can be read off the ACF. The
//! matrix `A = C - diag(|c_k|^2)` is then fully known, and a single
//! inversion recovers the diagonal: `|c_k|^2 = (n-2)/(1-n) / (A^{-1})_kk`.
//! When the turnpike step returns two candidate supports, each induces a
//! log-linear system tying spike log-coefficients to ACF log-coefficients;
//! at most one of them is consistent unless all coefficients are equal.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::Error;
use crate::linalg;
use crate::scalar::{Scalar, Tolerance};
use crate::signal::{canonicalize, dedup_classes, DeltaAcf, EquivalenceClass, SpikeSignal};
use crate::turnpike::{solve_turnpike, triangular_n, DifferenceMultiset};
use crate::Result;

/// Uniqueness classification of a phase-retrieval instance, carrying the
/// recovered signal(s).
#[derive(Debug, Clone, PartialEq)]
pub enum UniquenessVerdict<S> {
    /// One equivalence class explains the measurement.
    Unique(EquivalenceClass<S>),
    /// Several classes explain it; all witnesses are returned.
    Ambiguous(Vec<EquivalenceClass<S>>),
    /// The instance falls outside the collision-free theory.
    NotCovered(String),
}

/// Outcome of testing the two candidate supports against the ACF
/// coefficients.
#[derive(Debug, Clone, PartialEq)]
pub enum Disambiguation<S> {
    OnlyX(Vec<S>),
    OnlyY(Vec<S>),
    /// Both supports are consistent; happens exactly when all coefficients
    /// are equal.
    Both(Vec<S>),
}

pub(crate) fn scalar_sqrt<S: Scalar>(value: &S) -> Result<S> {
    if value.is_negative() {
        return Err(Error::InconsistentAcf("negative value where a square was expected"));
    }
    value.sqrt_exact().ok_or(Error::IrrationalCoefficient)
}

/// One matched row: a support pair and its signed ACF coefficient.
struct MatchedPair<S> {
    pair: (usize, usize),
    coef: S,
}

/// Matches every positive ACF lag to the unique support pair producing it,
/// in ascending lag order. Fails when the counts disagree, a difference has
/// no match, or a match is ambiguous at the working tolerance.
fn match_lags_to_pairs<S: Scalar>(
    support: &[S],
    acf: &DeltaAcf<S>,
    tol: Tolerance,
) -> Result<Vec<MatchedPair<S>>> {
    let n = support.len();
    let lags = acf.positive_lags_1d()?;
    if lags.len() != n * (n - 1) / 2 {
        return Err(Error::InconsistentAcf("lag count does not match the support size"));
    }
    let mut pair_diffs: Vec<((usize, usize), S)> = Vec::with_capacity(lags.len());
    for i in 0..n {
        for j in i + 1..n {
            let diff = (support[j].clone() - support[i].clone()).abs();
            if diff.is_zero() {
                return Err(Error::InconsistentAcf("support has repeated positions"));
            }
            pair_diffs.push(((i, j), diff));
        }
    }
    let mut used = vec![false; pair_diffs.len()];
    let mut matched = Vec::with_capacity(lags.len());
    for (lag, coef) in lags {
        let mut found: Option<usize> = None;
        for (k, (_, diff)) in pair_diffs.iter().enumerate() {
            if diff.matches_abs(&lag, tol) {
                if found.is_some() {
                    return Err(Error::InconsistentAcf("ambiguous lag-to-pair match"));
                }
                found = Some(k);
            }
        }
        let k = found.ok_or(Error::InconsistentAcf("ACF lag unmatched by the support"))?;
        if used[k] {
            return Err(Error::InconsistentAcf("one support pair matched two lags"));
        }
        used[k] = true;
        matched.push(MatchedPair { pair: pair_diffs[k].0, coef });
    }
    Ok(matched)
}

/// Symmetric matrix of signed pairwise products `c_i c_j` read off the ACF,
/// with a zero diagonal.
fn product_matrix<S: Scalar>(n: usize, matched: &[MatchedPair<S>]) -> Vec<Vec<S>> {
    let mut a = vec![vec![S::zero(); n]; n];
    for m in matched {
        let (i, j) = m.pair;
        a[i][j] = m.coef.clone();
        a[j][i] = m.coef.clone();
    }
    a
}

/// Recovers the spike coefficients of a known support from a collision-free
/// ACF, aligned with the support order and signed so the first coefficient
/// is positive.
///
/// For `n > 2` this inverts the off-diagonal product matrix and completes it
/// to rank one; `n = 2` is solved in closed form from the single cross term
/// and the zero lag, and `n = 1` reads the zero lag directly. The zero-lag
/// coefficient must equal the recovered energy, otherwise the ACF is
/// rejected as inconsistent.
pub fn recover_coefficients<S: Scalar>(
    support: &[S],
    acf: &DeltaAcf<S>,
    tol: Tolerance,
) -> Result<Vec<S>> {
    let n = support.len();
    if n == 0 {
        return Err(Error::InvalidSignal("empty support"));
    }
    let zero_coef = acf.zero_lag_coef();
    if n == 1 {
        if !acf.positive_lags_1d()?.is_empty() {
            return Err(Error::InconsistentAcf("single spike cannot produce nonzero lags"));
        }
        return Ok(vec![scalar_sqrt(&zero_coef)?]);
    }
    let matched = match_lags_to_pairs(support, acf, tol)?;
    if n == 2 {
        let cross = matched[0].coef.clone();
        let two = S::from_int(2);
        let disc = zero_coef.clone() * zero_coef.clone()
            - S::from_int(4) * cross.clone() * cross.clone();
        if disc.is_negative() {
            return Err(Error::InconsistentAcf("no real coefficients solve the zero lag"));
        }
        let root = scalar_sqrt(&disc)?;
        let t = (zero_coef + root) / two;
        if t.is_zero() {
            return Err(Error::InconsistentAcf("degenerate two-spike system"));
        }
        let c1 = scalar_sqrt(&t)?;
        let c2 = cross / c1.clone();
        return Ok(vec![c1, c2]);
    }

    let a = product_matrix(n, &matched);
    let inv = linalg::invert(&a)?;
    let factor = S::from_int(n as i64 - 2) / S::from_int(1 - n as i64);
    let mut alphas = Vec::with_capacity(n);
    for (k, row) in inv.iter().enumerate() {
        if row[k].is_zero() {
            return Err(Error::SingularSystem);
        }
        let alpha = factor.clone() / row[k].clone();
        if alpha.is_negative() || alpha.is_zero() {
            return Err(Error::InconsistentAcf("recovered spike energy is not positive"));
        }
        alphas.push(alpha);
    }
    let mut energy = S::zero();
    for alpha in &alphas {
        energy = energy + alpha.clone();
    }
    if !energy.matches_rel(&zero_coef, tol) {
        return Err(Error::InconsistentAcf("zero-lag coefficient does not match the energy"));
    }

    // Completed rank-one matrix: A off the diagonal, alpha on it.
    let mut coefs;
    if S::EXACT {
        let anchor = scalar_sqrt(&alphas[0])?;
        coefs = Vec::with_capacity(n);
        coefs.push(anchor.clone());
        for k in 1..n {
            coefs.push(a[0][k].clone() / anchor.clone());
        }
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j { alphas[i].clone() } else { a[i][j].clone() };
                if coefs[i].clone() * coefs[j].clone() != expected {
                    return Err(Error::InconsistentAcf("completed matrix is not rank one"));
                }
            }
        }
    } else {
        let mut c_f64: Vec<Vec<f64>> = a
            .iter()
            .map(|row| row.iter().map(Scalar::to_f64).collect())
            .collect();
        for (k, alpha) in alphas.iter().enumerate() {
            c_f64[k][k] = alpha.to_f64();
        }
        let (lambda, v) = linalg::dominant_eigen_f64(&c_f64)?;
        if lambda <= 0.0 {
            return Err(Error::InconsistentAcf("completed matrix has no positive eigenvalue"));
        }
        let scale = Float::sqrt(lambda);
        coefs = v.iter().map(|x| S::from_f64_lossy(x * scale)).collect();
    }
    if coefs[0].is_negative() {
        coefs = coefs.into_iter().map(|c| -c).collect();
    }
    Ok(coefs)
}

/// The log-linear system tying spike log-coefficients to ACF
/// log-coefficients: one row per positive lag (ascending), with unit entries
/// at the two spikes whose difference equals that lag. Built only for
/// collision-free matchings.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLinearSystem {
    pub pair_rows: Vec<(usize, usize)>,
    pub log_rhs: Vec<f64>,
    pub unknowns: usize,
}

impl LogLinearSystem {
    /// Dense 0/1 row representation.
    pub fn dense_rows(&self) -> Vec<Vec<f64>> {
        self.pair_rows
            .iter()
            .map(|&(i, j)| {
                let mut row = vec![0.0f64; self.unknowns];
                row[i] = 1.0;
                row[j] = 1.0;
                row
            })
            .collect()
    }
}

/// Builds the log-linear system of a candidate support against an ACF.
/// Coefficients enter through their absolute values.
pub fn log_linear_system<S: Scalar>(
    support: &[S],
    acf: &DeltaAcf<S>,
    tol: Tolerance,
) -> Result<LogLinearSystem> {
    let matched = match_lags_to_pairs(support, acf, tol)?;
    let mut pair_rows = Vec::with_capacity(matched.len());
    let mut log_rhs = Vec::with_capacity(matched.len());
    for m in &matched {
        let mag = m.coef.abs().to_f64();
        if mag <= 0.0 {
            return Err(Error::InconsistentAcf("zero ACF coefficient on a nonzero lag"));
        }
        pair_rows.push(m.pair);
        log_rhs.push(Float::ln(mag));
    }
    Ok(LogLinearSystem { pair_rows, log_rhs, unknowns: support.len() })
}

/// Dimension of the intersection of the column spans of two log-linear
/// systems sharing the same lag ordering:
/// `rank(C_x) + rank(C_y) - rank([C_x, C_y])`.
pub fn intersection_dimension(
    x: &LogLinearSystem,
    y: &LogLinearSystem,
    rank_tol: f64,
) -> Result<isize> {
    if x.pair_rows.len() != y.pair_rows.len() {
        return Err(Error::BadOptions("systems must share the lag ordering"));
    }
    let rows_x = x.dense_rows();
    let rows_y = y.dense_rows();
    let concat: Vec<Vec<f64>> = rows_x
        .iter()
        .zip(rows_y.iter())
        .map(|(a, b)| a.iter().chain(b.iter()).copied().collect())
        .collect();
    let rx = linalg::rank_f64(&rows_x, rank_tol) as isize;
    let ry = linalg::rank_f64(&rows_y, rank_tol) as isize;
    let rc = linalg::rank_f64(&concat, rank_tol) as isize;
    Ok(rx + ry - rc)
}

/// Tests one candidate support against the ACF coefficients; returns the
/// signed coefficient vector when consistent, `None` otherwise.
///
/// Magnitudes come from the log-linear system: exact mode solves it
/// multiplicatively (products of coefficient magnitudes over index triples)
/// and demands exact agreement on every equation, floating mode solves the
/// least-squares problem and accepts a residual up to `eps * ||q||`. Signs
/// are restored afterwards by two-coloring the pair graph against the signed
/// ACF coefficients.
fn consistent_coefficients<S: Scalar>(
    support: &[S],
    acf: &DeltaAcf<S>,
    tol: Tolerance,
) -> Result<Option<Vec<S>>> {
    let n = support.len();
    if n < 3 {
        return Err(Error::BadOptions("disambiguation needs at least three spikes"));
    }
    let matched = match_lags_to_pairs(support, acf, tol)?;
    if matched.iter().any(|m| m.coef.is_zero()) {
        return Ok(None);
    }
    let d = product_matrix(n, &matched);

    let magnitudes: Vec<S> = if S::EXACT {
        let mut mags = Vec::with_capacity(n);
        for k in 0..n {
            let mut others = (0..n).filter(|&i| i != k);
            let a = others.next().expect("n >= 3");
            let b = others.next().expect("n >= 3");
            let alpha = d[k][a].abs() * d[k][b].abs() / d[a][b].abs();
            match scalar_sqrt(&alpha) {
                Ok(m) => mags.push(m),
                Err(_) => return Ok(None),
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if mags[i].clone() * mags[j].clone() != d[i][j].abs() {
                    return Ok(None);
                }
            }
        }
        mags
    } else {
        let rows: Vec<Vec<f64>> = matched
            .iter()
            .map(|m| {
                let mut row = vec![0.0f64; n];
                row[m.pair.0] = 1.0;
                row[m.pair.1] = 1.0;
                row
            })
            .collect();
        let q: Vec<f64> = matched.iter().map(|m| Float::ln(m.coef.abs().to_f64())).collect();
        let (r, residual) = match linalg::lstsq_f64(&rows, &q) {
            Ok(v) => v,
            Err(_) => return Ok(None),
        };
        let q_norm = Float::sqrt(q.iter().map(|x| x * x).sum::<f64>());
        // Residual scale floored at one so an all-unit-coefficient system
        // (q = 0) stays testable.
        if residual > tol.eps * q_norm.max(1.0) {
            return Ok(None);
        }
        r.iter().map(|x| S::from_f64_lossy(Float::exp(*x))).collect()
    };

    // Energy check against the zero lag.
    let mut energy = S::zero();
    for m in &magnitudes {
        energy = energy + m.clone() * m.clone();
    }
    if !energy.matches_rel(&acf.zero_lag_coef(), tol) {
        return Ok(None);
    }

    // Sign restoration: fix spike 0 positive, propagate along its row, then
    // check every remaining pair for a consistent two-coloring.
    let mut signs = vec![true; n];
    for k in 1..n {
        signs[k] = !d[0][k].is_negative();
    }
    for i in 0..n {
        for j in i + 1..n {
            let expected_positive = signs[i] == signs[j];
            if d[i][j].is_negative() == expected_positive {
                return Ok(None);
            }
        }
    }
    Ok(Some(
        magnitudes
            .into_iter()
            .zip(signs)
            .map(|(m, positive)| if positive { m } else { -m })
            .collect(),
    ))
}

/// Decides which of the two candidate supports explains the ACF
/// coefficients. `Both` is returned exactly when all recovered coefficients
/// are equal, the one-dimensional intersection of the two systems.
pub fn disambiguate_supports<S: Scalar>(
    x: &[S],
    y: &[S],
    acf: &DeltaAcf<S>,
    tol: Tolerance,
) -> Result<Disambiguation<S>> {
    let cx = consistent_coefficients(x, acf, tol)?;
    let cy = consistent_coefficients(y, acf, tol)?;
    match (cx, cy) {
        (Some(a), Some(_)) => {
            let all_equal = a.windows(2).all(|w| w[0].matches_rel(&w[1], tol));
            if all_equal {
                Ok(Disambiguation::Both(a))
            } else {
                Err(Error::InvariantViolated(
                    "both supports consistent with unequal coefficients",
                ))
            }
        }
        (Some(a), None) => Ok(Disambiguation::OnlyX(a)),
        (None, Some(b)) => Ok(Disambiguation::OnlyY(b)),
        (None, None) => Err(Error::InconsistentAcf(
            "neither candidate support explains the coefficients",
        )),
    }
}

fn signal_from<S: Scalar>(positions: &[S], coefs: &[S], tol: Tolerance) -> Result<SpikeSignal<S>> {
    let pairs = positions
        .iter()
        .cloned()
        .zip(coefs.iter().cloned())
        .collect();
    SpikeSignal::new_1d(pairs, tol)
}

/// Full 1-D uniqueness classification of an ACF.
///
/// Collisions (detected as a non-triangular or repeated lag set) are out of
/// scope and reported as `NotCovered`; otherwise the support step returns
/// one or two candidate supports, coefficients are recovered, and the two-
/// support case is settled by [`disambiguate_supports`]. Equal-coefficient
/// counterexample instances come back `Ambiguous` with both witnesses.
pub fn classify_uniqueness_1d<S: Scalar>(
    acf: &DeltaAcf<S>,
    tol: Tolerance,
) -> Result<UniquenessVerdict<S>> {
    if acf.dim() != 1 {
        return Err(Error::InvalidAcf("expected a 1-D ACF"));
    }
    let positive = acf.positive_lags_1d()?;
    if positive.is_empty() {
        let coef = scalar_sqrt(&acf.zero_lag_coef())?;
        let signal = signal_from(&[S::zero()], &[coef], tol)?;
        return Ok(UniquenessVerdict::Unique(canonicalize(&signal, tol)));
    }
    if triangular_n(positive.len()).is_none() {
        return Ok(UniquenessVerdict::NotCovered(String::from("collisions")));
    }
    let diffs = DifferenceMultiset::from_acf(acf)?;
    if diffs.has_repeats(tol) {
        return Ok(UniquenessVerdict::NotCovered(String::from("collisions")));
    }
    let classes = solve_turnpike(&diffs, tol)?;
    match classes.len() {
        0 => Err(Error::InconsistentAcf("no support realizes the lag set")),
        1 => {
            let positions = classes[0].representative().positions_1d()?;
            let coefs = recover_coefficients(&positions, acf, tol)?;
            let signal = signal_from(&positions, &coefs, tol)?;
            Ok(UniquenessVerdict::Unique(canonicalize(&signal, tol)))
        }
        2 => {
            let x = classes[0].representative().positions_1d()?;
            let y = classes[1].representative().positions_1d()?;
            match disambiguate_supports(&x, &y, acf, tol)? {
                Disambiguation::OnlyX(c) => {
                    let signal = signal_from(&x, &c, tol)?;
                    Ok(UniquenessVerdict::Unique(canonicalize(&signal, tol)))
                }
                Disambiguation::OnlyY(c) => {
                    let signal = signal_from(&y, &c, tol)?;
                    Ok(UniquenessVerdict::Unique(canonicalize(&signal, tol)))
                }
                Disambiguation::Both(c) => {
                    let wx = canonicalize(&signal_from(&x, &c, tol)?, tol);
                    let wy = canonicalize(&signal_from(&y, &c, tol)?, tol);
                    Ok(UniquenessVerdict::Ambiguous(dedup_classes(vec![wx, wy], tol)))
                }
            }
        }
        _ => Err(Error::InvariantViolated("more than two collision-free supports")),
    }
}
