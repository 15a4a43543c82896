//! Converts discrete Fourier-magnitude measurements into delta ACFs.
//!
//! The inverse DFT of `|F(u)|^2` is the (circular) autocorrelation grid;
//! as long as the signal extent stays under half the grid per dimension
//! there is no wrap-around and thresholding the grid yields the delta ACF
//! directly. Two application front ends produce such grids at synthetic
//! scale: speckle-stack averaging and blind-channel periodograms.

use num_complex::Complex64;

use sparsepr_core::scalar::Tolerance;
use sparsepr_core::signal::{AcfDelta, DeltaAcf, SpikeSignal};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("grid shapes do not match")]
    ShapeError,
    #[error("no input vectors")]
    EmptyInput,
    #[error("not an ACF: {0}")]
    NotAnAcf(&'static str),
    #[error("invalid magnitude grid: {0}")]
    InvalidGrid(&'static str),
    #[error(transparent)]
    Core(#[from] sparsepr_core::Error),
}

/// Squared Fourier magnitudes sampled on a DFT grid, row-major.
///
/// Values must be real, nonnegative (small negatives within `eps` of zero
/// are clipped) and symmetric under index negation, which is exactly the
/// condition for the inverse DFT to be real.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeGrid {
    dims: Vec<usize>,
    values: Vec<f64>,
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for axis in (0..dims.len().saturating_sub(1)).rev() {
        strides[axis] = strides[axis + 1] * dims[axis + 1];
    }
    strides
}

fn flat_index(idx: &[usize], strides: &[usize]) -> usize {
    idx.iter().zip(strides.iter()).map(|(i, s)| i * s).sum()
}

fn for_each_index<F: FnMut(&[usize], usize)>(dims: &[usize], mut f: F) {
    let total: usize = dims.iter().product();
    let strides = strides(dims);
    let mut idx = vec![0usize; dims.len()];
    for flat in 0..total {
        let mut rem = flat;
        for (axis, &s) in strides.iter().enumerate() {
            idx[axis] = rem / s;
            rem %= s;
        }
        f(&idx, flat);
    }
}

impl MagnitudeGrid {
    pub fn new(dims: Vec<usize>, mut values: Vec<f64>, tol: Tolerance) -> Result<Self, IngestError> {
        if dims.is_empty() || dims.iter().any(|&m| m == 0) {
            return Err(IngestError::InvalidGrid("empty dimension"));
        }
        let total: usize = dims.iter().product();
        if values.len() != total {
            return Err(IngestError::ShapeError);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(IngestError::InvalidGrid("non-finite value"));
        }
        let max = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let slack = tol.eps * max.max(1.0);
        for v in &mut values {
            if *v < -slack {
                return Err(IngestError::InvalidGrid("negative magnitude"));
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        // Symmetry under index negation mod M, per axis; equivalent to the
        // inverse DFT being real.
        let grid = MagnitudeGrid { dims, values };
        let strides = strides(&grid.dims);
        let mut symmetric = true;
        for_each_index(&grid.dims, |idx, flat| {
            let mirrored: Vec<usize> = idx
                .iter()
                .zip(grid.dims.iter())
                .map(|(&i, &m)| (m - i) % m)
                .collect();
            let partner = flat_index(&mirrored, &strides);
            if (grid.values[flat] - grid.values[partner]).abs() > slack {
                symmetric = false;
            }
        });
        if !symmetric {
            return Err(IngestError::InvalidGrid("not symmetric under negation"));
        }
        Ok(grid)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Unnormalized DFT along one axis (`sign = -1` forward, `+1` inverse
/// without the 1/M factor).
fn dft_axis(data: &mut [Complex64], dims: &[usize], axis: usize, sign: f64) {
    let m = dims[axis];
    let strides = strides(dims);
    let stride = strides[axis];
    let total: usize = dims.iter().product();
    let outer = total / m;
    // Twiddle table for the axis length.
    let twiddle: Vec<Complex64> = (0..m)
        .map(|k| Complex64::from_polar(1.0, sign * std::f64::consts::TAU * k as f64 / m as f64))
        .collect();
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    for block in 0..outer {
        // Walk the flat indices of this line.
        let base = {
            let mut rem = block;
            let mut base = 0usize;
            for (a, &s) in strides.iter().enumerate() {
                if a == axis {
                    continue;
                }
                let extent = dims[a];
                let coord = rem % extent;
                rem /= extent;
                base += coord * s;
            }
            base
        };
        for (k, slot) in line.iter_mut().enumerate() {
            *slot = data[base + k * stride];
        }
        for k in 0..m {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, value) in line.iter().enumerate() {
                acc += value * twiddle[(k * j) % m];
            }
            data[base + k * stride] = acc;
        }
    }
}

fn inverse_dft_real(grid: &MagnitudeGrid, tol: Tolerance) -> Result<Vec<f64>, IngestError> {
    let mut data: Vec<Complex64> = grid
        .values
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    for axis in 0..grid.dims.len() {
        dft_axis(&mut data, &grid.dims, axis, 1.0);
    }
    let total = data.len() as f64;
    let scale = 1.0 / total;
    let max = grid.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let imag_slack = (tol.eps * max.max(1.0)) * total.sqrt();
    let mut out = Vec::with_capacity(data.len());
    for c in data {
        if c.im.abs() > imag_slack {
            return Err(IngestError::NotAnAcf("inverse DFT is not real"));
        }
        out.push(c.re * scale);
    }
    Ok(out)
}

/// Delta ACF extracted from a magnitude grid, with a wrap-around flag.
#[derive(Debug, Clone)]
pub struct ExtractedAcf {
    pub acf: DeltaAcf<f64>,
    /// Energy was found on a Nyquist bin, whose lag sign is ambiguous: the
    /// half-grid extent assumption is probably violated.
    pub aliasing_warning: bool,
}

/// Thresholds the inverse DFT of a magnitude grid into a delta ACF.
///
/// Grid entries with `|a| > tau * max|a|` become deltas at centered integer
/// lags. Pairs are symmetrized by averaging `a(y)` and `a(-y)`; an asymmetry
/// beyond the tolerance rejects the input. Nyquist bins (even grid lengths)
/// cannot be oriented and are skipped with `aliasing_warning` set.
pub fn acf_from_magnitude(
    grid: &MagnitudeGrid,
    tau: f64,
    tol: Tolerance,
) -> Result<ExtractedAcf, IngestError> {
    let acf_grid = inverse_dft_real(grid, tol)?;
    let dims = grid.dims();
    let grid_strides = strides(dims);
    let max = acf_grid.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if max <= 0.0 {
        return Err(IngestError::NotAnAcf("all-zero grid"));
    }
    let threshold = tau * max;
    let mut aliasing_warning = false;
    let mut deltas: Vec<AcfDelta<f64>> = Vec::new();
    let mut zero_included = false;
    for_each_index(dims, |idx, flat| {
        if acf_grid[flat].abs() <= threshold {
            return;
        }
        // Centered lag; k = M/2 on an even axis is its own mirror and
        // cannot be oriented.
        let mut nyquist = false;
        let lag: Vec<i64> = idx
            .iter()
            .zip(dims.iter())
            .map(|(&k, &m)| {
                if m % 2 == 0 && k == m / 2 {
                    nyquist = true;
                }
                if 2 * k <= m {
                    k as i64
                } else {
                    k as i64 - m as i64
                }
            })
            .collect();
        if nyquist {
            aliasing_warning = true;
            return;
        }
        if lag.iter().all(|&v| v == 0) {
            deltas.push(AcfDelta { lag: vec![0.0; dims.len()], coef: acf_grid[flat] });
            zero_included = true;
            return;
        }
        // Handle each centro-symmetric pair once, from its lex-positive side.
        let positive = lag.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0);
        if !positive {
            return;
        }
        let mirrored: Vec<usize> = idx
            .iter()
            .zip(dims.iter())
            .map(|(&i, &m)| (m - i) % m)
            .collect();
        let partner = acf_grid[flat_index(&mirrored, &grid_strides)];
        let value = acf_grid[flat];
        let coef = 0.5 * (value + partner);
        let lag_f: Vec<f64> = lag.iter().map(|&v| v as f64).collect();
        let mirror_f: Vec<f64> = lag.iter().map(|&v| -v as f64).collect();
        deltas.push(AcfDelta { lag: mirror_f, coef });
        deltas.push(AcfDelta { lag: lag_f, coef });
    });
    if !zero_included {
        return Err(IngestError::NotAnAcf("zero lag below threshold"));
    }
    // Asymmetry check on the raw grid before averaging hid it.
    for d in &deltas {
        let idx: Vec<usize> = d
            .lag
            .iter()
            .zip(dims.iter())
            .map(|(&v, &m)| ((v as i64).rem_euclid(m as i64)) as usize)
            .collect();
        let raw = acf_grid[flat_index(&idx, &grid_strides)];
        if (raw - d.coef).abs() > tol.eps * max.max(1.0) {
            return Err(IngestError::NotAnAcf("asymmetric around the origin"));
        }
    }
    let acf = DeltaAcf::new(dims.len(), deltas, false, tol)?;
    Ok(ExtractedAcf { acf, aliasing_warning })
}

/// Averages a stack of measured squared-magnitude grids and divides out the
/// known atmosphere power spectrum, floored at `floor * max(psd)` to avoid
/// division blow-ups.
pub fn speckle_average(
    stack: &[MagnitudeGrid],
    atmosphere_psd: &MagnitudeGrid,
    floor: f64,
) -> Result<MagnitudeGrid, IngestError> {
    if stack.is_empty() {
        return Err(IngestError::EmptyInput);
    }
    if stack.iter().any(|g| g.dims() != atmosphere_psd.dims()) {
        return Err(IngestError::ShapeError);
    }
    let psd_max = atmosphere_psd
        .values()
        .iter()
        .fold(0.0f64, |acc, v| acc.max(*v));
    if psd_max <= 0.0 {
        return Err(IngestError::InvalidGrid("atmosphere PSD is identically zero"));
    }
    let denom_floor = floor * psd_max;
    let total = atmosphere_psd.values().len();
    let mut out = vec![0.0f64; total];
    for grid in stack {
        for (acc, v) in out.iter_mut().zip(grid.values().iter()) {
            *acc += v;
        }
    }
    let count = stack.len() as f64;
    for (slot, psd) in out.iter_mut().zip(atmosphere_psd.values().iter()) {
        *slot = (*slot / count) / psd.max(denom_floor);
    }
    MagnitudeGrid::new(atmosphere_psd.dims().to_vec(), out, Tolerance::new(1e-6))
}

/// Averaged periodogram of channel output sample vectors: `|DFT y|^2 / M`
/// per vector, averaged across vectors. For a whitened channel input this
/// estimates the squared channel magnitude response.
pub fn channel_periodogram(samples: &[Vec<f64>]) -> Result<MagnitudeGrid, IngestError> {
    if samples.is_empty() || samples.iter().any(|v| v.is_empty()) {
        return Err(IngestError::EmptyInput);
    }
    let len = samples[0].len();
    if samples.iter().any(|v| v.len() != len) {
        return Err(IngestError::ShapeError);
    }
    let mut mean = vec![0.0f64; len];
    let dims = vec![len];
    for vector in samples {
        let mut data: Vec<Complex64> = vector.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        dft_axis(&mut data, &dims, 0, -1.0);
        for (acc, c) in mean.iter_mut().zip(data.iter()) {
            *acc += c.norm_sqr() / len as f64;
        }
    }
    let count = samples.len() as f64;
    for v in &mut mean {
        *v /= count;
    }
    MagnitudeGrid::new(dims, mean, Tolerance::new(1e-6))
}

/// Synthesizes the squared-magnitude grid of a spike signal by direct
/// evaluation of its Fourier transform on the DFT grid. Used to produce
/// measurement fixtures; independent of the inverse-DFT extraction path.
pub fn magnitude_grid_of_signal(
    signal: &SpikeSignal<f64>,
    dims: &[usize],
) -> Result<MagnitudeGrid, IngestError> {
    if signal.dim() != dims.len() {
        return Err(IngestError::ShapeError);
    }
    let total: usize = dims.iter().product();
    let mut values = Vec::with_capacity(total);
    for_each_index(dims, |idx, _| {
        let mut acc = Complex64::new(0.0, 0.0);
        for spike in signal.spikes() {
            let mut phase = 0.0f64;
            for ((&u, &m), x) in idx.iter().zip(dims.iter()).zip(spike.pos.iter()) {
                phase -= std::f64::consts::TAU * (u as f64) * x / m as f64;
            }
            acc += Complex64::from_polar(spike.coef, phase);
        }
        values.push(acc.norm_sqr());
    });
    MagnitudeGrid::new(dims.to_vec(), values, Tolerance::new(1e-9))
}
