//! Closed-form biphoton amplitude and the transport statistics built on it.
//!
//! In the supermode basis the first-order amplitude is
//!
//! ```text
//! Q~_nm(z) = i z g||alpha|| sum_j eta_j S_nj S_mj
//!            exp(i [l_n + l_m + b~_j] z / 2) sinc([l_n + l_m - b~_j] z / 2)
//! ```
//!
//! and the individual-guide amplitude is `Q = S^T Q~ S`.
//!
//! # Photon-number distribution
//!
//! For the two-photon component `|psi2> = sum_jl Q_jl A_j^+ A_l^+ |0>` with
//! symmetric `Q`, commuting `A_k` through the creation operators gives
//! `A_k |psi2> = 2 sum_l Q_kl A_l^+ |0>`, hence
//! `<N_k> = <psi2| A_k^+ A_k |psi2> = 4 sum_l |Q_kl|^2`.
//! The vacuum term contributes nothing, so the normalized photon number is
//! `n_k = sum_j |Q_jk|^2 / sum_jl |Q_jl|^2`, independent of the pump
//! strength and of any global phase.
//!
//! Since `S` is orthogonal, column k of `Q` has the same norm as `Q~ s_k`
//! where `s_k` is column k of `S`. [`Propagator::distribution`] uses this to
//! get `n_k` from a single complex-by-real product; [`to_individual`] and
//! [`photon_distribution`] evaluate the full `S^T Q~ S` and serve as the
//! reference path.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::{Executor, Sequential};
use crate::linalg::ComplexMatrix;
use crate::model::{ArrayConfig, PumpSpec, TransportSeries};
use crate::spectral::{self, SupermodeDecomposition};

/// Corner population above which border effects are considered relevant.
pub const DEFAULT_BORDER_THRESHOLD: f64 = 1e-7;

/// `|gamma - 1|` at or below this counts as exactly ballistic when looking
/// for sign changes.
const BALLISTIC_BAND: f64 = 1e-9;

const SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Supermode,
    Individual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiphotonAmplitude {
    pub basis: Basis,
    pub matrix: ComplexMatrix,
    pub z: f64,
}

/// `sin(x) / x`, with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        libm::sin(x) / x
    }
}

/// Supermode-basis amplitude `Q~(z)`.
///
/// `beta_tilde` is the effective pump propagation constant per guide; only
/// the entries of pumped guides are read.
pub fn qtilde(
    dec: &SupermodeDecomposition,
    pump: &PumpSpec,
    beta_tilde: &[f64],
    z: f64,
) -> Result<BiphotonAmplitude> {
    let n = dec.dim();
    if pump.amplitudes.len() != n {
        return Err(Error::DimensionMismatch {
            what: "pump amplitudes",
            expected: n,
            found: pump.amplitudes.len(),
        });
    }
    if beta_tilde.len() != n {
        return Err(Error::DimensionMismatch {
            what: "beta_tilde",
            expected: n,
            found: beta_tilde.len(),
        });
    }
    let sources: Vec<PumpSource> = pump
        .pumped_guides()
        .map(|j| PumpSource {
            guide: j,
            eta: pump.amplitudes[j],
            beta_tilde: beta_tilde[j],
        })
        .collect();
    Ok(BiphotonAmplitude {
        basis: Basis::Supermode,
        matrix: assemble_qtilde(dec, &sources, pump.strength, z),
        z,
    })
}

#[derive(Debug, Clone, Copy)]
struct PumpSource {
    guide: usize,
    eta: Complex64,
    beta_tilde: f64,
}

fn assemble_qtilde(
    dec: &SupermodeDecomposition,
    sources: &[PumpSource],
    strength: f64,
    z: f64,
) -> ComplexMatrix {
    let n = dec.dim();
    let lambda = &dec.eigenvalues;
    let s = &dec.transform;
    let delta = Complex64::new(0.0, z * strength);
    let mut q = ComplexMatrix::zeros(n);
    if z == 0.0 {
        return q;
    }
    for a in 0..n {
        for b in a..n {
            let pair = lambda[a] + lambda[b];
            let mut acc = Complex64::new(0.0, 0.0);
            for src in sources {
                let weight = s[(a, src.guide)] * s[(b, src.guide)];
                if weight == 0.0 {
                    continue;
                }
                let phase = Complex64::from_polar(1.0, 0.5 * (pair + src.beta_tilde) * z);
                acc += src.eta * phase * (weight * sinc(0.5 * (pair - src.beta_tilde) * z));
            }
            let v = delta * acc;
            q.set(a, b, v);
            q.set(b, a, v);
        }
    }
    q
}

/// `Q = S^T Q~ S`.
pub fn to_individual(
    amp: &BiphotonAmplitude,
    dec: &SupermodeDecomposition,
) -> Result<BiphotonAmplitude> {
    if amp.basis != Basis::Supermode {
        return Err(Error::BasisMismatch);
    }
    if amp.matrix.dim() != dec.dim() {
        return Err(Error::DimensionMismatch {
            what: "amplitude",
            expected: dec.dim(),
            found: amp.matrix.dim(),
        });
    }
    let s = &dec.transform;
    let right = amp.matrix.mul_real(s);
    Ok(BiphotonAmplitude {
        basis: Basis::Individual,
        matrix: ComplexMatrix::real_transpose_mul(s, &right),
        z: amp.z,
    })
}

/// Normalized photon number per guide from an individual-basis amplitude.
pub fn photon_distribution(amp: &BiphotonAmplitude) -> Result<Vec<f64>> {
    if amp.basis != Basis::Individual {
        return Err(Error::BasisMismatch);
    }
    normalize(amp.matrix.column_norms_sqr())
}

fn normalize(mut weights: Vec<f64>) -> Result<Vec<f64>> {
    let total: f64 = weights.iter().sum();
    if total == 0.0 {
        return Err(Error::ZeroAmplitude);
    }
    if !total.is_finite() {
        return Err(Error::NonFinite("photon distribution"));
    }
    for w in &mut weights {
        *w /= total;
    }
    Ok(weights)
}

/// Standard deviation of the guide index (1-based) under distribution `n`.
pub fn sigma(n: &[f64]) -> Result<f64> {
    if n.is_empty() {
        return Err(Error::InvalidDistribution("empty"));
    }
    if n.iter().any(|&p| !p.is_finite() || p < 0.0) {
        return Err(Error::InvalidDistribution(
            "entries must be finite and nonnegative",
        ));
    }
    let total: f64 = n.iter().sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::InvalidDistribution("entries must sum to one"));
    }
    // Two-pass form of sum k^2 n_k - (sum k n_k)^2; avoids the cancellation
    // that the raw moments suffer for narrow distributions on large arrays.
    let mean: f64 = n.iter().enumerate().map(|(k, p)| (k + 1) as f64 * p).sum();
    let var: f64 = n
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let d = (k + 1) as f64 - mean;
            d * d * p
        })
        .sum();
    Ok(libm::sqrt(var.max(0.0)))
}

/// Checks that a z grid is nonempty, finite, positive and strictly increasing.
pub fn check_grid(z_grid: &[f64]) -> Result<()> {
    if z_grid.is_empty() {
        return Err(Error::InvalidGrid("grid is empty"));
    }
    if z_grid.iter().any(|z| !z.is_finite() || *z <= 0.0) {
        return Err(Error::InvalidGrid(
            "grid points must be positive and finite",
        ));
    }
    if z_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("grid must be strictly increasing"));
    }
    Ok(())
}

/// `gamma = d ln(sigma) / d ln(z)` by central differences, one-sided at the
/// ends.
pub fn gamma_series(z_grid: &[f64], sigma: &[f64]) -> Result<Vec<f64>> {
    check_grid(z_grid)?;
    if sigma.len() != z_grid.len() {
        return Err(Error::DimensionMismatch {
            what: "sigma series",
            expected: z_grid.len(),
            found: sigma.len(),
        });
    }
    if z_grid.len() < 2 {
        return Err(Error::InvalidGrid("gamma needs at least two grid points"));
    }
    if let Some((index, &value)) = sigma
        .iter()
        .enumerate()
        .find(|(_, s)| !(s.is_finite() && **s > 0.0))
    {
        return Err(Error::NonPositiveSigma { index, value });
    }
    let lz: Vec<f64> = z_grid.iter().map(|z| libm::log(*z)).collect();
    let ls: Vec<f64> = sigma.iter().map(|s| libm::log(*s)).collect();
    Ok(difference(&lz, &ls))
}

/// `(y[i+1] - y[i-1]) / (x[i+1] - x[i-1])`, one-sided at the ends.
fn difference(x: &[f64], y: &[f64]) -> Vec<f64> {
    let len = x.len();
    (0..len)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(len - 1);
            (y[hi] - y[lo]) / (x[hi] - x[lo])
        })
        .collect()
}

/// `df/dz` on a nonuniform grid: second-order three-point stencil inside,
/// one-sided at the ends.
pub fn derivative(z_grid: &[f64], f: &[f64]) -> Vec<f64> {
    let len = z_grid.len();
    if len < 3 {
        return difference(z_grid, f);
    }
    let mut out = Vec::with_capacity(len);
    out.push((f[1] - f[0]) / (z_grid[1] - z_grid[0]));
    for i in 1..len - 1 {
        let hm = z_grid[i] - z_grid[i - 1];
        let hp = z_grid[i + 1] - z_grid[i];
        out.push(
            (hm * hm * f[i + 1] - hp * hp * f[i - 1] + (hp * hp - hm * hm) * f[i])
                / (hm * hp * (hm + hp)),
        );
    }
    out.push((f[len - 1] - f[len - 2]) / (z_grid[len - 1] - z_grid[len - 2]));
    out
}

/// `points_per_decade` log-uniform samples per decade from `z_min` to
/// `z_max`, both included.
pub fn geometric_grid(z_min: f64, z_max: f64, points_per_decade: usize) -> Result<Vec<f64>> {
    if !(z_min.is_finite() && z_max.is_finite() && z_min > 0.0 && z_max > z_min) {
        return Err(Error::InvalidGrid("need 0 < z_min < z_max"));
    }
    if points_per_decade == 0 {
        return Err(Error::InvalidGrid("points_per_decade must be positive"));
    }
    let decades = libm::log10(z_max / z_min);
    let intervals = libm::ceil(decades * points_per_decade as f64).max(1.0) as usize;
    let ratio = libm::log(z_max / z_min) / intervals as f64;
    let mut grid: Vec<f64> = (0..=intervals)
        .map(|i| z_min * libm::exp(ratio * i as f64))
        .collect();
    grid[0] = z_min;
    grid[intervals] = z_max;
    Ok(grid)
}

/// `2 * half_width + 1` points spaced log-uniformly around `center`.
pub fn local_log_grid(
    center: f64,
    half_width: usize,
    points_per_decade: usize,
) -> Result<Vec<f64>> {
    if !(center.is_finite() && center > 0.0) || points_per_decade == 0 {
        return Err(Error::InvalidGrid("local grid needs a positive center"));
    }
    let step = core::f64::consts::LN_10 / points_per_decade as f64;
    Ok((0..=2 * half_width)
        .map(|i| {
            if i == half_width {
                center
            } else {
                center * libm::exp(step * (i as f64 - half_width as f64))
            }
        })
        .collect())
}

/// Precomputed supermode data for repeated evaluation of one array.
#[derive(Debug, Clone)]
pub struct Propagator {
    dec: SupermodeDecomposition,
    sources: Vec<PumpSource>,
    strength: f64,
    watched_corners: [bool; 2],
}

impl Propagator {
    pub fn new(config: &ArrayConfig) -> Result<Self> {
        config.check()?;
        let dec = spectral::decompose(config)?;
        let beta_tilde = config.beta_tilde();
        let sources = config
            .pump
            .pumped_guides()
            .map(|j| PumpSource {
                guide: j,
                eta: config.pump.amplitudes[j],
                beta_tilde: beta_tilde[j],
            })
            .collect();
        let last = config.n_guides - 1;
        let watched_corners = [!config.pump.is_pumped(0), !config.pump.is_pumped(last)];
        Ok(Self {
            dec,
            sources,
            strength: config.pump.strength,
            watched_corners,
        })
    }

    pub fn decomposition(&self) -> &SupermodeDecomposition {
        &self.dec
    }

    pub fn dim(&self) -> usize {
        self.dec.dim()
    }

    pub fn qtilde(&self, z: f64) -> BiphotonAmplitude {
        BiphotonAmplitude {
            basis: Basis::Supermode,
            matrix: assemble_qtilde(&self.dec, &self.sources, self.strength, z),
            z,
        }
    }

    /// Individual-basis amplitude `Q(z)`.
    pub fn amplitude(&self, z: f64) -> BiphotonAmplitude {
        to_individual(&self.qtilde(z), &self.dec).expect("supermode amplitude of matching size")
    }

    /// `n_k(z)` via the column norms of `Q~ S`.
    pub fn distribution(&self, z: f64) -> Result<Vec<f64>> {
        let qt = assemble_qtilde(&self.dec, &self.sources, self.strength, z);
        normalize(qt.mul_real(&self.dec.transform).column_norms_sqr())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagateOptions {
    /// Grid indices at which the full `n_k` is stored.
    pub snapshot_indices: Vec<usize>,
    pub border_threshold: f64,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        Self {
            snapshot_indices: Vec::new(),
            border_threshold: DEFAULT_BORDER_THRESHOLD,
        }
    }
}

struct PointResult {
    sigma: f64,
    corners: [f64; 2],
    snapshot: Option<Vec<f64>>,
}

/// Evaluates `sigma`, `gamma` and the corner populations on `z_grid`.
pub fn propagate_series<E: Executor>(
    config: &ArrayConfig,
    z_grid: &[f64],
    options: &PropagateOptions,
    exec: &E,
) -> Result<TransportSeries> {
    check_grid(z_grid)?;
    if z_grid.len() < 2 {
        return Err(Error::InvalidGrid(
            "a series needs at least two grid points",
        ));
    }
    if options.snapshot_indices.iter().any(|&i| i >= z_grid.len()) {
        return Err(Error::InvalidGrid("snapshot index out of range"));
    }
    let prop = Propagator::new(config)?;
    let last = prop.dim() - 1;
    let points = exec.map_indexed(z_grid.len(), |i| -> Result<PointResult> {
        let n = prop.distribution(z_grid[i])?;
        Ok(PointResult {
            sigma: sigma(&n)?,
            corners: [n[0], n[last]],
            snapshot: options.snapshot_indices.contains(&i).then(|| n.clone()),
        })
    });

    let mut sig = Vec::with_capacity(points.len());
    let mut corner_populations = Vec::with_capacity(points.len());
    let mut distributions = Vec::new();
    for (i, p) in points.into_iter().enumerate() {
        let p = p?;
        sig.push(p.sigma);
        corner_populations.push(p.corners);
        if let Some(n) = p.snapshot {
            distributions.push((i, n));
        }
    }
    let gamma = gamma_series(z_grid, &sig)?;
    let mut series = TransportSeries {
        z_grid: z_grid.to_vec(),
        sigma: sig,
        gamma,
        distributions,
        corner_populations,
        watched_corners: prop.watched_corners,
        border_threshold: options.border_threshold,
        border_flags: Vec::new(),
    };
    series.border_flags = (0..series.z_grid.len())
        .map(|i| series.border_population(i) > options.border_threshold)
        .collect();
    Ok(series)
}

/// Smallest grid z at which a watched corner population exceeds `threshold`.
pub fn border_onset(series: &TransportSeries, threshold: f64) -> Option<f64> {
    (0..series.z_grid.len())
        .find(|&i| series.border_population(i) > threshold)
        .map(|i| series.z_grid[i])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `gamma` drops below one: superballistic to sub-ballistic.
    Falling,
    /// `gamma` rises above one.
    Rising,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub z: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Maximum,
    Minimum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub z: f64,
    pub gamma: f64,
    pub kind: ExtremumKind,
}

/// All sign changes of `gamma - 1`, by linear interpolation.
pub fn unit_crossings(z_grid: &[f64], gamma: &[f64]) -> Vec<Crossing> {
    let sign = |g: f64| {
        let d = g - 1.0;
        if d > BALLISTIC_BAND {
            1
        } else if d < -BALLISTIC_BAND {
            -1
        } else {
            0
        }
    };
    let mut out = Vec::new();
    let mut prev: Option<usize> = None;
    for i in 0..gamma.len() {
        let s = sign(gamma[i]);
        if s == 0 {
            continue;
        }
        if let Some(p) = prev {
            if sign(gamma[p]) != s {
                let (za, zb, ga, gb) = (z_grid[p], z_grid[i], gamma[p] - 1.0, gamma[i] - 1.0);
                let z = za + (zb - za) * ga / (ga - gb);
                let direction = if s < 0 {
                    Direction::Falling
                } else {
                    Direction::Rising
                };
                out.push(Crossing { z, direction });
            }
        }
        prev = Some(i);
    }
    out
}

/// Interior local extrema of `gamma`, refined by a parabola through the three
/// bracketing points in `ln z`.
pub fn local_extrema(z_grid: &[f64], gamma: &[f64]) -> Vec<Extremum> {
    let mut out = Vec::new();
    for i in 1..gamma.len().saturating_sub(1) {
        let (a, b, c) = (gamma[i - 1], gamma[i], gamma[i + 1]);
        let kind = if b > a && b >= c {
            ExtremumKind::Maximum
        } else if b < a && b <= c {
            ExtremumKind::Minimum
        } else {
            continue;
        };
        let x = [
            libm::log(z_grid[i - 1]),
            libm::log(z_grid[i]),
            libm::log(z_grid[i + 1]),
        ];
        let (xv, yv) = parabola_vertex(x, [a, b, c]).unwrap_or((x[1], b));
        out.push(Extremum {
            z: libm::exp(xv),
            gamma: yv,
            kind,
        });
    }
    out
}

fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    // Newton form: y = y0 + d1 (x - x0) + d2 (x - x0)(x - x1)
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let d2 = (d12 - d01) / (x[2] - x[0]);
    if d2 == 0.0 || !d2.is_finite() {
        return None;
    }
    let xv = 0.5 * (x[0] + x[1]) - d01 / (2.0 * d2);
    if xv < x[0] || xv > x[2] {
        return None;
    }
    let yv = y[0] + d01 * (xv - x[0]) + d2 * (xv - x[0]) * (xv - x[1]);
    Some((xv, yv))
}

/// `gamma = 1` crossings before the first border flag.
pub fn detect_regime_transition(series: &TransportSeries) -> Vec<Crossing> {
    let len = series.border_free_len();
    unit_crossings(&series.z_grid[..len], &series.gamma[..len])
}

/// Crossings and extrema of `gamma` in the border-free part of a series.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionReport {
    pub crossings: Vec<Crossing>,
    pub extrema: Vec<Extremum>,
    pub border_onset: Option<f64>,
}

pub fn transition_report(series: &TransportSeries) -> TransitionReport {
    let len = series.border_free_len();
    TransitionReport {
        crossings: unit_crossings(&series.z_grid[..len], &series.gamma[..len]),
        extrema: local_extrema(&series.z_grid[..len], &series.gamma[..len]),
        border_onset: border_onset(series, series.border_threshold),
    }
}

/// `gamma(z)` for every single-guide pump position of an array.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpScan {
    pub z_grid: Vec<f64>,
    /// Row p is the series for a pump in guide p (0-based).
    pub gamma: Vec<Vec<f64>>,
    /// First z at which guide 1 exceeds the threshold; `None` for p = 0.
    pub left_onset: Vec<Option<f64>>,
    /// First z at which guide N exceeds the threshold; `None` for p = N-1.
    pub right_onset: Vec<Option<f64>>,
}

/// Repeats [`propagate_series`] with the pump moved through every guide.
/// Pump strength, phase convention and `beta~` override are taken from the
/// template; the profile becomes a unit pump in the scanned guide.
pub fn pump_position_scan<E: Executor>(
    template: &ArrayConfig,
    z_grid: &[f64],
    options: &PropagateOptions,
    exec: &E,
) -> Result<PumpScan> {
    template.check()?;
    let n = template.n_guides;
    let rows = exec.map_indexed(n, |p| {
        let mut cfg = template.clone();
        cfg.pump = PumpSpec {
            beta_tilde: template.pump.beta_tilde.clone(),
            ..PumpSpec::single(n, p).with_strength(template.pump.strength)
        };
        propagate_series(&cfg, z_grid, options, &Sequential)
    });
    let mut scan = PumpScan {
        z_grid: z_grid.to_vec(),
        gamma: Vec::with_capacity(n),
        left_onset: Vec::with_capacity(n),
        right_onset: Vec::with_capacity(n),
    };
    for (p, row) in rows.into_iter().enumerate() {
        let series = row?;
        let first = |corner: usize| {
            series
                .corner_populations
                .iter()
                .position(|c| c[corner] > options.border_threshold)
                .map(|i| series.z_grid[i])
        };
        scan.left_onset.push(if p == 0 { None } else { first(0) });
        scan.right_onset
            .push(if p == n - 1 { None } else { first(1) });
        scan.gamma.push(series.gamma);
    }
    Ok(scan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::center_guide;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sinc_branches_agree() {
        assert_eq!(sinc(0.0), 1.0);
        for x in [9.9e-5, 1.0001e-4, -5e-5] {
            assert_abs_diff_eq!(sinc(x), libm::sin(x) / x, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(sinc(core::f64::consts::PI), 0.0, epsilon = 1e-16);
    }

    #[test]
    fn zero_distance_gives_zero_amplitude() {
        let cfg = ArrayConfig::ordered(5, 2);
        let prop = Propagator::new(&cfg).unwrap();
        assert!(prop.qtilde(0.0).matrix.is_zero());
        assert_eq!(prop.distribution(0.0), Err(Error::ZeroAmplitude));
    }

    #[test]
    fn single_guide_grows_linearly() {
        let cfg = ArrayConfig::ordered(1, 0);
        let prop = Propagator::new(&cfg).unwrap();
        for z in [0.1, 1.0, 7.5] {
            let q = prop.qtilde(z).matrix.get(0, 0);
            assert_abs_diff_eq!(q.re, 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(q.im, z, epsilon = 1e-15);
        }
    }

    #[test]
    fn identity_transform_is_noop() {
        let dec = spectral::tridiagonal_eigen(&[0.4], &[]).unwrap();
        let amp = BiphotonAmplitude {
            basis: Basis::Supermode,
            matrix: ComplexMatrix::from_fn(1, |_, _| Complex64::new(0.3, -2.0)),
            z: 1.0,
        };
        assert_eq!(to_individual(&amp, &dec).unwrap().matrix, amp.matrix);
        let individual = to_individual(&amp, &dec).unwrap();
        assert_eq!(to_individual(&individual, &dec), Err(Error::BasisMismatch));
    }

    #[test]
    fn distribution_examples() {
        let mut m = ComplexMatrix::zeros(3);
        m.set(0, 0, Complex64::new(0.0, 2.0));
        let amp = BiphotonAmplitude {
            basis: Basis::Individual,
            matrix: m,
            z: 1.0,
        };
        assert_eq!(photon_distribution(&amp).unwrap(), vec![1.0, 0.0, 0.0]);

        let mut m = ComplexMatrix::zeros(2);
        m.set(0, 1, Complex64::new(0.7, 0.1));
        m.set(1, 0, Complex64::new(0.7, 0.1));
        let amp = BiphotonAmplitude {
            basis: Basis::Individual,
            matrix: m,
            z: 1.0,
        };
        assert_eq!(photon_distribution(&amp).unwrap(), vec![0.5, 0.5]);

        let zero = BiphotonAmplitude {
            basis: Basis::Individual,
            matrix: ComplexMatrix::zeros(2),
            z: 1.0,
        };
        assert_eq!(photon_distribution(&zero), Err(Error::ZeroAmplitude));
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma(&[0.0, 1.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(sigma(&[0.5, 0.0, 0.5]).unwrap(), 1.0);
        for n in [1usize, 2, 7, 100] {
            let u = vec![1.0 / n as f64; n];
            let want = libm::sqrt((n * n - 1) as f64 / 12.0);
            assert_abs_diff_eq!(sigma(&u).unwrap(), want, epsilon = 1e-12);
        }
        assert!(sigma(&[0.5, 0.6]).is_err());
        assert!(sigma(&[1.5, -0.5]).is_err());
        assert!(sigma(&[]).is_err());
    }

    #[test]
    fn gamma_of_power_laws() {
        let z = geometric_grid(0.05, 30.0, 50).unwrap();
        let s: Vec<f64> = z.iter().map(|z| 3.0 * z).collect();
        for g in gamma_series(&z, &s).unwrap() {
            assert_abs_diff_eq!(g, 1.0, epsilon = 1e-12);
        }
        let s: Vec<f64> = z.iter().map(|z| 2.0 * libm::sqrt(*z)).collect();
        for g in gamma_series(&z, &s).unwrap() {
            assert_abs_diff_eq!(g, 0.5, epsilon = 1e-12);
        }
        // sigma = z exp(0.01 ln^2 z): gamma = 1 + 0.02 ln z exactly.
        // Central differences of a quadratic in ln z are exact inside; the
        // one-sided ends are off by 0.01 h.
        let s: Vec<f64> = z
            .iter()
            .map(|z| {
                let l = libm::log(*z);
                z * libm::exp(0.01 * l * l)
            })
            .collect();
        let g = gamma_series(&z, &s).unwrap();
        let h = libm::log(z[1] / z[0]);
        for (i, (zi, gi)) in z.iter().zip(&g).enumerate() {
            let exact = 1.0 + 0.02 * libm::log(*zi);
            let tol = if i == 0 || i == z.len() - 1 {
                0.011 * h
            } else {
                1e-12
            };
            assert!((gi - exact).abs() <= tol, "i={i} {gi} vs {exact}");
        }
    }

    #[test]
    fn gamma_rejects_nonpositive_sigma() {
        assert_eq!(
            gamma_series(&[1.0, 2.0], &[1.0, 0.0]),
            Err(Error::NonPositiveSigma {
                index: 1,
                value: 0.0
            })
        );
        assert!(gamma_series(&[1.0], &[1.0]).is_err());
        assert!(gamma_series(&[2.0, 1.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn no_crossings_for_exactly_ballistic() {
        let z = geometric_grid(0.1, 10.0, 40).unwrap();
        let s: Vec<f64> = z.iter().map(|z| 0.37 * z).collect();
        let g = gamma_series(&z, &s).unwrap();
        assert!(unit_crossings(&z, &g).is_empty());
    }

    #[test]
    fn crossing_interpolation_and_parabola() {
        let z = [1.0, 2.0, 3.0, 4.0];
        let g = [1.2, 1.1, 0.9, 1.05];
        let c = unit_crossings(&z, &g);
        assert_eq!(c.len(), 2);
        assert_abs_diff_eq!(c[0].z, 2.5, epsilon = 1e-12);
        assert_eq!(c[0].direction, Direction::Falling);
        assert_eq!(c[1].direction, Direction::Rising);

        // gamma = 2 - (ln z - ln 2)^2 sampled at ln z = ln 2 + {-0.1, 0.02, 0.14}
        let xs = [-0.1f64, 0.02, 0.14];
        let zz: Vec<f64> = xs.iter().map(|x| 2.0 * libm::exp(*x)).collect();
        let gg: Vec<f64> = xs.iter().map(|x| 2.0 - x * x).collect();
        let e = local_extrema(&zz, &gg);
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].kind, ExtremumKind::Maximum);
        assert_abs_diff_eq!(e[0].z, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e[0].gamma, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn derivative_is_exact_for_quadratics() {
        let z = geometric_grid(0.5, 20.0, 7).unwrap();
        let f: Vec<f64> = z.iter().map(|z| 3.0 * z * z - z + 2.0).collect();
        let d = derivative(&z, &f);
        for i in 1..z.len() - 1 {
            assert_abs_diff_eq!(d[i], 6.0 * z[i] - 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn grids() {
        let g = geometric_grid(0.05, 30.0, 400).unwrap();
        assert_eq!(g[0], 0.05);
        assert_eq!(*g.last().unwrap(), 30.0);
        assert_eq!(g.len(), 1113);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        let l = local_log_grid(200.0, 2, 400).unwrap();
        assert_eq!(l.len(), 5);
        assert_eq!(l[2], 200.0);
        assert!(geometric_grid(1.0, 1.0, 10).is_err());
        assert!(check_grid(&[]).is_err());
    }

    #[test]
    fn fast_distribution_matches_full_transform() {
        let mut cfg = ArrayConfig::ordered(6, 1);
        cfg.beta_s = vec![0.3, -0.2, 1.1, 0.0, -1.4, 0.6];
        cfg.couplings = vec![0.7, 1.3, 0.4, 1.8, 1.0];
        let prop = Propagator::new(&cfg).unwrap();
        for z in [0.2, 1.7, 9.0] {
            let slow = photon_distribution(&prop.amplitude(z)).unwrap();
            let fast = prop.distribution(z).unwrap();
            for (a, b) in slow.iter().zip(&fast) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn center_pump_spreads_symmetrically() {
        let cfg = ArrayConfig::ordered(3, 1);
        let n = Propagator::new(&cfg).unwrap().distribution(0.05).unwrap();
        assert!(n[1] > n[0]);
        assert_abs_diff_eq!(n[0], n[2], epsilon = 1e-14);
    }

    #[test]
    fn series_rejects_bad_grids() {
        let cfg = ArrayConfig::ordered(5, center_guide(5));
        let opts = PropagateOptions::default();
        assert!(propagate_series(&cfg, &[], &opts, &Sequential).is_err());
        assert!(propagate_series(&cfg, &[1.0], &opts, &Sequential).is_err());
        assert!(propagate_series(&cfg, &[0.0, 1.0], &opts, &Sequential).is_err());
        let bad = PropagateOptions {
            snapshot_indices: vec![5],
            ..PropagateOptions::default()
        };
        assert!(propagate_series(&cfg, &[1.0, 2.0], &bad, &Sequential).is_err());
    }

    #[test]
    fn border_never_reached_on_short_grid() {
        let cfg = ArrayConfig::ordered(71, center_guide(71));
        let z = geometric_grid(0.05, 5.0, 40).unwrap();
        let series = propagate_series(&cfg, &z, &PropagateOptions::default(), &Sequential).unwrap();
        assert_eq!(border_onset(&series, DEFAULT_BORDER_THRESHOLD), None);
        assert!(series.border_flags.iter().all(|f| !f));
    }
}
