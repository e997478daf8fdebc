//! Configuration and result types shared by the simulation pipeline.
//!
//! Units: every propagation constant and coupling is a multiple of the mean
//! coupling `C0`, and every distance is the product `C0 z`. Waveguide indices
//! are 0-based here; the file formats in the companion crate use 1-based
//! indices.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on `||eta|| = 1`.
const PUMP_NORM_TOL: f64 = 1e-9;

/// The physical array: propagation constants, couplings and pump.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayConfig {
    pub n_guides: usize,
    /// Signal-photon propagation constants `beta_j(omega_s)`, length N.
    pub beta_s: Vec<f64>,
    /// Nearest-neighbour couplings `C_j` between guides j and j+1, length N-1.
    pub couplings: Vec<f64>,
    pub pump: PumpSpec,
}

/// Classical undepleted pump. `alpha_j = ||alpha|| eta_j`, and the product
/// `g ||alpha||` is carried by `strength`.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpSpec {
    /// Unit-norm pump profile `eta_j`, length N.
    pub amplitudes: Vec<Complex64>,
    /// Explicit `beta~_j` per guide. `None` means quasi-phase matching,
    /// `beta~_j = 2 beta_j(omega_s)`, re-derived from whatever `beta_s` the
    /// array currently has.
    pub beta_tilde: Option<Vec<f64>>,
    pub strength: f64,
}

impl PumpSpec {
    /// Unit pump into a single guide with zero phase and unit strength.
    pub fn single(n_guides: usize, guide: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n_guides];
        if guide < n_guides {
            amplitudes[guide] = Complex64::new(1.0, 0.0);
        }
        Self {
            amplitudes,
            beta_tilde: None,
            strength: 1.0,
        }
    }

    /// Multiplies every amplitude by `exp(i phase)`.
    pub fn with_phase(mut self, phase: f64) -> Self {
        let rot = Complex64::from_polar(1.0, phase);
        for a in &mut self.amplitudes {
            *a *= rot;
        }
        self
    }

    pub fn with_strength(mut self, strength: f64) -> Self {
        self.strength = strength;
        self
    }

    /// Indices of guides with a nonzero pump amplitude.
    pub fn pumped_guides(&self) -> impl Iterator<Item = usize> + '_ {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.re != 0.0 || a.im != 0.0)
            .map(|(j, _)| j)
    }

    pub fn is_pumped(&self, guide: usize) -> bool {
        self.amplitudes
            .get(guide)
            .is_some_and(|a| a.re != 0.0 || a.im != 0.0)
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.amplitudes.len() != n {
            return Err(Error::DimensionMismatch {
                what: "pump amplitudes",
                expected: n,
                found: self.amplitudes.len(),
            });
        }
        if self
            .amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::NonFinite("pump amplitudes"));
        }
        let norm_sqr: f64 = self.amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm_sqr == 0.0 {
            return Err(Error::InvalidPump("no guide is pumped"));
        }
        if (libm::sqrt(norm_sqr) - 1.0).abs() > PUMP_NORM_TOL {
            return Err(Error::InvalidPump("pump profile must have unit norm"));
        }
        if !(self.strength.is_finite() && self.strength > 0.0) {
            return Err(Error::InvalidPump("strength must be positive and finite"));
        }
        if let Some(bt) = &self.beta_tilde {
            if bt.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "pump beta_tilde",
                    expected: n,
                    found: bt.len(),
                });
            }
            if bt.iter().any(|b| !b.is_finite()) {
                return Err(Error::NonFinite("pump beta_tilde"));
            }
        }
        Ok(())
    }
}

/// Index of the central guide (0-based). For even N this is the left one of
/// the two central guides.
pub fn center_guide(n_guides: usize) -> usize {
    n_guides.saturating_sub(1) / 2
}

impl ArrayConfig {
    /// Identical guides (`beta_j = beta_0`) with uniform coupling `c_0`.
    pub fn homogeneous(n_guides: usize, beta_0: f64, c_0: f64, pump: PumpSpec) -> Self {
        Self {
            n_guides,
            beta_s: vec![beta_0; n_guides],
            couplings: vec![c_0; n_guides.saturating_sub(1)],
            pump,
        }
    }

    /// Homogeneous unit-coupling array with `beta_0 = 0`, pumped at `guide`.
    pub fn ordered(n_guides: usize, guide: usize) -> Self {
        Self::homogeneous(n_guides, 0.0, 1.0, PumpSpec::single(n_guides, guide))
    }

    /// Returns the config unchanged if every invariant holds.
    pub fn validate(self) -> Result<Self> {
        self.check()?;
        Ok(self)
    }

    pub fn check(&self) -> Result<()> {
        let n = self.n_guides;
        if n == 0 {
            return Err(Error::EmptyArray);
        }
        if self.beta_s.len() != n {
            return Err(Error::DimensionMismatch {
                what: "beta_s",
                expected: n,
                found: self.beta_s.len(),
            });
        }
        if self.couplings.len() != n - 1 {
            return Err(Error::DimensionMismatch {
                what: "couplings",
                expected: n - 1,
                found: self.couplings.len(),
            });
        }
        if self.beta_s.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("beta_s"));
        }
        for (index, &value) in self.couplings.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite("couplings"));
            }
            if value <= 0.0 {
                return Err(Error::NonPositiveCoupling { index, value });
            }
        }
        self.pump.check(n)
    }

    /// Effective `beta~_j` entering the phase-matching factor.
    pub fn beta_tilde(&self) -> Vec<f64> {
        match &self.pump.beta_tilde {
            Some(bt) => bt.clone(),
            None => self.beta_s.iter().map(|b| 2.0 * b).collect(),
        }
    }
}

/// How ensemble realizations are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Averaging {
    /// Mean of the per-realization `sigma(z)`.
    #[default]
    Sigma,
    /// `sigma` of the realization-averaged photon distribution.
    Distribution,
}

/// Uniform disorder on propagation constants (diagonal) and couplings
/// (off-diagonal):
/// `beta_j ~ U[beta_0 - kappa_beta * delta_beta, beta_0 + kappa_beta * delta_beta]`,
/// `C_j ~ U[1 - kappa_c * delta_c, 1 + kappa_c * delta_c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderSpec {
    pub kappa_c: f64,
    pub kappa_beta: f64,
    pub delta_c: f64,
    pub delta_beta: f64,
    pub beta_0: f64,
    pub realizations: usize,
    pub master_seed: u64,
    pub averaging: Averaging,
}

impl Default for DisorderSpec {
    fn default() -> Self {
        Self {
            kappa_c: 0.0,
            kappa_beta: 0.0,
            delta_c: 0.9,
            delta_beta: 3.0,
            beta_0: 0.0,
            realizations: 200,
            master_seed: 0,
            averaging: Averaging::Sigma,
        }
    }
}

impl DisorderSpec {
    pub fn new(kappa_c: f64, kappa_beta: f64) -> Self {
        Self {
            kappa_c,
            kappa_beta,
            ..Self::default()
        }
    }

    pub fn is_ordered(&self) -> bool {
        self.kappa_c == 0.0 && self.kappa_beta == 0.0
    }

    pub fn check(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.kappa_c) {
            return Err(Error::InvalidDisorder("kappa_c must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.kappa_beta) {
            return Err(Error::InvalidDisorder("kappa_beta must lie in [0, 1]"));
        }
        if !(self.delta_c.is_finite() && self.delta_c > 0.0) {
            return Err(Error::InvalidDisorder("delta_c must be positive"));
        }
        if self.kappa_c * self.delta_c >= 1.0 {
            return Err(Error::InvalidDisorder(
                "kappa_c * delta_c must be below 1 so couplings stay positive",
            ));
        }
        if !(self.delta_beta.is_finite() && self.delta_beta > 0.0) {
            return Err(Error::InvalidDisorder("delta_beta must be positive"));
        }
        if !self.beta_0.is_finite() {
            return Err(Error::NonFinite("beta_0"));
        }
        if self.realizations == 0 {
            return Err(Error::InvalidDisorder("realizations must be positive"));
        }
        Ok(())
    }
}

/// `sigma(z)` and `gamma(z)` on a grid, plus the corner populations used for
/// border detection.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportSeries {
    pub z_grid: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Central differences in `(ln z, ln sigma)`, one-sided at both ends.
    pub gamma: Vec<f64>,
    /// `(grid index, n_k)` snapshots for the requested indices.
    pub distributions: Vec<(usize, Vec<f64>)>,
    /// `(n_1, n_N)` at every grid point.
    pub corner_populations: Vec<[f64; 2]>,
    /// Which corners count towards border detection. A pumped corner is
    /// populated from the start and is never watched.
    pub watched_corners: [bool; 2],
    pub border_threshold: f64,
    pub border_flags: Vec<bool>,
}

impl TransportSeries {
    /// Largest watched corner population at grid index `i`.
    pub fn border_population(&self, i: usize) -> f64 {
        let [first, last] = self.corner_populations[i];
        let mut p = 0.0f64;
        if self.watched_corners[0] {
            p = p.max(first);
        }
        if self.watched_corners[1] {
            p = p.max(last);
        }
        p
    }

    /// Number of leading grid points before the first border flag.
    pub fn border_free_len(&self) -> usize {
        self.border_flags
            .iter()
            .position(|&f| f)
            .unwrap_or(self.z_grid.len())
    }
}
