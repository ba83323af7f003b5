//! Closed-form KdV and Gardner solitons, soliton ensembles, the Hirota
//! N-soliton, and the Weinstein quantity `d/dc int Q_{c,beta}^2`.
//!
//! Both families share one formula: `Q_{c,beta}(s) = 3c / (1 + rho cosh(sqrt(c) s))`
//! with `rho = sqrt(1 - 9 beta c / 2)`; `beta = 0` gives `rho = 1` and the KdV
//! soliton `c Q(sqrt(c) s)`, `Q(s) = 3 / (1 + cosh s)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{derivative_samples, Grid1D, WaveField};

/// Profiles must fall below this fraction of their peak at the box edges.
pub const TAIL_LIMIT: f64 = 1e-12;

/// Speed, center and Gardner parameter of one soliton (`beta = 0` is KdV).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    pub c: f64,
    pub x0: f64,
    pub beta: f64,
}

impl SolitonParams {
    pub fn new(c: f64, x0: f64, beta: f64) -> Result<Self> {
        let p = Self { c, x0, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn kdv(c: f64, x0: f64) -> Result<Self> {
        Self::new(c, x0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::Inadmissible(format!("speed c = {} must be > 0", self.c)));
        }
        if !self.x0.is_finite() {
            return Err(Error::Inadmissible(format!("center x0 = {}", self.x0)));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::Inadmissible(format!("beta = {} must be >= 0", self.beta)));
        }
        if self.beta > 0.0 && self.c >= max_gardner_speed(self.beta) {
            return Err(Error::Inadmissible(format!(
                "c = {} must be below 2/(9 beta) = {}",
                self.c,
                max_gardner_speed(self.beta)
            )));
        }
        Ok(())
    }

    pub fn rho(&self) -> f64 {
        rho(self.c, self.beta)
    }

    pub fn amplitude(&self) -> f64 {
        3.0 * self.c / (1.0 + self.rho())
    }

    pub fn value_at(&self, x: f64) -> f64 {
        profile(self.c, self.beta, x - self.x0)
    }
}

/// Upper end `2/(9 beta)` of the admissible Gardner speed range.
pub fn max_gardner_speed(beta: f64) -> f64 {
    2.0 / (9.0 * beta)
}

pub(crate) fn rho(c: f64, beta: f64) -> f64 {
    (1.0 - 4.5 * beta * c).sqrt()
}

/// `Q_{c,beta}(s)`; `beta = 0` gives the KdV soliton.
pub fn profile(c: f64, beta: f64, s: f64) -> f64 {
    let r = rho(c, beta);
    3.0 * c / (1.0 + r * (c.sqrt() * s).cosh())
}

/// Value and first derivatives of `Q_{c,beta}(s)` with respect to `s` and `c`.
#[derive(Debug, Clone, Copy)]
pub struct ProfileJet {
    pub value: f64,
    pub d_s: f64,
    pub d_c: f64,
}

pub fn profile_jet(c: f64, beta: f64, s: f64) -> ProfileJet {
    let r = rho(c, beta);
    let sc = c.sqrt();
    let theta = sc * s;
    let (ch, sh) = (theta.cosh(), theta.sinh());
    if !ch.is_finite() {
        return ProfileJet {
            value: 0.0,
            d_s: 0.0,
            d_c: 0.0,
        };
    }
    let den = 1.0 + r * ch;
    let value = 3.0 * c / den;
    let d_s = -3.0 * c * r * sc * sh / (den * den);
    let d_rho = if beta > 0.0 { -2.25 * beta / r } else { 0.0 };
    let d_den = d_rho * ch + r * sh * s / (2.0 * sc);
    let d_c = 3.0 / den - 3.0 * c * d_den / (den * den);
    ProfileJet { value, d_s, d_c }
}

fn check_tails(grid: &Grid1D, p: &SolitonParams, center: f64) -> Result<()> {
    let tail = profile(p.c, p.beta, grid.x_min() - center)
        .abs()
        .max(profile(p.c, p.beta, grid.x_max() - center).abs());
    let limit = TAIL_LIMIT * p.amplitude();
    if tail > limit {
        return Err(Error::TailTruncation { tail, limit });
    }
    Ok(())
}

fn sample_profile(p: &SolitonParams, center: f64, grid: &Grid1D) -> Vec<f64> {
    (0..grid.n_points())
        .map(|j| profile(p.c, p.beta, grid.x(j) - center))
        .collect()
}

/// Samples of `Q_c(x - x0) = (3c/2) sech^2(sqrt(c)(x - x0)/2)`.
pub fn kdv_soliton(p: &SolitonParams, grid: &Grid1D) -> Result<WaveField> {
    p.validate()?;
    if p.beta != 0.0 {
        return Err(Error::Inadmissible(format!(
            "kdv_soliton needs beta = 0, got {}",
            p.beta
        )));
    }
    check_tails(grid, p, p.x0)?;
    WaveField::new(*grid, sample_profile(p, p.x0, grid), 0.0)
}

/// Samples of `Q_{c,beta}(x - x0) = 3c / (1 + rho cosh(sqrt(c)(x - x0)))`.
pub fn gardner_soliton(p: &SolitonParams, grid: &Grid1D) -> Result<WaveField> {
    p.validate()?;
    if p.beta <= 0.0 {
        return Err(Error::Inadmissible(
            "gardner_soliton needs beta > 0".into(),
        ));
    }
    check_tails(grid, p, p.x0)?;
    WaveField::new(*grid, sample_profile(p, p.x0, grid), 0.0)
}

/// `delta(c, beta) = c^{-1/2} arccosh(1/rho)`, the translation by which the
/// Gardner transform displaces a Gardner soliton:
/// `M_beta[Q_{c,beta}] = Q_c(. - delta)`.
pub fn delta_shift(c: f64, beta: f64) -> Result<f64> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::Inadmissible(format!("beta = {beta} must be > 0")));
    }
    SolitonParams::new(c, 0.0, beta)?;
    let r = rho(c, beta);
    // arccosh(1/rho) = asinh(sqrt(1 - rho^2)/rho), which keeps full relative
    // precision as beta -> 0.
    let sinh_arg = (4.5 * beta * c).sqrt() / r;
    Ok(sinh_arg.asinh() / c.sqrt())
}

/// Whether Gardner members are placed at their nominal centers or displaced
/// by `-delta_j` so that the Gardner transform of the sum lands on the KdV
/// centers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftPolicy {
    Raw,
    Shifted,
}

/// Ordered solitons with strictly increasing speeds and centers separated by
/// at least `min_separation`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolitonEnsemble {
    members: Vec<SolitonParams>,
    min_separation: f64,
    shift: ShiftPolicy,
}

impl SolitonEnsemble {
    pub fn new(
        members: Vec<SolitonParams>,
        min_separation: f64,
        shift: ShiftPolicy,
    ) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Ensemble("no members".into()));
        }
        if !(min_separation.is_finite() && min_separation > 0.0) {
            return Err(Error::Ensemble(format!(
                "min_separation = {min_separation} must be > 0"
            )));
        }
        for m in &members {
            m.validate()?;
        }
        for (j, pair) in members.windows(2).enumerate() {
            let (a, b) = (pair[0], pair[1]);
            if b.c <= a.c {
                return Err(Error::Ensemble(format!(
                    "speeds must increase: c_{} = {} >= c_{} = {}",
                    j + 1,
                    a.c,
                    j + 2,
                    b.c
                )));
            }
            if b.x0 - a.x0 < min_separation {
                return Err(Error::Ensemble(format!(
                    "centers {} and {} closer than L = {}",
                    a.x0, b.x0, min_separation
                )));
            }
        }
        Ok(Self {
            members,
            min_separation,
            shift,
        })
    }

    /// KdV ensemble from speeds and centers.
    pub fn kdv(speeds: &[f64], centers: &[f64], min_separation: f64) -> Result<Self> {
        if speeds.len() != centers.len() {
            return Err(Error::Ensemble(format!(
                "{} speeds but {} centers",
                speeds.len(),
                centers.len()
            )));
        }
        let members = speeds
            .iter()
            .zip(centers)
            .map(|(&c, &x0)| SolitonParams::kdv(c, x0))
            .collect::<Result<Vec<_>>>()?;
        Self::new(members, min_separation, ShiftPolicy::Raw)
    }

    /// The same speeds and nominal centers as Gardner solitons, with the
    /// given shift policy.
    pub fn to_gardner(&self, beta: f64, shift: ShiftPolicy) -> Result<Self> {
        let members = self
            .members
            .iter()
            .map(|m| SolitonParams::new(m.c, m.x0, beta))
            .collect::<Result<Vec<_>>>()?;
        Self::new(members, self.min_separation, shift)
    }

    /// The KdV ensemble with the same speeds and nominal centers.
    pub fn to_kdv(&self) -> Self {
        Self {
            members: self
                .members
                .iter()
                .map(|m| SolitonParams { beta: 0.0, ..*m })
                .collect(),
            min_separation: self.min_separation,
            shift: ShiftPolicy::Raw,
        }
    }

    pub fn members(&self) -> &[SolitonParams] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn min_separation(&self) -> f64 {
        self.min_separation
    }

    pub fn shift_policy(&self) -> ShiftPolicy {
        self.shift
    }

    pub fn speeds(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.c).collect()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.x0).collect()
    }

    /// Centers actually used when sampling: nominal, or `x_j - delta_j` for
    /// Gardner members under [`ShiftPolicy::Shifted`].
    pub fn effective_centers(&self) -> Vec<f64> {
        self.members
            .iter()
            .map(|m| match self.shift {
                ShiftPolicy::Shifted if m.beta > 0.0 => {
                    m.x0 - delta_shift(m.c, m.beta).expect("validated member")
                }
                _ => m.x0,
            })
            .collect()
    }

    /// Default decay rate `min_j sqrt(c_j)/2` used for interaction bounds.
    pub fn gamma0(&self) -> f64 {
        self.members
            .iter()
            .map(|m| m.c.sqrt())
            .fold(f64::INFINITY, f64::min)
            / 2.0
    }

    /// Samples of each member at its effective center.
    pub fn member_fields(&self, grid: &Grid1D) -> Result<Vec<Vec<f64>>> {
        self.members
            .iter()
            .zip(self.effective_centers())
            .map(|(m, x)| {
                check_tails(grid, m, x)?;
                Ok(sample_profile(m, x, grid))
            })
            .collect()
    }
}

/// Pointwise sum of the members at their effective centers.
pub fn ensemble_field(e: &SolitonEnsemble, grid: &Grid1D) -> Result<WaveField> {
    let parts = e.member_fields(grid)?;
    let mut sum = vec![0.0; grid.n_points()];
    for p in &parts {
        for (s, v) in sum.iter_mut().zip(p) {
            *s += v;
        }
    }
    WaveField::new(*grid, sum, 0.0)
}

/// `sum_{i != j} Q_i Q_j` over the members, computed pairwise so that tiny
/// overlaps keep full relative precision.
pub fn ensemble_cross_term(e: &SolitonEnsemble, grid: &Grid1D) -> Result<WaveField> {
    let parts = e.member_fields(grid)?;
    let mut out = vec![0.0; grid.n_points()];
    for i in 0..parts.len() {
        for j in (i + 1)..parts.len() {
            for (o, (a, b)) in out.iter_mut().zip(parts[i].iter().zip(&parts[j])) {
                *o += 2.0 * a * b;
            }
        }
    }
    WaveField::new(*grid, out, 0.0)
}

// ---------------------------------------------------------------------------
// Hirota N-soliton

fn check_hirota_speeds(speeds: &[f64], phases: &[f64]) -> Result<()> {
    if speeds.is_empty() || speeds.len() != phases.len() {
        return Err(Error::InvalidParameter(format!(
            "{} speeds and {} phases",
            speeds.len(),
            phases.len()
        )));
    }
    if speeds.len() > 16 {
        return Err(Error::InvalidParameter("at most 16 solitons".into()));
    }
    for (i, &c) in speeds.iter().enumerate() {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Inadmissible(format!("speed {c} must be > 0")));
        }
        for &d in &speeds[..i] {
            if d == c {
                return Err(Error::Inadmissible(format!("coincident speeds {c}")));
            }
        }
    }
    if phases.iter().any(|y| !y.is_finite()) {
        return Err(Error::InvalidParameter("non-finite phase".into()));
    }
    Ok(())
}

/// Pairwise interaction exponents `A_ij = 2 ln |(k_i - k_j)/(k_i + k_j)|`,
/// `k = sqrt(c)/2`.
fn interaction(speeds: &[f64]) -> Vec<Vec<f64>> {
    let k: Vec<f64> = speeds.iter().map(|c| 0.5 * c.sqrt()).collect();
    let n = k.len();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                a[i][j] = 2.0 * ((k[i] - k[j]) / (k[i] + k[j])).abs().ln();
            }
        }
    }
    a
}

/// Weights of the Hirota expansion `tau = sum_mu exp(a_mu x + b_mu)` at
/// position `x`: returns (mean, variance) of the slopes `a_mu` under the
/// normalized weights. `(log tau)' = mean`, `(log tau)'' = variance`.
struct TauExpansion {
    slopes: Vec<f64>,
    offsets: Vec<f64>,
}

impl TauExpansion {
    fn new(speeds: &[f64], phases: &[f64], t: f64) -> Self {
        let n = speeds.len();
        let a = interaction(speeds);
        let k: Vec<f64> = speeds.iter().map(|c| 0.5 * c.sqrt()).collect();
        let mut slopes = Vec::with_capacity(1 << n);
        let mut offsets = Vec::with_capacity(1 << n);
        for mask in 0usize..(1 << n) {
            let mut slope = 0.0;
            let mut off = 0.0;
            for i in 0..n {
                if mask & (1 << i) == 0 {
                    continue;
                }
                // eta_i = 2 k_i (x - y_i - c_i t)
                slope += 2.0 * k[i];
                off -= 2.0 * k[i] * (phases[i] + speeds[i] * t);
                for j in (i + 1)..n {
                    if mask & (1 << j) != 0 {
                        off += a[i][j];
                    }
                }
            }
            slopes.push(slope);
            offsets.push(off);
        }
        Self { slopes, offsets }
    }

    fn moments(&self, x: f64, logs: &mut [f64]) -> (f64, f64) {
        let mut lmax = f64::NEG_INFINITY;
        for (l, (a, b)) in logs.iter_mut().zip(self.slopes.iter().zip(&self.offsets)) {
            *l = a * x + b;
            lmax = lmax.max(*l);
        }
        let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (l, a) in logs.iter().zip(&self.slopes) {
            let w = (l - lmax).exp();
            z += w;
            m1 += w * a;
            m2 += w * a * a;
        }
        let mean = m1 / z;
        (mean, (m2 / z - mean * mean).max(0.0))
    }

    fn total_slope(&self) -> f64 {
        *self.slopes.last().expect("nonempty")
    }
}

/// KdV N-soliton `u(t, x) = 6 d^2/dx^2 log tau`, normalized so that a single
/// soliton is `Q_c(x - y - c t)`.
///
/// `log tau` is a log-sum-exp of affine functions of `x`, so its second
/// derivative is the variance of the slopes under the softmax weights; this
/// stays accurate for any `|t|`.
pub fn hirota_n_soliton(
    speeds: &[f64],
    phases: &[f64],
    grid: &Grid1D,
    t: f64,
) -> Result<WaveField> {
    check_hirota_speeds(speeds, phases)?;
    let tau = TauExpansion::new(speeds, phases, t);
    let mut logs = vec![0.0; tau.slopes.len()];
    let samples = (0..grid.n_points())
        .map(|j| 6.0 * tau.moments(grid.x(j), &mut logs).1)
        .collect();
    WaveField::new(*grid, samples, t)
}

/// Same field as [`hirota_n_soliton`], via a spectral derivative of
/// `(log tau)'` after removing its linear ramp across the box.
pub fn hirota_n_soliton_spectral(
    speeds: &[f64],
    phases: &[f64],
    grid: &Grid1D,
    t: f64,
) -> Result<WaveField> {
    check_hirota_speeds(speeds, phases)?;
    let tau = TauExpansion::new(speeds, phases, t);
    let mut logs = vec![0.0; tau.slopes.len()];
    let jump = tau.total_slope();
    let l = grid.length();
    let h: Vec<f64> = (0..grid.n_points())
        .map(|j| {
            let x = grid.x(j);
            tau.moments(x, &mut logs).0 - jump * (x - grid.x_min()) / l
        })
        .collect();
    let hx = derivative_samples(grid, &h, 1);
    let samples = hx.iter().map(|d| 6.0 * (d + jump / l)).collect();
    WaveField::new(*grid, samples, t)
}

/// Asymptotic center offsets of each soliton relative to `y_j + c_j t`, for
/// `t -> -inf` and `t -> +inf` respectively. The collision phase shift of
/// soliton `j` is `plus[j] - minus[j]`.
pub fn hirota_asymptotic_offsets(speeds: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let zeros = vec![0.0; speeds.len()];
    check_hirota_speeds(speeds, &zeros)?;
    let a = interaction(speeds);
    let n = speeds.len();
    let mut minus = vec![0.0; n];
    let mut plus = vec![0.0; n];
    for j in 0..n {
        let kj = 0.5 * speeds[j].sqrt();
        for i in 0..n {
            if i == j {
                continue;
            }
            // Faster solitons sit behind j as t -> -inf, slower ones as t -> +inf.
            if speeds[i] > speeds[j] {
                minus[j] -= a[i][j] / (2.0 * kj);
            } else {
                plus[j] -= a[i][j] / (2.0 * kj);
            }
        }
    }
    Ok((minus, plus))
}

// ---------------------------------------------------------------------------
// Weinstein criterium

/// `int Q_{c,beta}^2 ds` by the trapezoid rule on a fine symmetric grid.
/// The integrand is analytic in a strip and decays like `exp(-2 sqrt(c)|s|)`,
/// so the rule converges geometrically.
pub fn soliton_l2_squared(c: f64, beta: f64) -> Result<f64> {
    SolitonParams::new(c, 0.0, beta)?;
    let sc = c.sqrt();
    let h = 0.02 / sc;
    // Far enough out that Q^2 drops below 1e-30 of its peak, even for rho near 0.
    let r = rho(c, beta).max(1e-300);
    let half = (40.0 + (2.0 / r).ln().max(0.0)) / sc;
    let m = (half / h).ceil() as i64;
    let mut sum = 0.0;
    for i in -m..=m {
        let q = profile(c, beta, i as f64 * h);
        sum += q * q;
    }
    Ok(sum * h)
}

/// `d/dc int Q_{c,beta}^2` by a central difference with step `dc`, refined by
/// one Richardson extrapolation against step `dc/2`.
pub fn weinstein_derivative(c: f64, beta: f64, dc: f64) -> Result<f64> {
    if !(dc.is_finite() && dc > 0.0) {
        return Err(Error::InvalidParameter(format!("dc = {dc} must be > 0")));
    }
    if c - dc <= 0.0 || (beta > 0.0 && c + dc >= max_gardner_speed(beta)) {
        return Err(Error::Inadmissible(format!(
            "stencil [{}, {}] leaves the admissible speed range",
            c - dc,
            c + dc
        )));
    }
    let central = |h: f64| -> Result<f64> {
        Ok((soliton_l2_squared(c + h, beta)? - soliton_l2_squared(c - h, beta)?) / (2.0 * h))
    };
    let coarse = central(dc)?;
    let fine = central(0.5 * dc)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Default Weinstein step, `1e-4 * c`.
pub fn default_weinstein_step(c: f64) -> f64 {
    1e-4 * c
}
