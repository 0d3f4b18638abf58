//! Channel mode bases u_n±.
//!
//! A channel of width `d` carries separated modes
//! `u_n± = φ_n(x_⊥) e^{±iλ_n z} / √λ_n` with `λ_n = √(k² − μ_n)` and the
//! branch convention `Im λ_n ≤ 0`: propagating modes have real positive λ,
//! evanescent ones λ = −iκ (so u⁻ decays and u⁺ grows outward). At a
//! threshold (λ_n = 0) the oscillating factor is replaced by the standing
//! pair `(1 ∓ z)/√2`. Grating (Rayleigh) modes are
//! `e^{±iλ_n z + i(n+α)y} / √(4πλ_n)` with `λ_n = √(k² − (n+α)²)`.
//!
//! Every mode is multiplied by a smooth cutoff η(z) that vanishes inside the
//! junction (z ≤ R0) and equals one from `R0 + δ` on, so a mode "lives" only
//! in its own channel.
//!
//! Propagating channel modes carry unit energy flux
//! `∫ Im(∂u/∂ν ū) dx_⊥ = ±1` (+ outgoing, − incoming); grating modes carry
//! ±1/2 uniformly, which rescales nothing observable.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::{ChannelProfile, ChannelSpec, Point2, WallKind};

#[derive(Debug, Error)]
pub enum ModeError {
    #[error("mode selection produced {m} modes, above the cap {cap}; lower gamma")]
    GammaTooLarge { m: usize, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    Propagating,
    Evanescent,
    Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `+` modes (flux +1).
    Outgoing,
    /// `−` modes (flux −1).
    Incoming,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Outgoing => 1.0,
            Direction::Incoming => -1.0,
        }
    }
}

/// λ = √(k² − μ) with the branch `Im λ ≤ 0`:
/// k² > μ gives the real positive root, k² < μ gives −i√(μ − k²).
pub fn longitudinal_wavenumber(k_sq: f64, mu: f64) -> Complex64 {
    let d = k_sq - mu;
    if d >= 0.0 {
        Complex64::new(d.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, -(-d).sqrt())
    }
}

/// α = −k sin θ for incidence angle θ.
pub fn grating_alpha(k: f64, theta: f64) -> f64 {
    -k * theta.sin()
}

/// Threshold classification, with ε_thr understood relative to k²
/// (a mode is at threshold when |k² − μ| ≤ ε_thr · max(1, |k²|)).
pub fn classify(k_sq: f64, mu: f64, eps_thr: f64) -> ModeKind {
    let tol = eps_thr * k_sq.abs().max(1.0);
    if (k_sq - mu).abs() <= tol {
        ModeKind::Threshold
    } else if k_sq > mu {
        ModeKind::Propagating
    } else {
        ModeKind::Evanescent
    }
}

/// Cross-section eigenfunction, analytic or sampled.
#[derive(Debug, Clone)]
pub enum PhiShape {
    /// √(2/d) sin(nπ x_⊥ / d), n ≥ 1.
    DirichletSine { n: usize, width: f64 },
    /// m = 0: 1/√d; m ≥ 1: √(2/d) cos(mπ x_⊥ / d).
    NeumannCosine { m: usize, width: f64 },
    /// Values on a uniform grid over [0, width], endpoints included,
    /// normalized to ∫ φ² = 1; evaluated by linear interpolation.
    Sampled { width: f64, values: Vec<f64> },
}

impl PhiShape {
    pub fn eval(&self, x_perp: f64) -> f64 {
        match self {
            PhiShape::DirichletSine { n, width } => {
                (2.0 / width).sqrt() * (*n as f64 * PI * x_perp / width).sin()
            }
            PhiShape::NeumannCosine { m, width } => {
                if *m == 0 {
                    (1.0 / width).sqrt()
                } else {
                    (2.0 / width).sqrt() * (*m as f64 * PI * x_perp / width).cos()
                }
            }
            PhiShape::Sampled { width, values } => {
                let m = values.len() - 1;
                let t = (x_perp / width).clamp(0.0, 1.0) * m as f64;
                let i = (t.floor() as usize).min(m - 1);
                let f = t - i as f64;
                values[i] * (1.0 - f) + values[i + 1] * f
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct CrossSectionEigenpair {
    pub mu: f64,
    pub phi: PhiShape,
}

/// Eigenpairs {μ_n, φ_n} of the channel cross-section problem, sorted by μ.
///
/// Constant profiles get the analytic pairs; a variable potential profile is
/// solved by second-order finite differences and a symmetric tridiagonal
/// eigensolve (Sturm bisection + inverse iteration).
pub fn cross_section_eigen(channel: &ChannelSpec, count: usize) -> Vec<CrossSectionEigenpair> {
    assert!(count >= 1);
    let d = channel.width;
    match &channel.profile {
        ChannelProfile::Uniform => (1..=count)
            .map(|n| match channel.wall {
                WallKind::Dirichlet => CrossSectionEigenpair {
                    mu: (n as f64 * PI / d).powi(2),
                    phi: PhiShape::DirichletSine { n, width: d },
                },
                WallKind::Neumann => CrossSectionEigenpair {
                    mu: ((n - 1) as f64 * PI / d).powi(2),
                    phi: PhiShape::NeumannCosine { m: n - 1, width: d },
                },
            })
            .collect(),
        ChannelProfile::Potential(samples) => {
            sturm_liouville_eigen(d, samples, channel.wall, count)
        }
    }
}

/// FD grid resolution for the 1D Sturm–Liouville solve; far finer than any
/// 2D mesh used against it, so the 1D error is negligible in comparison.
const SL_INTERVALS: usize = 4000;

fn profile_at(samples: &[f64], width: f64, x: f64) -> f64 {
    let m = samples.len() - 1;
    let t = (x / width).clamp(0.0, 1.0) * m as f64;
    let i = (t.floor() as usize).min(m - 1);
    let f = t - i as f64;
    samples[i] * (1.0 - f) + samples[i + 1] * f
}

fn sturm_liouville_eigen(
    width: f64,
    samples: &[f64],
    wall: WallKind,
    count: usize,
) -> Vec<CrossSectionEigenpair> {
    let m = SL_INTERVALS;
    let h = width / m as f64;
    // Dirichlet: unknowns at interior nodes x_i = i h, i = 1..m-1.
    // Neumann: unknowns at cell midpoints (reflection closure).
    let (xs, diag, off): (Vec<f64>, Vec<f64>, Vec<f64>) = match wall {
        WallKind::Dirichlet => {
            let xs: Vec<f64> = (1..m).map(|i| i as f64 * h).collect();
            let diag =
                xs.iter().map(|&x| 2.0 / (h * h) + profile_at(samples, width, x)).collect();
            let off = vec![-1.0 / (h * h); m.saturating_sub(2)];
            (xs, diag, off)
        }
        WallKind::Neumann => {
            let xs: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) * h).collect();
            let mut diag: Vec<f64> =
                xs.iter().map(|&x| 2.0 / (h * h) + profile_at(samples, width, x)).collect();
            diag[0] -= 1.0 / (h * h);
            diag[m - 1] -= 1.0 / (h * h);
            let off = vec![-1.0 / (h * h); m - 1];
            (xs, diag, off)
        }
    };
    let vals = tridiag_smallest_eigenvalues(&diag, &off, count);
    vals.iter()
        .map(|&mu| {
            let v = tridiag_inverse_iteration(&diag, &off, mu);
            // re-sample onto a uniform grid with endpoints
            let n_out = 801;
            let mut values = Vec::with_capacity(n_out);
            for i in 0..n_out {
                let x = width * i as f64 / (n_out - 1) as f64;
                let val = match wall {
                    WallKind::Dirichlet => {
                        if x <= xs[0] {
                            v[0] * (x / xs[0])
                        } else if x >= xs[xs.len() - 1] {
                            v[v.len() - 1] * ((width - x) / (width - xs[xs.len() - 1]))
                        } else {
                            sample_linear(&xs, &v, x)
                        }
                    }
                    WallKind::Neumann => {
                        if x <= xs[0] {
                            v[0]
                        } else if x >= xs[xs.len() - 1] {
                            v[v.len() - 1]
                        } else {
                            sample_linear(&xs, &v, x)
                        }
                    }
                };
                values.push(val);
            }
            // normalize ∫ φ² = 1 (trapezoid on the output grid)
            let hh = width / (n_out - 1) as f64;
            let mut norm = 0.0;
            for (i, val) in values.iter().enumerate() {
                let w = if i == 0 || i == n_out - 1 { 0.5 } else { 1.0 };
                norm += w * val * val * hh;
            }
            let s = norm.sqrt();
            // sign convention: positive near the left wall
            let sgn = if values[n_out / 8] < 0.0 { -1.0 } else { 1.0 };
            for v in values.iter_mut() {
                *v *= sgn / s;
            }
            CrossSectionEigenpair { mu, phi: PhiShape::Sampled { width, values } }
        })
        .collect()
}

fn sample_linear(xs: &[f64], vs: &[f64], x: f64) -> f64 {
    let mut lo = 0;
    let mut hi = xs.len() - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if xs[mid] <= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let f = (x - xs[lo]) / (xs[hi] - xs[lo]);
    vs[lo] * (1.0 - f) + vs[hi] * f
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`
/// (Sturm sequence sign count).
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut cnt = 0;
    let mut d = diag[0] - x;
    if d < 0.0 {
        cnt += 1;
    }
    for i in 1..diag.len() {
        let o = off[i - 1];
        if d == 0.0 {
            d = 1e-300;
        }
        d = (diag[i] - x) - o * o / d;
        if d < 0.0 {
            cnt += 1;
        }
    }
    cnt
}

fn tridiag_smallest_eigenvalues(diag: &[f64], off: &[f64], count: usize) -> Vec<f64> {
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..diag.len() {
        let mut r = 0.0;
        if i > 0 {
            r += off[i - 1].abs();
        }
        if i < off.len() {
            r += off[i].abs();
        }
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (0..count)
        .map(|k| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if sturm_count(diag, off, mid) > k {
                    b = mid;
                } else {
                    a = mid;
                }
                if b - a < 1e-13 * (1.0 + hi.abs()) {
                    break;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

fn tridiag_inverse_iteration(diag: &[f64], off: &[f64], mu: f64) -> Vec<f64> {
    let n = diag.len();
    let shift = mu + 1e-10 * (1.0 + mu.abs());
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.37).sin()).collect();
    for _ in 0..4 {
        v = tridiag_solve(diag, off, shift, &v);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    v
}

/// Solve (T − shift·I) x = b for symmetric tridiagonal T by LU with partial
/// pivoting (stable for near-singular shifts).
fn tridiag_solve(diag: &[f64], off: &[f64], shift: f64, b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut d: Vec<f64> = diag.iter().map(|x| x - shift).collect();
    let mut e: Vec<f64> = off.to_vec(); // superdiagonal
    let mut f = vec![0.0; n]; // fill-in second superdiagonal
    let mut sub: Vec<f64> = off.to_vec(); // subdiagonal
    let mut x: Vec<f64> = b.to_vec();
    for i in 0..n - 1 {
        if sub[i].abs() > d[i].abs() {
            let (a0, a1, a2) = (sub[i], d[i + 1], if i + 1 < n - 1 { e[i + 1] } else { 0.0 });
            let (b0, b1) = (d[i], e[i]);
            d[i] = a0;
            e[i] = a1;
            f[i] = a2;
            sub[i] = b0;
            d[i + 1] = b1;
            if i + 1 < n - 1 {
                e[i + 1] = 0.0;
            }
            x.swap(i, i + 1);
        }
        if d[i] == 0.0 {
            d[i] = 1e-300;
        }
        let l = sub[i] / d[i];
        d[i + 1] -= l * e[i];
        if i + 1 < n - 1 {
            e[i + 1] -= l * f[i];
        }
        x[i + 1] -= l * x[i];
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = 1e-300;
    }
    x[n - 1] /= d[n - 1];
    if n >= 2 {
        x[n - 2] = (x[n - 2] - e[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (x[i] - e[i] * x[i + 1] - f[i] * x[i + 2]) / d[i];
    }
    x
}

/// Smooth quintic cutoff: 0 for z ≤ r0, 1 for z ≥ r0 + delta, C² throughout.
#[derive(Debug, Clone, Copy)]
pub struct Cutoff {
    pub r0: f64,
    pub delta: f64,
}

impl Cutoff {
    pub fn eta(&self, z: f64) -> f64 {
        let s = ((z - self.r0) / self.delta).clamp(0.0, 1.0);
        s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    }

    pub fn eta_d(&self, z: f64) -> f64 {
        let s = (z - self.r0) / self.delta;
        if !(0.0..=1.0).contains(&s) {
            return 0.0;
        }
        30.0 * s * s * (1.0 - s) * (1.0 - s) / self.delta
    }

    pub fn eta_dd(&self, z: f64) -> f64 {
        let s = (z - self.r0) / self.delta;
        if !(0.0..=1.0).contains(&s) {
            return 0.0;
        }
        60.0 * s * (1.0 - s) * (1.0 - 2.0 * s) / (self.delta * self.delta)
    }
}

/// How the mode is mapped onto the plane, plus its cross-section shape.
#[derive(Debug, Clone)]
pub enum ModeShape {
    Channel { origin: Point2, axis: Point2, width: f64, pair: Arc<CrossSectionEigenpair> },
    Grating { alpha: f64, order: i64 },
}

/// One member of the mode family list (direction not yet chosen).
#[derive(Debug, Clone)]
pub struct ModeFamily {
    pub channel: usize,
    /// 1-based cross-section index for channel modes; diffraction order for
    /// grating modes.
    pub index: i64,
    pub lambda: Complex64,
    pub kind: ModeKind,
    pub shape: ModeShape,
}

impl ModeFamily {
    pub fn basis(&self, direction: Direction, cutoff: Cutoff, phase_ref: f64) -> BasisMode {
        BasisMode { family: self.clone(), direction, cutoff, phase_ref }
    }
}

/// A concrete basis mode u_n± with cutoff and longitudinal phase reference.
#[derive(Debug, Clone)]
pub struct BasisMode {
    pub family: ModeFamily,
    pub direction: Direction,
    pub cutoff: Cutoff,
    /// z at which the longitudinal factor has unit phase; 0 reproduces the
    /// textbook e^{±iλz} convention, while the scattering pipeline
    /// references phases at the cut z = R to keep all Gram columns O(1).
    pub phase_ref: f64,
}

impl BasisMode {
    pub fn lambda(&self) -> Complex64 {
        self.family.lambda
    }

    pub fn kind(&self) -> ModeKind {
        self.family.kind
    }

    /// Channel-local (z, x_⊥) of a global point.
    pub fn local(&self, p: Point2) -> (f64, f64) {
        match &self.family.shape {
            ModeShape::Channel { origin, axis, width, .. } => {
                let z = (p - *origin).dot(*axis);
                let xp = (p - *origin).dot(axis.perp()) + 0.5 * width;
                (z, xp)
            }
            ModeShape::Grating { .. } => (p.y, p.x),
        }
    }

    /// Longitudinal factor E(z) and its derivative E'(z).
    pub fn longitudinal(&self, z: f64) -> (Complex64, Complex64) {
        let s = self.direction.sign();
        let zr = z - self.phase_ref;
        match self.family.kind {
            ModeKind::Threshold => {
                // e^{±iλz}/√λ ⇝ (1 ∓ z)/√2 at the threshold
                let e = Complex64::new((1.0 - s * zr) / 2.0_f64.sqrt(), 0.0);
                let de = Complex64::new(-s / 2.0_f64.sqrt(), 0.0);
                (e, de)
            }
            _ => {
                let lam = self.family.lambda;
                let norm = match &self.family.shape {
                    ModeShape::Channel { .. } => lam.sqrt(),
                    ModeShape::Grating { .. } => (2.0 * lam).sqrt(),
                };
                let e = (Complex64::i() * s * lam * zr).exp() / norm;
                (e, Complex64::i() * s * lam * e)
            }
        }
    }

    /// Cross-section factor at x_⊥ (for gratings, at y ∈ [−π, π]).
    pub fn cross(&self, x_perp: f64) -> Complex64 {
        match &self.family.shape {
            ModeShape::Channel { pair, .. } => Complex64::new(pair.phi.eval(x_perp), 0.0),
            ModeShape::Grating { alpha, order } => {
                let ky = *order as f64 + alpha;
                (Complex64::i() * ky * x_perp).exp() / (2.0 * PI).sqrt()
            }
        }
    }

    /// Mode value with the cutoff applied: η(z) φ(x_⊥) E(z).
    pub fn value(&self, p: Point2) -> Complex64 {
        let (z, xp) = self.local(p);
        let eta = self.cutoff.eta(z);
        if eta == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let (e, _) = self.longitudinal(z);
        self.cross(xp) * e * eta
    }

    /// The cutoff commutator source `2η′E′φ + η″Eφ` driving the difference
    /// problem; supported only in the transition zone.
    pub fn commutator_source(&self, p: Point2) -> Complex64 {
        let (z, xp) = self.local(p);
        let ed = self.cutoff.eta_d(z);
        let edd = self.cutoff.eta_dd(z);
        if ed == 0.0 && edd == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let (e, de) = self.longitudinal(z);
        self.cross(xp) * (de * 2.0 * ed + e * edd)
    }

    /// Signed energy flux ∫ Im(∂u/∂ν ū) dx_⊥ through a full cross-section
    /// in the η ≡ 1 region, by direct quadrature.
    pub fn flux(&self) -> f64 {
        let z = self.cutoff.r0 + self.cutoff.delta * 1.5;
        let (e, de) = self.longitudinal(z);
        let (width, n) = match &self.family.shape {
            ModeShape::Channel { width, .. } => (*width, 2048usize),
            ModeShape::Grating { .. } => (2.0 * PI, 2048usize),
        };
        let h = width / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            let xp = match &self.family.shape {
                ModeShape::Channel { .. } => i as f64 * h,
                ModeShape::Grating { .. } => -PI + i as f64 * h,
            };
            let phi = self.cross(xp);
            let u = phi * e;
            let du = phi * de;
            acc += w * h * (du * u.conj()).im;
        }
        acc
    }
}

/// The mode set entering the functional at one frequency: N propagating
/// (including standing threshold modes) plus evanescent modes with
/// |Im λ| < γ; M total, propagating first.
#[derive(Debug, Clone)]
pub struct ModeSelection {
    pub k_sq: f64,
    pub gamma: f64,
    pub eps_thr: f64,
    pub n_prop: usize,
    pub families: Vec<ModeFamily>,
}

impl ModeSelection {
    pub fn m_total(&self) -> usize {
        self.families.len()
    }

    pub fn has_threshold(&self) -> bool {
        self.families.iter().any(|f| f.kind == ModeKind::Threshold)
    }
}

pub const DEFAULT_MODE_CAP: usize = 64;

/// Select all channel modes with |Im λ_n| < γ at frequency k² (or energy E).
pub fn select_modes(
    k_sq: f64,
    channels: &[ChannelSpec],
    gamma: f64,
    eps_thr: f64,
    cap: usize,
) -> Result<ModeSelection, ModeError> {
    assert!(gamma > 0.0, "gamma must be positive");
    let mut families = Vec::new();
    for (j, c) in channels.iter().enumerate() {
        // μ < k² + γ² ⇔ |Im λ| < γ (propagating modes always qualify)
        let mu_max = k_sq + gamma * gamma;
        let count_hint = match &c.profile {
            ChannelProfile::Uniform => {
                ((c.width * mu_max.max(0.0).sqrt() / PI).ceil() as usize + 2).max(2)
            }
            ChannelProfile::Potential(_) => 64,
        };
        let pairs = cross_section_eigen(c, count_hint);
        for (i, pair) in pairs.into_iter().enumerate() {
            if pair.mu >= mu_max {
                break;
            }
            let lambda = longitudinal_wavenumber(k_sq, pair.mu);
            let kind = classify(k_sq, pair.mu, eps_thr);
            families.push(ModeFamily {
                channel: j,
                index: (i + 1) as i64,
                lambda,
                kind,
                shape: ModeShape::Channel {
                    origin: c.origin,
                    axis: c.axis,
                    width: c.width,
                    pair: Arc::new(pair),
                },
            });
        }
    }
    finish_selection(k_sq, gamma, eps_thr, cap, families)
}

/// Select grating (Rayleigh) orders with |Im λ_n| < γ.
pub fn select_grating_modes(
    k_sq: f64,
    alpha: f64,
    gamma: f64,
    eps_thr: f64,
    cap: usize,
) -> Result<ModeSelection, ModeError> {
    assert!(gamma > 0.0, "gamma must be positive");
    let k_eff = (k_sq + gamma * gamma).max(0.0).sqrt();
    let n_lo = (-alpha - k_eff).floor() as i64 - 1;
    let n_hi = (-alpha + k_eff).ceil() as i64 + 1;
    let mut families = Vec::new();
    for n in n_lo..=n_hi {
        let mu = (n as f64 + alpha).powi(2);
        if mu >= k_sq + gamma * gamma {
            continue;
        }
        let lambda = longitudinal_wavenumber(k_sq, mu);
        let kind = classify(k_sq, mu, eps_thr);
        families.push(ModeFamily {
            channel: 0,
            index: n,
            lambda,
            kind,
            shape: ModeShape::Grating { alpha, order: n },
        });
    }
    finish_selection(k_sq, gamma, eps_thr, cap, families)
}

fn finish_selection(
    k_sq: f64,
    gamma: f64,
    eps_thr: f64,
    cap: usize,
    mut families: Vec<ModeFamily>,
) -> Result<ModeSelection, ModeError> {
    // propagating + threshold first, then evanescent by decay rate
    families.sort_by(|a, b| {
        let rank = |f: &ModeFamily| matches!(f.kind, ModeKind::Evanescent) as u8;
        rank(a)
            .cmp(&rank(b))
            .then_with(|| a.lambda.im.abs().partial_cmp(&b.lambda.im.abs()).unwrap())
            .then_with(|| a.channel.cmp(&b.channel))
            .then_with(|| a.index.cmp(&b.index))
    });
    let m = families.len();
    if m > cap {
        return Err(ModeError::GammaTooLarge { m, cap });
    }
    let n_prop = families.iter().filter(|f| f.kind != ModeKind::Evanescent).count();
    Ok(ModeSelection { k_sq, gamma, eps_thr, n_prop, families })
}

#[cfg(test)]
mod tests;
