//! Oscillatory integrals of the form ∫ e^{−iλ·(x, f(x))} A(x) dx on convex
//! graph patches, and their sums over the patches of a closed body.
//!
//! Directions are canonicalized to the upper hemisphere (conjugating the
//! result on the way back), so the phase x ↦ λ·(x, f(x)) is always convex and
//! μ̂(−λ) = conj(μ̂(λ)) holds exactly. One-dimensional patches are integrated
//! directly in x with phase-capped Gauss panels; two-dimensional patches go
//! through the level-set density cache, which is built once per direction and
//! reused by every frequency.

pub mod bessel;
mod engine;
pub(crate) mod gauss;
pub(crate) mod levelset;

use std::cell::Cell;

use num_complex::Complex64;

use crate::geometry;
use crate::linalg;
use crate::surface::{AmbientFn, ClosedBody, ConvexPatch, Direction};
use crate::{Error, Result};

use engine::{MonotoneSegment, PanelSettings};

/// Integrand-evaluation budget for plain patch transforms.
pub const MU_HAT_BUDGET: u64 = 100_000_000;
/// Budget for carved and body transforms.
pub const CARVED_BUDGET: u64 = 200_000_000;

/// Value of an oscillatory integral together with an internal error estimate
/// and the work spent on it.
#[derive(Clone, Copy, Debug)]
pub struct OscillatoryResult {
    pub value: Complex64,
    pub est_error: f64,
    pub evals: u64,
    pub budget_exhausted: bool,
}

impl OscillatoryResult {
    fn conjugated(mut self, conj: bool) -> Self {
        if conj {
            self.value = self.value.conj();
        }
        self
    }
}

enum Kind {
    /// n = 1: monotone x-intervals of the admissible domain, split at the
    /// phase argmin and at cutoff kinks.
    Line { pieces: Vec<(f64, f64)> },
    /// n = 2: level-set density model.
    Radial(levelset::DensityCache),
}

/// Transform of one patch along a fixed direction, with the direction-level
/// geometry resolved once so that a whole frequency column costs little more
/// than a single evaluation.
pub struct DirectionalTransform {
    patch: ConvexPatch,
    dir: Direction,
    conj: bool,
    budget: u64,
    kind: Kind,
    build_evals: u64,
}

impl DirectionalTransform {
    pub fn new(patch: &ConvexPatch, v: &Direction) -> Result<Self> {
        let budget = if patch.carving().is_empty() {
            MU_HAT_BUDGET
        } else {
            CARVED_BUDGET
        };
        Self::with_budget(patch, v, budget)
    }

    pub(crate) fn with_budget(patch: &ConvexPatch, v: &Direction, budget: u64) -> Result<Self> {
        if v.dim() != patch.dim() {
            return Err(Error::Parameter(format!(
                "direction dimension {} does not match patch dimension {}",
                v.dim(),
                patch.dim()
            )));
        }
        let (dir, conj) = v.canonical();
        let (kind, build_evals) = match patch.n() {
            1 => (
                Kind::Line {
                    pieces: line_pieces(patch, &dir)?,
                },
                0,
            ),
            _ => {
                let cache = levelset::DensityCache::build(patch, &patch.cutoff_arc(), &dir)?;
                let evals = cache.build_evals;
                (Kind::Radial(cache), evals)
            }
        };
        Ok(DirectionalTransform {
            patch: patch.clone(),
            dir,
            conj,
            budget,
            kind,
            build_evals,
        })
    }

    pub fn direction(&self) -> &Direction {
        &self.dir
    }

    /// Integrand evaluations spent resolving the direction geometry; charge
    /// these once per frequency column.
    pub fn build_evals(&self) -> u64 {
        self.build_evals
    }

    /// A-weighted mass of the transform domain: |eval(t)| ≤ mass for all t.
    pub fn mass(&self) -> f64 {
        match &self.kind {
            Kind::Radial(cache) => cache.mass,
            Kind::Line { pieces } => {
                let (nodes, weights) = gauss::rule(64);
                let mut total = 0.0;
                for &(a, b) in pieces {
                    let mid = 0.5 * (a + b);
                    let half = 0.5 * (b - a);
                    total += half
                        * nodes
                            .iter()
                            .zip(weights)
                            .map(|(x, w)| w * self.patch.cutoff([mid + half * x, 0.0]))
                            .sum::<f64>();
                }
                total
            }
        }
    }

    /// μ̂(t·v) for t ≥ 0.
    pub fn eval(&self, t: f64) -> Result<OscillatoryResult> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Parameter(format!(
                "frequency magnitude must be finite and nonnegative, got {t}"
            )));
        }
        let out = match &self.kind {
            Kind::Line { pieces } => {
                let v = self.dir.raw();
                let phase = |x: f64| t * self.patch.phase([x, 0.0], v);
                let integrand = |x: f64| {
                    let ph = self.patch.phase([x, 0.0], v);
                    Complex64::new(0.0, -t * ph).exp() * self.patch.cutoff([x, 0.0])
                };
                let segments: Vec<MonotoneSegment<'_>> = pieces
                    .iter()
                    .map(|&(a, b)| MonotoneSegment {
                        a,
                        b,
                        phase: &phase,
                        integrand: &integrand,
                    })
                    .collect();
                let settings = PanelSettings {
                    budget: self.budget,
                    ..Default::default()
                };
                let out = engine::integrate_segments(&segments, &settings);
                OscillatoryResult {
                    value: out.value,
                    est_error: out.est_error(),
                    evals: out.evals,
                    budget_exhausted: out.budget_exhausted,
                }
            }
            Kind::Radial(cache) => {
                let out = cache.transform(t, self.budget);
                OscillatoryResult {
                    value: out.value,
                    est_error: out.est_error() + cache.sup_err * cache.srange,
                    evals: out.evals,
                    budget_exhausted: out.budget_exhausted || cache.truncated,
                }
            }
        };
        Ok(out.conjugated(self.conj))
    }
}

/// Negativity set {g < 0} of one carving function on [-r0, r0], resolved by
/// dense sampling plus bisection of the sign changes.
pub(crate) fn negativity_intervals(
    g: &dyn Fn(f64) -> f64,
    r0: f64,
) -> Vec<(f64, f64)> {
    const M: usize = 256;
    let probe = |x: f64| g(x) < 0.0;
    let xs: Vec<(f64, bool)> = (0..=M)
        .map(|i| {
            let x = -r0 + 2.0 * r0 * i as f64 / M as f64;
            (x, probe(x))
        })
        .collect();
    let mut edges: Vec<(f64, bool)> = Vec::new();
    for pair in xs.windows(2) {
        let (x0, b0) = pair[0];
        let (x1, b1) = pair[1];
        if b0 != b1 {
            let (mut a, mut b) = (x0, x1);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if probe(m) == b0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            edges.push((0.5 * (a + b), b1));
        }
    }
    let mut intervals = Vec::new();
    let mut open = if xs[0].1 { Some(-r0) } else { None };
    for (at, after) in edges {
        match (open, after) {
            (None, true) => open = Some(at),
            (Some(start), false) => {
                intervals.push((start, at));
                open = None;
            }
            _ => {}
        }
    }
    if let Some(start) = open {
        intervals.push((start, r0));
    }
    intervals
}

pub(crate) fn intersect_intervals(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if lo < hi {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Admissible monotone intervals for the n = 1 direct path.
fn line_pieces(patch: &ConvexPatch, dir: &Direction) -> Result<Vec<(f64, f64)>> {
    let r0 = patch.r0();
    let support = geometry::support_min(patch, dir)?;
    let mut admissible = vec![(-r0, r0)];
    for g in patch.carving() {
        let g1 = |x: f64| g([x, 0.0]);
        admissible = intersect_intervals(&admissible, &negativity_intervals(&g1, r0));
        if admissible.is_empty() {
            return Ok(admissible);
        }
    }
    let mut cuts: Vec<f64> = vec![support.x0[0]];
    cuts.extend_from_slice(patch.cutoff_kinks());
    let mut pieces = Vec::new();
    for (a, b) in admissible {
        let mut inner: Vec<f64> = cuts
            .iter()
            .copied()
            .filter(|c| *c > a + 1e-14 && *c < b - 1e-14)
            .collect();
        inner.sort_by(|p, q| p.partial_cmp(q).unwrap());
        inner.dedup_by(|p, q| (*p - *q).abs() < 1e-13);
        let mut left = a;
        for c in inner {
            pieces.push((left, c));
            left = c;
        }
        pieces.push((left, b));
    }
    Ok(pieces)
}

fn norm_of(lambda: &[f64]) -> f64 {
    lambda.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn direction_of(lambda: &[f64]) -> Result<(Direction, f64)> {
    if lambda.iter().any(|c| !c.is_finite()) {
        return Err(Error::Parameter("non-finite frequency vector".into()));
    }
    let t = norm_of(lambda);
    if t == 0.0 {
        let mut flat = vec![0.0; lambda.len()];
        *flat.last_mut().unwrap() = 1.0;
        Ok((Direction::new(&flat)?, 0.0))
    } else {
        Ok((Direction::new(lambda)?, t))
    }
}

fn transform_impl(patch: &ConvexPatch, lambda: &[f64], budget: u64) -> Result<OscillatoryResult> {
    if lambda.len() != patch.dim() {
        return Err(Error::Parameter(format!(
            "frequency vector has {} components, patch lives in dimension {}",
            lambda.len(),
            patch.dim()
        )));
    }
    let (v, t) = direction_of(lambda)?;
    let dt = DirectionalTransform::with_budget(patch, &v, budget)?;
    let mut out = dt.eval(t)?;
    out.evals += dt.build_evals();
    Ok(out)
}

/// μ̂(λ) = ∫ e^{−iλ·(x, f(x))} φ(x) dx for an uncarved patch.
pub fn mu_hat(patch: &ConvexPatch, lambda: &[f64]) -> Result<OscillatoryResult> {
    if !patch.carving().is_empty() {
        return Err(Error::Unsupported(
            "mu_hat requires an uncarved patch; use carved_transform".into(),
        ));
    }
    transform_impl(patch, lambda, MU_HAT_BUDGET)
}

/// Transform of a patch restricted to its carved domain. Uncarved patches
/// take the identical path as `mu_hat`; an empty carved domain gives 0.
pub fn carved_transform(patch: &ConvexPatch, lambda: &[f64]) -> Result<OscillatoryResult> {
    transform_impl(patch, lambda, CARVED_BUDGET)
}

fn pad3(lambda: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    out[..lambda.len()].copy_from_slice(lambda);
    out
}

/// Boundary transform of a closed body along a fixed direction: each patch's
/// rotated direction, partition weight and density cache are resolved once,
/// so a whole frequency column costs little more than a single evaluation.
pub struct BodyTransform {
    terms: Vec<(DirectionalTransform, f64)>,
    build_evals: u64,
}

impl BodyTransform {
    pub fn new(body: &ClosedBody, weight: &AmbientFn, v: &Direction) -> Result<Self> {
        let n = body.n();
        if v.dim() != n + 1 {
            return Err(Error::Parameter(format!(
                "direction has {} components, body boundary lives in dimension {}",
                v.dim(),
                n + 1
            )));
        }
        if body.patch_count() == 0 {
            return Err(Error::Unsupported(format!(
                "body '{}' carries no surface patches",
                body.name()
            )));
        }
        let v3 = pad3(v.components());
        let mut terms = Vec::with_capacity(body.patch_count());
        let mut build_evals = 0;
        for k in 0..body.patch_count() {
            let placed = body.placed(k);
            let local = linalg::mat_tvec(&placed.frame, v3);
            let vdir = Direction::new(&local[..n + 1])?;
            let epatch = body.effective_patch(k, weight);
            let dt = DirectionalTransform::with_budget(&epatch, &vdir, CARVED_BUDGET)?;
            build_evals += dt.build_evals();
            terms.push((dt, linalg::dot3(v3, placed.translation)));
        }
        Ok(BodyTransform { terms, build_evals })
    }

    /// Work spent resolving the direction geometry, charged once per column.
    pub fn build_evals(&self) -> u64 {
        self.build_evals
    }

    /// Total weighted boundary mass: |eval(t)| ≤ mass for all t.
    pub fn mass(&self) -> f64 {
        self.terms.iter().map(|(dt, _)| dt.mass()).sum()
    }

    /// ν̂(t·v) for t ≥ 0, each patch shifted by e^{−i t v·τ}.
    pub fn eval(&self, t: f64) -> Result<OscillatoryResult> {
        let mut value = Complex64::new(0.0, 0.0);
        let mut est = 0.0;
        let mut evals = 0;
        let mut exhausted = false;
        for (dt, offset) in &self.terms {
            let term = dt.eval(t)?;
            value += Complex64::new(0.0, -t * offset).exp() * term.value;
            est += term.est_error;
            evals += term.evals;
            exhausted |= term.budget_exhausted;
        }
        Ok(OscillatoryResult {
            value,
            est_error: est,
            evals,
            budget_exhausted: exhausted,
        })
    }
}

/// ν̂(λ) = ∫_{∂K} e^{−iλ·y} w(y) dσ(y), assembled patch by patch through each
/// placement's phase shift e^{−iλ·τ_k} and rotated frequency.
pub fn closed_transform(
    body: &ClosedBody,
    weight: &AmbientFn,
    lambda: &[f64],
) -> Result<OscillatoryResult> {
    let n = body.n();
    if lambda.len() != n + 1 {
        return Err(Error::Parameter(format!(
            "frequency vector has {} components, body boundary lives in dimension {}",
            lambda.len(),
            n + 1
        )));
    }
    if lambda.iter().any(|c| !c.is_finite()) {
        return Err(Error::Parameter("non-finite frequency vector".into()));
    }
    let t = norm_of(lambda);
    let v = if t == 0.0 {
        let mut flat = vec![0.0; n + 1];
        flat[n] = 1.0;
        Direction::new(&flat)?
    } else {
        Direction::new(lambda)?
    };
    let transform = BodyTransform::new(body, weight, &v)?;
    let mut out = transform.eval(t)?;
    out.evals += transform.build_evals();
    Ok(out)
}

/// Integration domain for [`oscillatory_integrate`].
pub enum Domain {
    /// Disjoint finite intervals on the line.
    Intervals(Vec<(f64, f64)>),
    /// Planar disk.
    Disk { center: [f64; 2], radius: f64 },
}

/// General-purpose oscillatory quadrature. `freq_scale` bounds the phase
/// rate of the integrand (radians per unit length) and drives panel sizing;
/// `tol` is the absolute accuracy target, pursued by tightening the phase cap
/// a few times before giving up.
pub fn oscillatory_integrate(
    integrand: &dyn Fn(&[f64]) -> Complex64,
    domain: &Domain,
    freq_scale: f64,
    tol: f64,
) -> Result<OscillatoryResult> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    if !(freq_scale.is_finite() && freq_scale >= 0.0) {
        return Err(Error::Parameter(format!(
            "frequency scale must be finite and nonnegative, got {freq_scale}"
        )));
    }
    match domain {
        Domain::Intervals(list) => {
            for &(a, b) in list {
                if !(a.is_finite() && b.is_finite() && a <= b) {
                    return Err(Error::Parameter(format!("bad interval [{a}, {b}]")));
                }
            }
            let mut cap = 270.0;
            for attempt in 0..4 {
                let phase = |x: f64| freq_scale * x;
                let f = |x: f64| integrand(&[x]);
                let segments: Vec<MonotoneSegment<'_>> = list
                    .iter()
                    .filter(|(a, b)| b > a)
                    .map(|&(a, b)| MonotoneSegment {
                        a,
                        b,
                        phase: &phase,
                        integrand: &f,
                    })
                    .collect();
                let settings = PanelSettings {
                    phase_cap: cap,
                    budget: MU_HAT_BUDGET,
                    ..Default::default()
                };
                let out = engine::integrate_segments(&segments, &settings);
                let result = OscillatoryResult {
                    value: out.value,
                    est_error: out.est_error(),
                    evals: out.evals,
                    budget_exhausted: out.budget_exhausted,
                };
                if result.est_error <= tol || result.budget_exhausted || attempt == 3 {
                    return Ok(result);
                }
                cap *= 0.5;
            }
            unreachable!()
        }
        Domain::Disk { center, radius } => {
            if !(radius.is_finite() && *radius > 0.0) {
                return Err(Error::Parameter(format!("disk radius must be positive, got {radius}")));
            }
            let mut cap = 270.0;
            for attempt in 0..4 {
                let inner_evals = Cell::new(0u64);
                let inner_est = Cell::new(0.0f64);
                let inner_flag = Cell::new(false);
                let radial = |theta: f64| -> Complex64 {
                    let (s, c) = theta.sin_cos();
                    let phase = |r: f64| freq_scale * r;
                    let f = |r: f64| {
                        integrand(&[center[0] + r * c, center[1] + r * s]) * r
                    };
                    let seg = [MonotoneSegment {
                        a: 0.0,
                        b: *radius,
                        phase: &phase,
                        integrand: &f,
                    }];
                    let settings = PanelSettings {
                        phase_cap: cap,
                        budget: 4_000_000,
                        ..Default::default()
                    };
                    let out = engine::integrate_segments(&seg, &settings);
                    inner_evals.set(inner_evals.get() + out.evals);
                    inner_est.set(inner_est.get().max(out.est_error()));
                    inner_flag.set(inner_flag.get() | out.budget_exhausted);
                    out.value
                };
                // Pilot ray to size the angular budget against the total cap.
                let pilot_before = inner_evals.get();
                let _ = radial(0.1234);
                let per_ray = (inner_evals.get() - pilot_before).max(1);
                let outer_budget = (CARVED_BUDGET / per_ray).clamp(256, 2_000_000);
                let outer_phase = |theta: f64| freq_scale * radius * theta;
                let outer = [MonotoneSegment {
                    a: 0.0,
                    b: std::f64::consts::TAU,
                    phase: &outer_phase,
                    integrand: &radial,
                }];
                let settings = PanelSettings {
                    phase_cap: cap,
                    budget: outer_budget,
                    ..Default::default()
                };
                let out = engine::integrate_segments(&outer, &settings);
                let result = OscillatoryResult {
                    value: out.value,
                    est_error: out.est_error() + std::f64::consts::TAU * inner_est.get(),
                    evals: inner_evals.get(),
                    budget_exhausted: out.budget_exhausted || inner_flag.get(),
                };
                if result.est_error <= tol || result.budget_exhausted || attempt == 3 {
                    return Ok(result);
                }
                cap *= 0.5;
            }
            unreachable!()
        }
    }
}
