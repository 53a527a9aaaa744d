//! Convex graph patches, closed bodies assembled from them, and the named
//! catalog used by every experiment.
//!
//! A patch is the graph of a convex function `f` over the closed disk (or
//! interval) of radius `r0`, positioned so that `f(0) = 0` and `∇f(0) = 0`:
//! the tangent plane at the origin is horizontal and the surface opens toward
//! the positive last coordinate. The measure of interest on the patch is the
//! surface measure `√(1+|∇f|²) dx` localized by a compactly supported cutoff.

use std::sync::Arc;

use crate::{Error, Result};

pub mod body;
pub mod catalog;

pub use body::{ClosedBody, PlacedPatch};

/// Scalar field on patch coordinates. The second slot is ignored for n = 1.
pub type ScalarFn = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;
/// Gradient field on patch coordinates.
pub type GradientFn = Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;
/// Scalar field on ambient points, e.g. a smooth weight on R^{n+1}.
pub type AmbientFn = Arc<dyn Fn([f64; 3]) -> f64 + Send + Sync>;

/// Unit direction in the ambient space R^{n+1}; `v[dim()-1]` is the height
/// component and any trailing slot is zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction {
    v: [f64; 3],
    dim: usize,
}

impl Direction {
    pub fn new(components: &[f64]) -> Result<Self> {
        if components.len() < 2 || components.len() > 3 {
            return Err(Error::Direction(format!(
                "expected 2 or 3 components, got {}",
                components.len()
            )));
        }
        let mut v = [0.0; 3];
        v[..components.len()].copy_from_slice(components);
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Direction("zero or non-finite direction".into()));
        }
        for c in &mut v {
            *c /= norm;
        }
        Ok(Direction {
            v,
            dim: components.len(),
        })
    }

    /// Direction (cos θ, sin θ) in the plane.
    pub fn from_angle(theta: f64) -> Self {
        Direction {
            v: [theta.cos(), theta.sin(), 0.0],
            dim: 2,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Ambient components (length `dim`).
    pub fn components(&self) -> &[f64] {
        &self.v[..self.dim]
    }

    pub(crate) fn raw(&self) -> [f64; 3] {
        self.v
    }

    /// Height (last) component.
    pub fn height_component(&self) -> f64 {
        self.v[self.dim - 1]
    }

    pub fn negated(&self) -> Self {
        Direction {
            v: [-self.v[0], -self.v[1], -self.v[2]],
            dim: self.dim,
        }
    }

    /// Upper-hemisphere representative: flips the sign so the height
    /// component is positive, ties at zero broken by the first nonzero
    /// coordinate. Returns the representative and whether it was flipped.
    pub fn canonical(&self) -> (Self, bool) {
        let mut flip = false;
        let last = self.height_component();
        if last < 0.0 {
            flip = true;
        } else if last == 0.0 {
            for &c in self.components() {
                if c != 0.0 {
                    flip = c < 0.0;
                    break;
                }
            }
        }
        (if flip { self.negated() } else { *self }, flip)
    }
}

/// Graph patch of a convex function over a disk of radius `r0`, with its
/// localizing cutoff and optional carving functions restricting the domain to
/// their joint negativity set.
#[derive(Clone)]
pub struct ConvexPatch {
    n: usize,
    r0: f64,
    name: String,
    analytic: bool,
    f: ScalarFn,
    grad: GradientFn,
    cutoff: ScalarFn,
    cutoff_kinks: Vec<f64>,
    carving: Vec<ScalarFn>,
}

impl ConvexPatch {
    /// Assemble a patch from its height function and gradient; the cutoff is
    /// the standard C² bump `(1 - |x|²/r0²)³`.
    pub fn new(
        n: usize,
        r0: f64,
        name: impl Into<String>,
        analytic: bool,
        f: ScalarFn,
        grad: GradientFn,
    ) -> Result<Self> {
        if n != 1 && n != 2 {
            return Err(Error::Parameter(format!("base dimension {n} not in {{1,2}}")));
        }
        if !(r0.is_finite() && r0 > 0.0) {
            return Err(Error::Parameter(format!("patch radius {r0} must be positive")));
        }
        let cutoff = standard_bump(r0);
        Ok(ConvexPatch {
            n,
            r0,
            name: name.into(),
            analytic,
            f,
            grad,
            cutoff,
            cutoff_kinks: Vec::new(),
            carving: Vec::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Ambient dimension n+1.
    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_analytic(&self) -> bool {
        self.analytic
    }

    pub fn carving(&self) -> &[ScalarFn] {
        &self.carving
    }

    /// Replace the carving list (builder style).
    pub fn with_carving(mut self, carving: Vec<ScalarFn>) -> Self {
        self.carving = carving;
        self
    }

    /// Replace the cutoff (used when assembling partition-of-unity weights).
    pub fn with_cutoff(mut self, cutoff: ScalarFn) -> Self {
        self.cutoff = cutoff;
        self
    }

    /// Record coordinates where the cutoff is less regular than C² (n = 1
    /// partition-of-unity seams); quadrature splits at these points.
    pub fn with_cutoff_kinks(mut self, kinks: Vec<f64>) -> Self {
        self.cutoff_kinks = kinks;
        self
    }

    pub fn cutoff_kinks(&self) -> &[f64] {
        &self.cutoff_kinks
    }

    pub fn height(&self, x: [f64; 2]) -> f64 {
        (self.f)(x)
    }

    pub fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        (self.grad)(x)
    }

    pub fn cutoff(&self, x: [f64; 2]) -> f64 {
        (self.cutoff)(x)
    }

    pub(crate) fn cutoff_arc(&self) -> ScalarFn {
        self.cutoff.clone()
    }

    /// Point on the graph in local ambient coordinates `(x, f(x))`.
    pub fn surface_point(&self, x: [f64; 2]) -> [f64; 3] {
        let h = self.height(x);
        match self.n {
            1 => [x[0], h, 0.0],
            _ => [x[0], x[1], h],
        }
    }

    /// Surface measure density `√(1+|∇f|²)` relative to dx.
    pub fn area_element(&self, x: [f64; 2]) -> f64 {
        let g = self.gradient(x);
        let g2 = match self.n {
            1 => g[0] * g[0],
            _ => g[0] * g[0] + g[1] * g[1],
        };
        (1.0 + g2).sqrt()
    }

    /// Linear-plus-height phase `u · (x, f(x))` for a local ambient covector
    /// `u` (arbitrary length and sign).
    pub fn phase(&self, x: [f64; 2], u: [f64; 3]) -> f64 {
        match self.n {
            1 => u[0] * x[0] + u[1] * self.height(x),
            _ => u[0] * x[0] + u[1] * x[1] + u[2] * self.height(x),
        }
    }

    /// Derivative of `r ↦ phase(x0 + r·ω, u)`.
    pub fn phase_ray_derivative(&self, x0: [f64; 2], omega: [f64; 2], r: f64, u: [f64; 3]) -> f64 {
        let x = [x0[0] + r * omega[0], x0[1] + r * omega[1]];
        let g = self.gradient(x);
        match self.n {
            1 => u[0] * omega[0] + u[1] * g[0] * omega[0],
            _ => {
                u[0] * omega[0]
                    + u[1] * omega[1]
                    + u[2] * (g[0] * omega[0] + g[1] * omega[1])
            }
        }
    }

    /// True when every carving function is strictly negative at `x` (no
    /// carving means the whole patch).
    pub fn in_carved_domain(&self, x: [f64; 2]) -> bool {
        self.carving.iter().all(|g| g(x) < 0.0)
    }

    /// Whether `x` lies in the open patch domain.
    pub fn in_domain(&self, x: [f64; 2]) -> bool {
        let r2 = match self.n {
            1 => x[0] * x[0],
            _ => x[0] * x[0] + x[1] * x[1],
        };
        r2 < self.r0 * self.r0
    }
}

/// The standard cutoff `(1 - |x|²/r0²)³`, compactly supported and C².
pub fn standard_bump(r0: f64) -> ScalarFn {
    let inv_r2 = 1.0 / (r0 * r0);
    Arc::new(move |x: [f64; 2]| {
        let s = (x[0] * x[0] + x[1] * x[1]) * inv_r2;
        if s >= 1.0 {
            0.0
        } else {
            let t = 1.0 - s;
            t * t * t
        }
    })
}

/// One validation check outcome: the worst violation observed and whether it
/// stayed within tolerance.
#[derive(Clone, Debug)]
pub struct ValidationEntry {
    pub check: String,
    pub pass: bool,
    pub worst: f64,
    pub tolerance: f64,
}

/// Report from `validate_patch`.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub entries: Vec<ValidationEntry>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| !e.pass)
            .map(|e| e.check.as_str())
            .collect()
    }
}

/// Sample-based verification of the patch contract: vertex conditions,
/// midpoint convexity, cutoff support, and consistency of the supplied
/// gradient with finite differences.
pub fn validate_patch(patch: &ConvexPatch, samples: usize, seed: u64) -> Result<ValidationReport> {
    use rand::{Rng, SeedableRng};
    if samples < 100 {
        return Err(Error::Parameter(format!(
            "validation needs at least 100 samples, got {samples}"
        )));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> [f64; 2] {
        loop {
            let x = [
                rng.gen_range(-patch.r0..patch.r0),
                if patch.n == 2 {
                    rng.gen_range(-patch.r0..patch.r0)
                } else {
                    0.0
                },
            ];
            if patch.in_domain(x) {
                return x;
            }
        }
    };

    let mut entries = Vec::new();

    let vertex = patch.height([0.0, 0.0]).abs();
    entries.push(ValidationEntry {
        check: "height vanishes at the origin".into(),
        pass: vertex <= 1e-12,
        worst: vertex,
        tolerance: 1e-12,
    });

    let g0 = patch.gradient([0.0, 0.0]);
    let g0n = (g0[0] * g0[0] + g0[1] * g0[1]).sqrt();
    entries.push(ValidationEntry {
        check: "gradient vanishes at the origin".into(),
        pass: g0n <= 1e-12,
        worst: g0n,
        tolerance: 1e-12,
    });

    // Midpoint convexity: f((a+b)/2) <= (f(a)+f(b))/2 up to roundoff.
    let mut worst_convex = f64::NEG_INFINITY;
    for _ in 0..samples {
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        let m = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
        let slack = patch.height(m) - 0.5 * (patch.height(a) + patch.height(b));
        worst_convex = worst_convex.max(slack);
    }
    entries.push(ValidationEntry {
        check: "midpoint convexity".into(),
        pass: worst_convex <= 1e-10,
        worst: worst_convex,
        tolerance: 1e-10,
    });

    // Cutoff vanishes outside the boundary sphere. Scales stay strictly
    // above 1 so roundoff in cos²+sin² cannot pull a sample back inside.
    let mut worst_cut: f64 = 0.0;
    for i in 0..64 {
        let theta = std::f64::consts::TAU * (i as f64) / 64.0;
        for scale in [1.0001, 1.01, 1.5] {
            let x = match patch.n {
                1 => [patch.r0 * scale * if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0],
                _ => [
                    patch.r0 * scale * theta.cos(),
                    patch.r0 * scale * theta.sin(),
                ],
            };
            worst_cut = worst_cut.max(patch.cutoff(x).abs());
        }
    }
    entries.push(ValidationEntry {
        check: "cutoff supported inside the patch".into(),
        pass: worst_cut == 0.0,
        worst: worst_cut,
        tolerance: 0.0,
    });

    // Central finite differences against the supplied gradient.
    let h = 6e-6 * patch.r0.max(1.0);
    let mut worst_grad: f64 = 0.0;
    for _ in 0..samples {
        let mut x = draw(&mut rng);
        // Keep the stencil inside the domain.
        for c in x.iter_mut().take(patch.n) {
            *c *= 0.99;
        }
        let g = patch.gradient(x);
        for axis in 0..patch.n {
            let mut xp = x;
            let mut xm = x;
            xp[axis] += h;
            xm[axis] -= h;
            if !patch.in_domain(xp) || !patch.in_domain(xm) {
                continue;
            }
            let fd = (patch.height(xp) - patch.height(xm)) / (2.0 * h);
            let scale = g[axis].abs().max(1.0);
            worst_grad = worst_grad.max((fd - g[axis]).abs() / scale);
        }
    }
    entries.push(ValidationEntry {
        check: "gradient matches finite differences".into(),
        pass: worst_grad <= 1e-6,
        worst: worst_grad,
        tolerance: 1e-6,
    });

    Ok(ValidationReport { entries })
}
