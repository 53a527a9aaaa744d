//! Two-dimensional transforms by level-set reduction.
//!
//! For a fixed direction v the patch integral ∫ e^{−itΦ(x)} A(x) dx with
//! Φ(x) = v·(x, f(x)) collapses to the one-dimensional integral
//! ∫ ρ(s) e^{−its} ds, where ρ is the co-area density of A over the level
//! curves of Φ. The density is a pure geometry object — independent of t —
//! so it is resolved once into piecewise Chebyshev form and every frequency
//! on the same direction reuses it. The cache is stored in the variable
//! w = √(s − s_min), which straightens the square-root behaviour of ρ at the
//! tangent height.

use std::cell::Cell;

use num_complex::Complex64;

use crate::geometry;
use crate::surface::{ConvexPatch, Direction, ScalarFn};
use crate::Result;

use super::engine::{self, MonotoneSegment, PanelSettings};
use super::gauss;

const CHEB_N: usize = 24;
const TWO_PI: f64 = std::f64::consts::TAU;

struct ChebPanel {
    a: f64,
    b: f64,
    coef: [f64; CHEB_N],
}

impl ChebPanel {
    fn eval(&self, w: f64) -> f64 {
        let xi = (2.0 * w - (self.a + self.b)) / (self.b - self.a);
        // Clenshaw recurrence.
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for k in (1..CHEB_N).rev() {
            let b0 = 2.0 * xi * b1 - b2 + self.coef[k];
            b2 = b1;
            b1 = b0;
        }
        xi * b1 - b2 + 0.5 * self.coef[0]
    }
}

/// Piecewise-Chebyshev model of ρ(s_min + w²) on w ∈ [0, √(s_max − s_min)].
pub(crate) struct DensityCache {
    pub smin: f64,
    pub srange: f64,
    panels: Vec<ChebPanel>,
    /// Absolute sup-norm bound for |model − ρ| observed during the build.
    pub sup_err: f64,
    pub build_evals: u64,
    /// ∫ ρ ds of the model (the A-weighted patch mass).
    pub mass: f64,
    /// Adaptivity hit a depth or width floor somewhere.
    pub truncated: bool,
}

/// Radial geometry of one (patch, direction) pair.
struct RadialProblem<'a> {
    patch: &'a ConvexPatch,
    amplitude: &'a ScalarFn,
    v: [f64; 3],
    x0: [f64; 2],
    evals: Cell<u64>,
    last_root: Cell<f64>,
    s_tol: f64,
}

impl<'a> RadialProblem<'a> {
    fn point(&self, omega: [f64; 2], r: f64) -> [f64; 2] {
        [self.x0[0] + r * omega[0], self.x0[1] + r * omega[1]]
    }

    fn phase_at(&self, omega: [f64; 2], r: f64) -> f64 {
        self.evals.set(self.evals.get() + 1);
        self.patch.phase(self.point(omega, r), self.v)
    }

    fn slope_at(&self, omega: [f64; 2], r: f64) -> f64 {
        self.evals.set(self.evals.get() + 1);
        self.patch.phase_ray_derivative(self.x0, omega, r, self.v)
    }

    /// Distance from x0 to the patch boundary along ω.
    fn chord(&self, omega: [f64; 2]) -> f64 {
        let r0 = self.patch.r0();
        let proj = self.x0[0] * omega[0] + self.x0[1] * omega[1];
        let inside = r0 * r0 - (self.x0[0] * self.x0[0] + self.x0[1] * self.x0[1]);
        (-proj + (inside + proj * proj).max(0.0).sqrt()).max(0.0)
    }

    fn end_value(&self, theta: f64) -> f64 {
        let omega = [theta.cos(), theta.sin()];
        self.phase_at(omega, self.chord(omega))
    }

    /// Level crossing Φ(x0 + rω) = s, exploiting monotonicity along rays
    /// from the argmin. None when the level is not reached inside the patch.
    fn ray_root(&self, omega: [f64; 2], s: f64) -> Option<f64> {
        let cap = self.chord(omega);
        if cap <= 0.0 {
            return None;
        }
        let mut hi = cap;
        if self.phase_at(omega, hi) < s {
            return None;
        }
        let mut lo = 0.0;
        let mut r = self.last_root.get().clamp(1e-6 * cap, 0.999 * cap);
        for _ in 0..80 {
            let fr = self.phase_at(omega, r) - s;
            if fr.abs() <= self.s_tol {
                break;
            }
            if fr < 0.0 {
                lo = r;
            } else {
                hi = r;
            }
            let d = self.slope_at(omega, r);
            let mut next = if d > 0.0 { r - fr / d } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - r).abs() <= 1e-16 * cap {
                r = next;
                break;
            }
            r = next;
            if hi - lo <= 1e-15 * cap {
                break;
            }
        }
        self.last_root.set(r);
        Some(r)
    }

    /// Co-area integrand A(c)·r / (∇Φ·ω) at the level crossing, or 0 when
    /// the ray misses the level inside the patch or the carving rejects it.
    fn theta_integrand(&self, theta: f64, s: f64) -> f64 {
        let omega = [theta.cos(), theta.sin()];
        let Some(r) = self.ray_root(omega, s) else {
            return 0.0;
        };
        let c = self.point(omega, r);
        if !self.patch.in_carved_domain(c) {
            return 0.0;
        }
        let d = self.slope_at(omega, r);
        self.evals.set(self.evals.get() + 1);
        let a = (self.amplitude)(c);
        if a == 0.0 {
            return 0.0;
        }
        a * r / d.max(1e-300)
    }

    fn carving_ok(&self, theta: f64, s: f64) -> bool {
        let omega = [theta.cos(), theta.sin()];
        match self.ray_root(omega, s) {
            Some(r) => self.patch.in_carved_domain(self.point(omega, r)),
            None => false,
        }
    }

    /// θ-arcs (within [lo, hi]) on which `pred` holds, edges bisected to
    /// ~1e−12. `pred` must be piecewise-boolean with finitely many flips.
    fn boolean_arcs(
        &self,
        lo: f64,
        hi: f64,
        samples: usize,
        pred: &dyn Fn(f64) -> bool,
    ) -> Vec<(f64, f64)> {
        let n = samples.max(8);
        let step = (hi - lo) / n as f64;
        let probes: Vec<(f64, bool)> = (0..=n)
            .map(|i| {
                let th = if i == n { hi } else { lo + step * i as f64 };
                (th, pred(th))
            })
            .collect();
        let mut edges: Vec<(f64, bool)> = Vec::new(); // (location, state after)
        for pair in probes.windows(2) {
            let (t0, b0) = pair[0];
            let (t1, b1) = pair[1];
            if b0 != b1 {
                let (mut a, mut b) = (t0, t1);
                for _ in 0..45 {
                    let m = 0.5 * (a + b);
                    if pred(m) == b0 {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                edges.push((0.5 * (a + b), b1));
            }
        }
        let mut arcs = Vec::new();
        let mut open = if probes[0].1 { Some(lo) } else { None };
        for (at, state_after) in edges {
            match (open, state_after) {
                (None, true) => open = Some(at),
                (Some(start), false) => {
                    arcs.push((start, at));
                    open = None;
                }
                _ => {}
            }
        }
        if let Some(start) = open {
            arcs.push((start, hi));
        }
        arcs
    }

    /// ρ(s) with an absolute error estimate from the θ-adaptivity.
    fn rho(&self, s: f64, tol_abs: f64) -> (f64, f64) {
        // Which rays reach level s inside the patch.
        let reach = |theta: f64| self.end_value(theta) >= s;
        let full = (0..48).all(|i| reach(TWO_PI * (i as f64 + 0.5) / 48.0));
        let mut arcs = if full {
            vec![(-std::f64::consts::PI, std::f64::consts::PI)]
        } else {
            self.boolean_arcs(0.0, TWO_PI, 48, &reach)
        };
        if !self.patch.carving().is_empty() {
            let mut carved = Vec::new();
            for (a, b) in arcs {
                carved.extend(self.boolean_arcs(a, b, 48, &|th| self.carving_ok(th, s)));
            }
            arcs = carved;
        }

        let mut value = 0.0;
        let mut err = 0.0;
        let (nodes, weights) = gauss::rule(12);
        let gl = |a: f64, b: f64| -> f64 {
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            nodes
                .iter()
                .zip(weights)
                .map(|(x, w)| w * self.theta_integrand(mid + half * x, s))
                .sum::<f64>()
                * half
        };
        for (a, b) in arcs {
            if b - a <= 1e-14 {
                continue;
            }
            let pieces = (((b - a) / (TWO_PI / 16.0)).ceil() as usize).clamp(4, 64);
            let mut stack: Vec<(f64, f64, f64, u32)> = Vec::new();
            for k in (0..pieces).rev() {
                let pa = a + (b - a) * k as f64 / pieces as f64;
                let pb = a + (b - a) * (k + 1) as f64 / pieces as f64;
                stack.push((pa, pb, gl(pa, pb), 0));
            }
            while let Some((pa, pb, whole, depth)) = stack.pop() {
                let pm = 0.5 * (pa + pb);
                let left = gl(pa, pm);
                let right = gl(pm, pb);
                let diff = (whole - (left + right)).abs();
                let budget = tol_abs * ((pb - pa) / (b - a)).max(0.05);
                if diff <= budget || depth >= 11 {
                    value += left + right;
                    err += diff;
                } else {
                    stack.push((pm, pb, right, depth + 1));
                    stack.push((pa, pm, left, depth + 1));
                }
            }
        }
        (value, err)
    }
}

fn cheb_nodes() -> [f64; CHEB_N] {
    let mut xs = [0.0; CHEB_N];
    for (j, x) in xs.iter_mut().enumerate() {
        *x = (std::f64::consts::PI * (2 * j + 1) as f64 / (2 * CHEB_N) as f64).cos();
    }
    xs
}

fn cheb_coefficients(values: &[f64; CHEB_N]) -> [f64; CHEB_N] {
    let mut coef = [0.0; CHEB_N];
    for (k, c) in coef.iter_mut().enumerate() {
        let mut s = 0.0;
        for (j, v) in values.iter().enumerate() {
            s += v * (std::f64::consts::PI * k as f64 * (2 * j + 1) as f64
                / (2 * CHEB_N) as f64)
                .cos();
        }
        *c = 2.0 * s / CHEB_N as f64;
    }
    coef
}

impl DensityCache {
    /// Resolve the density for `patch` (with carving) against the effective
    /// amplitude `A`, along direction `v`.
    pub(crate) fn build(patch: &ConvexPatch, amplitude: &ScalarFn, v: &Direction) -> Result<Self> {
        let support = geometry::support_min(patch, v)?;
        let smax = geometry::support_max(patch, v)?;
        let smin = support.s;
        let srange = (smax - smin).max(1e-300);
        let w_max = srange.sqrt();
        let s_scale = smin.abs().max(srange).max(1e-9);
        // Keep the ray origin inside the closed disk against roundoff.
        let mut x0 = support.x0;
        let nr = (x0[0] * x0[0] + x0[1] * x0[1]).sqrt();
        if nr > patch.r0() {
            let shrink = patch.r0() / nr;
            x0 = [x0[0] * shrink, x0[1] * shrink];
        }

        let prob = RadialProblem {
            patch,
            amplitude,
            v: v.raw(),
            x0,
            evals: Cell::new(0),
            last_root: Cell::new(0.1 * patch.r0()),
            s_tol: 1e-13 * s_scale,
        };

        // Pilot scale for the absolute tolerance.
        let mut scale: f64 = 0.0;
        for i in 0..9 {
            let w = w_max * (i as f64 + 0.5) / 9.0;
            let (val, _) = prob.rho(smin + w * w, 1e-6);
            scale = scale.max(val.abs());
        }
        let tol_abs = (1e-10 * scale).max(1e-14);

        let xs = cheb_nodes();
        let mut panels: Vec<ChebPanel> = Vec::new();
        let mut sup_err: f64 = 0.0;
        let mut truncated = false;
        let mut stack: Vec<(f64, f64, u32)> = vec![(0.0, w_max, 0)];
        while let Some((a, b, depth)) = stack.pop() {
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            let mut vals = [0.0; CHEB_N];
            let mut theta_err: f64 = 0.0;
            for (j, xi) in xs.iter().enumerate() {
                let w = mid + half * xi;
                let (val, err) = prob.rho(smin + w * w, tol_abs);
                vals[j] = val;
                theta_err = theta_err.max(err);
            }
            let coef = cheb_coefficients(&vals);
            let tail: f64 = coef[CHEB_N - 4..].iter().map(|c| c.abs()).sum();
            let panel = ChebPanel { a, b, coef };
            // Off-node probes guard against aliasing through the nodes.
            let mut probe_err: f64 = 0.0;
            for xi in [-0.71, 0.13, 0.82] {
                let w = mid + half * xi;
                let (val, _) = prob.rho(smin + w * w, tol_abs);
                probe_err = probe_err.max((val - panel.eval(w)).abs());
            }
            let panel_err = tail.max(probe_err) + theta_err;
            if panel_err <= 4.0 * tol_abs || depth >= 15 || (b - a) <= 1e-7 * w_max {
                if panel_err > 4.0 * tol_abs {
                    truncated = true;
                }
                sup_err = sup_err.max(panel_err);
                panels.push(panel);
            } else {
                stack.push((mid, b, depth + 1));
                stack.push((a, mid, depth + 1));
            }
        }
        panels.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap());

        // Mass of the model: ∫ ρ ds = ∫ 2w ρ̂(w) dw, panelwise Gauss of a
        // degree ≤ 24 polynomial times 2w — order 32 is exact.
        let (nodes, weights) = gauss::rule(32);
        let mut mass = 0.0;
        for p in &panels {
            let mid = 0.5 * (p.a + p.b);
            let half = 0.5 * (p.b - p.a);
            let mut s = 0.0;
            for (x, w) in nodes.iter().zip(weights) {
                let wx = mid + half * x;
                s += w * 2.0 * wx * p.eval(wx);
            }
            mass += s * half;
        }

        Ok(DensityCache {
            smin,
            srange,
            panels,
            sup_err,
            build_evals: prob.evals.get(),
            mass,
            truncated,
        })
    }

    /// ∫ ρ(s) ds over [lo, hi] ∩ [smin, smax] from the cached model.
    pub(crate) fn band_mass(&self, lo: f64, hi: f64) -> f64 {
        let wa = (lo - self.smin).clamp(0.0, self.srange).sqrt();
        let wb = (hi - self.smin).clamp(0.0, self.srange).sqrt();
        if wb <= wa {
            return 0.0;
        }
        let (nodes, weights) = gauss::rule(32);
        let mut total = 0.0;
        for p in &self.panels {
            let a = p.a.max(wa);
            let b = p.b.min(wb);
            if b <= a {
                continue;
            }
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            let mut s = 0.0;
            for (x, w) in nodes.iter().zip(weights) {
                let wx = mid + half * x;
                s += w * 2.0 * wx * p.eval(wx);
            }
            total += s * half;
        }
        total
    }

    pub(crate) fn interp(&self, w: f64) -> f64 {
        let idx = self
            .panels
            .partition_point(|p| p.b < w)
            .min(self.panels.len() - 1);
        self.panels[idx].eval(w.clamp(self.panels[idx].a, self.panels[idx].b))
    }

    /// ∫ ρ(s) e^{−its} ds from the cached model; `t ≥ 0`.
    pub(crate) fn transform(&self, t: f64, budget: u64) -> engine::PanelOutcome {
        let phase = |w: f64| t * w * w;
        let integrand =
            |w: f64| Complex64::new(0.0, -t * w * w).exp() * (2.0 * w * self.interp(w));
        let segments: Vec<MonotoneSegment<'_>> = self
            .panels
            .iter()
            .map(|p| MonotoneSegment {
                a: p.a,
                b: p.b,
                phase: &phase,
                integrand: &integrand,
            })
            .collect();
        let settings = PanelSettings {
            min_panels: 1,
            min_order: 24,
            budget,
            ..Default::default()
        };
        let mut out = engine::integrate_segments(&segments, &settings);
        let rot = Complex64::new(0.0, -t * self.smin).exp();
        out.value *= rot;
        out.coarse *= rot;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::catalog::{make_catalog_patch, PatchConfig};

    fn paraboloid() -> ConvexPatch {
        make_catalog_patch(&PatchConfig {
            name: "paraboloid".into(),
            r0: Some(1.0),
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn density_mass_matches_cutoff_integral() {
        // ∫∫ (1−|x|²)³ dx over the unit disk = π/4.
        let patch = paraboloid();
        let v = Direction::new(&[0.0, 0.0, 1.0]).unwrap();
        let amp = patch_cutoff(&patch);
        let cache = DensityCache::build(&patch, &amp, &v).unwrap();
        let want = std::f64::consts::PI / 4.0;
        assert!(
            (cache.mass - want).abs() < 1e-9,
            "mass {} vs {want}",
            cache.mass
        );
        assert!(cache.sup_err < 1e-7);
    }

    fn patch_cutoff(patch: &ConvexPatch) -> ScalarFn {
        let p = patch.clone();
        std::sync::Arc::new(move |x| p.cutoff(x))
    }

    #[test]
    fn tilted_direction_covers_boundary_argmin() {
        // Direction far outside the normal cone: the argmin sits on the rim
        // and the window is a partial arc; the mass must still equal the
        // cutoff integral.
        let patch = paraboloid();
        let v = Direction::new(&[0.9, 0.1, 0.05]).unwrap();
        let amp = patch_cutoff(&patch);
        let cache = DensityCache::build(&patch, &amp, &v).unwrap();
        let want = std::f64::consts::PI / 4.0;
        assert!(
            (cache.mass - want).abs() < 1e-8,
            "mass {} vs {want}",
            cache.mass
        );
    }

    #[test]
    fn transform_at_zero_frequency_is_mass() {
        let patch = paraboloid();
        let v = Direction::new(&[0.0, 0.0, 1.0]).unwrap();
        let amp = patch_cutoff(&patch);
        let cache = DensityCache::build(&patch, &amp, &v).unwrap();
        let out = cache.transform(0.0, 1 << 30);
        assert!((out.value.re - cache.mass).abs() < 1e-10);
        assert!(out.value.im.abs() < 1e-12);
    }

    #[test]
    fn carved_half_disk_has_half_mass() {
        let patch = paraboloid().with_carving(vec![std::sync::Arc::new(|x: [f64; 2]| x[0])]);
        let v = Direction::new(&[0.0, 0.0, 1.0]).unwrap();
        let amp = patch_cutoff(&patch);
        let cache = DensityCache::build(&patch, &amp, &v).unwrap();
        let want = std::f64::consts::PI / 8.0;
        assert!(
            (cache.mass - want).abs() < 1e-7,
            "mass {} vs {want}",
            cache.mass
        );
    }
}
