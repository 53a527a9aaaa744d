//! Support minima, slab measures, dyadic majorants and decay fits — the
//! geometric side of the decay estimates.
//!
//! The central quantity is the measure of a slab {lo ≤ v·(x, f(x)) ≤ hi}
//! with respect to the surface measure of a patch (or of a whole closed
//! body, weighted by its partition of unity). One-dimensional slabs are
//! integrated directly between bisected level crossings; two-dimensional
//! slabs integrate the same co-area density model that the transforms use,
//! built here with the bare area element as amplitude.

pub mod fit;

pub use fit::{fit_power_law, DecayProfile};

use std::sync::Arc;

use crate::linalg;
use crate::oscillatory::levelset::DensityCache;
use crate::surface::{AmbientFn, ClosedBody, ConvexPatch, Direction, ScalarFn};
use crate::{Error, Result};

/// Minimum of the phase x ↦ v·(x, f(x)) over the closed patch disk.
#[derive(Clone, Copy, Debug)]
pub struct SupportResult {
    pub s: f64,
    pub x0: [f64; 2],
    pub at_boundary: bool,
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-13 * (1.0 + a.abs() + b.abs()) {
            break;
        }
    }
    let m = 0.5 * (a + b);
    (m, f(m))
}

/// s(v) = min over the closed disk of the phase, with its argmin.
pub fn support_min(patch: &ConvexPatch, v: &Direction) -> Result<SupportResult> {
    if v.dim() != patch.dim() {
        return Err(Error::Parameter(format!(
            "direction dimension {} does not match patch dimension {}",
            v.dim(),
            patch.dim()
        )));
    }
    let r0 = patch.r0();
    let vraw = v.raw();
    let phi = |x: [f64; 2]| patch.phase(x, vraw);
    match patch.n() {
        1 => {
            let height = v.height_component();
            if height > 0.0 {
                // Convex in x: golden section.
                let f = |x: f64| phi([x, 0.0]);
                let (x, s) = golden_min(&f, -r0, r0);
                // An endpoint can win when the interior stationary point
                // lies outside the patch.
                let (se, xe) = if f(-r0) <= f(r0) {
                    (f(-r0), -r0)
                } else {
                    (f(r0), r0)
                };
                if se < s {
                    return Ok(SupportResult {
                        s: se,
                        x0: [xe, 0.0],
                        at_boundary: true,
                    });
                }
                Ok(SupportResult {
                    s,
                    x0: [x, 0.0],
                    at_boundary: x.abs() >= r0 * (1.0 - 1e-9),
                })
            } else {
                // Concave or linear phase: the minimum sits at an endpoint.
                let (fl, fr) = (phi([-r0, 0.0]), phi([r0, 0.0]));
                let (s, x) = if fl <= fr { (fl, -r0) } else { (fr, r0) };
                Ok(SupportResult {
                    s,
                    x0: [x, 0.0],
                    at_boundary: true,
                })
            }
        }
        _ => {
            // Boundary candidate: scan the rim, then refine the best arc.
            let m = 4096;
            let ring = |theta: f64| phi([r0 * theta.cos(), r0 * theta.sin()]);
            let mut best_i = 0;
            let mut best = f64::INFINITY;
            for i in 0..m {
                let val = ring(std::f64::consts::TAU * i as f64 / m as f64);
                if val < best {
                    best = val;
                    best_i = i;
                }
            }
            let step = std::f64::consts::TAU / m as f64;
            let center = step * best_i as f64;
            let (theta, s_ring) = golden_min(&ring, center - step, center + step);
            let mut result = SupportResult {
                s: s_ring,
                x0: [r0 * theta.cos(), r0 * theta.sin()],
                at_boundary: true,
            };

            if v.height_component() > 0.0 {
                // Convex phase: grid bracket plus projected descent can beat
                // the rim.
                let grid = 64;
                let mut x = [0.0, 0.0];
                let mut fx = phi(x);
                for i in 0..=grid {
                    for j in 0..=grid {
                        let p = [
                            -r0 + 2.0 * r0 * i as f64 / grid as f64,
                            -r0 + 2.0 * r0 * j as f64 / grid as f64,
                        ];
                        if p[0] * p[0] + p[1] * p[1] <= r0 * r0 {
                            let val = phi(p);
                            if val < fx {
                                fx = val;
                                x = p;
                            }
                        }
                    }
                }
                let grad_phi = |p: [f64; 2]| {
                    let g = patch.gradient(p);
                    [
                        vraw[0] + vraw[2] * g[0],
                        vraw[1] + vraw[2] * g[1],
                    ]
                };
                let project = |p: [f64; 2]| {
                    let nr = (p[0] * p[0] + p[1] * p[1]).sqrt();
                    if nr > r0 {
                        [p[0] * r0 / nr, p[1] * r0 / nr]
                    } else {
                        p
                    }
                };
                let mut g = grad_phi(x);
                let mut eta = 0.25 * r0 / (g[0] * g[0] + g[1] * g[1]).sqrt().max(1e-14);
                for _ in 0..400 {
                    let mut trial = project([x[0] - eta * g[0], x[1] - eta * g[1]]);
                    let mut ft = phi(trial);
                    let mut shrink = 0;
                    while ft > fx && shrink < 60 {
                        eta *= 0.5;
                        trial = project([x[0] - eta * g[0], x[1] - eta * g[1]]);
                        ft = phi(trial);
                        shrink += 1;
                    }
                    let dx = (trial[0] - x[0]).abs() + (trial[1] - x[1]).abs();
                    if ft <= fx {
                        x = trial;
                        fx = ft;
                        g = grad_phi(x);
                        eta *= 1.9;
                    }
                    if dx < 1e-13 * r0 {
                        break;
                    }
                }
                if fx < result.s {
                    result = SupportResult {
                        s: fx,
                        x0: x,
                        at_boundary: (x[0] * x[0] + x[1] * x[1]).sqrt() >= r0 * (1.0 - 1e-9),
                    };
                }
            }
            Ok(result)
        }
    }
}

/// Maximum of the phase over the closed patch disk.
pub fn support_max(patch: &ConvexPatch, v: &Direction) -> Result<f64> {
    Ok(-support_min(patch, &v.negated())?.s)
}

fn gl_sum(f: &dyn Fn(f64) -> f64, a: f64, b: f64, order: usize) -> f64 {
    let (nodes, weights) = crate::oscillatory::gauss::rule(order);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    half * nodes
        .iter()
        .zip(weights)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
}

/// {x : Φ(x) ≤ c} for a convex Φ on [-r0, r0], as an interval.
fn sublevel_interval(
    phi: &dyn Fn(f64) -> f64,
    r0: f64,
    x_min: f64,
    f_min: f64,
    c: f64,
) -> Option<(f64, f64)> {
    if c < f_min {
        return None;
    }
    let side = |mut lo: f64, mut hi: f64, rising_out: bool| -> f64 {
        // Boundary of {Φ ≤ c} between x_min and an endpoint.
        let end = if rising_out { hi } else { lo };
        if phi(end) <= c {
            return end;
        }
        for _ in 0..90 {
            let m = 0.5 * (lo + hi);
            if phi(m) <= c {
                if rising_out {
                    lo = m;
                } else {
                    hi = m;
                }
            } else if rising_out {
                hi = m;
            } else {
                lo = m;
            }
        }
        0.5 * (lo + hi)
    };
    let a = side(-r0, x_min, false);
    let b = side(x_min, r0, true);
    Some((a, b))
}

/// Amplitude mass of {lo ≤ Φ ≤ hi} on a segment patch, split at kink points.
fn line_band_mass(
    patch: &ConvexPatch,
    dir: &Direction,
    lo: f64,
    hi: f64,
    amplitude: &dyn Fn(f64) -> f64,
) -> Result<f64> {
    let r0 = patch.r0();
    let (cdir, mirrored) = dir.canonical();
    let (lo, hi) = if mirrored { (-hi, -lo) } else { (lo, hi) };
    let vraw = cdir.raw();
    let phi = |x: f64| patch.phase([x, 0.0], vraw);
    let (x_min, f_min) = if cdir.height_component() > 0.0 {
        let (x, s) = golden_min(&phi, -r0, r0);
        let (se, xe) = if phi(-r0) <= phi(r0) {
            (phi(-r0), -r0)
        } else {
            (phi(r0), r0)
        };
        if se < s {
            (xe, se)
        } else {
            (x, s)
        }
    } else if phi(-r0) <= phi(r0) {
        (-r0, phi(-r0))
    } else {
        (r0, phi(r0))
    };
    let Some((a_hi, b_hi)) = sublevel_interval(&phi, r0, x_min, f_min, hi) else {
        return Ok(0.0);
    };
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    if lo <= f_min {
        intervals.push((a_hi, b_hi));
    } else if let Some((a_lo, b_lo)) = sublevel_interval(&phi, r0, x_min, f_min, lo) {
        if a_lo > a_hi {
            intervals.push((a_hi, a_lo));
        }
        if b_hi > b_lo {
            intervals.push((b_lo, b_hi));
        }
    } else {
        intervals.push((a_hi, b_hi));
    }
    // Carved patches (union bodies) only count the exposed part.
    for g in patch.carving() {
        let neg = crate::oscillatory::negativity_intervals(&|x| g([x, 0.0]), r0);
        intervals = crate::oscillatory::intersect_intervals(&intervals, &neg);
    }
    let mut total = 0.0;
    for (a, b) in intervals {
        if b <= a {
            continue;
        }
        let mut cuts: Vec<f64> = patch
            .cutoff_kinks()
            .iter()
            .copied()
            .filter(|k| *k > a && *k < b)
            .collect();
        cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
        cuts.push(b);
        let mut left = a;
        for right in cuts {
            let pieces = (((right - left) / (0.2 * r0)).ceil() as usize).max(1);
            for i in 0..pieces {
                let pa = left + (right - left) * i as f64 / pieces as f64;
                let pb = left + (right - left) * (i + 1) as f64 / pieces as f64;
                total += gl_sum(amplitude, pa, pb, 32);
            }
            left = right;
        }
    }
    Ok(total)
}

enum ProfileInner {
    Line(ConvexPatch),
    Radial { cache: DensityCache },
}

/// Reusable slab-measure model of one patch along one direction: the build
/// cost is paid once, after which bands are read off the cached density.
pub struct SlabProfile {
    dir: Direction,
    mirrored: bool,
    smin: f64,
    smax: f64,
    inner: ProfileInner,
}

impl SlabProfile {
    pub fn new(patch: &ConvexPatch, v: &Direction) -> Result<Self> {
        if v.dim() != patch.dim() {
            return Err(Error::Parameter(format!(
                "direction dimension {} does not match patch dimension {}",
                v.dim(),
                patch.dim()
            )));
        }
        let bare = patch.clone().with_carving(Vec::new());
        let (cdir, mirrored) = v.canonical();
        let (smin_c, smax_c, inner) = match patch.n() {
            1 => {
                let smin = support_min(&bare, &cdir)?.s;
                let smax = support_max(&bare, &cdir)?;
                (smin, smax, ProfileInner::Line(bare))
            }
            _ => {
                let p = bare.clone();
                let area: ScalarFn = Arc::new(move |x| p.area_element(x));
                let cache = DensityCache::build(&bare, &area, &cdir)?;
                (cache.smin, cache.smin + cache.srange, ProfileInner::Radial { cache })
            }
        };
        let (smin, smax) = if mirrored {
            (-smax_c, -smin_c)
        } else {
            (smin_c, smax_c)
        };
        Ok(SlabProfile {
            dir: cdir,
            mirrored,
            smin,
            smax,
            inner,
        })
    }

    /// Support range [s(v)-min, s-max] of the patch along the original
    /// direction.
    pub fn range(&self) -> (f64, f64) {
        (self.smin, self.smax)
    }

    /// Surface measure of {lo ≤ v·(x, f(x)) ≤ hi} within the patch disk.
    pub fn measure(&self, lo: f64, hi: f64) -> Result<f64> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Parameter(format!("bad slab interval [{lo}, {hi}]")));
        }
        let (lo, hi) = if self.mirrored { (-hi, -lo) } else { (lo, hi) };
        match &self.inner {
            ProfileInner::Line(patch) => {
                let p = patch.clone();
                line_band_mass(patch, &self.dir, lo, hi, &move |x: f64| {
                    p.area_element([x, 0.0])
                })
            }
            ProfileInner::Radial { cache } => Ok(cache.band_mass(lo, hi)),
        }
    }
}

/// One-shot slab measure; sweeps should hold a [`SlabProfile`] instead.
pub fn slab_measure(patch: &ConvexPatch, v: &Direction, lo: f64, hi: f64) -> Result<f64> {
    SlabProfile::new(patch, v)?.measure(lo, hi)
}

enum BandTerm {
    Line {
        patch: ConvexPatch,
        dir: Direction,
        offset: f64,
    },
    Radial {
        cache: DensityCache,
        offset: f64,
        mirrored: bool,
    },
}

impl BandTerm {
    fn range(&self) -> Result<(f64, f64)> {
        match self {
            BandTerm::Line { patch, dir, offset } => {
                let smin = support_min(patch, dir)?.s + offset;
                let smax = support_max(patch, dir)? + offset;
                Ok((smin, smax))
            }
            BandTerm::Radial {
                cache,
                offset,
                mirrored,
            } => {
                let (a, b) = (cache.smin, cache.smin + cache.srange);
                Ok(if *mirrored {
                    (-b + offset, -a + offset)
                } else {
                    (a + offset, b + offset)
                })
            }
        }
    }

    fn measure(&self, lo: f64, hi: f64) -> Result<f64> {
        match self {
            BandTerm::Line { patch, dir, offset } => {
                let p = patch.clone();
                line_band_mass(patch, dir, lo - offset, hi - offset, &move |x: f64| {
                    p.cutoff([x, 0.0])
                })
            }
            BandTerm::Radial {
                cache,
                offset,
                mirrored,
            } => {
                let (a, b) = if *mirrored {
                    (-(hi - offset), -(lo - offset))
                } else {
                    (lo - offset, hi - offset)
                };
                Ok(cache.band_mass(a, b))
            }
        }
    }
}

/// Slab measures of a whole closed body: per-patch terms weighted by the
/// partition of unity, so bands add up to the full boundary measure.
pub struct BodySlab {
    terms: Vec<BandTerm>,
    smin: f64,
    smax: f64,
}

impl BodySlab {
    pub fn new(body: &ClosedBody, v: &Direction) -> Result<Self> {
        let n = body.n();
        if v.dim() != n + 1 {
            return Err(Error::Parameter(format!(
                "direction dimension {} does not match boundary dimension {}",
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
        let one: AmbientFn = Arc::new(|_| 1.0);
        let v3 = {
            let mut out = [0.0; 3];
            out[..v.dim()].copy_from_slice(v.components());
            out
        };
        let mut terms = Vec::new();
        let mut smin = f64::INFINITY;
        let mut smax = f64::NEG_INFINITY;
        for k in 0..body.patch_count() {
            let placed = body.placed(k);
            let local = linalg::mat_tvec(&placed.frame, v3);
            let offset = linalg::dot3(v3, placed.translation);
            let ldir = Direction::new(&local[..n + 1])?;
            let epatch = body.effective_patch(k, &one);
            let term = match n {
                1 => BandTerm::Line {
                    patch: epatch,
                    dir: ldir,
                    offset,
                },
                _ => {
                    let (cdir, mirrored) = ldir.canonical();
                    let cache = DensityCache::build(&epatch, &epatch.cutoff_arc(), &cdir)?;
                    BandTerm::Radial {
                        cache,
                        offset,
                        mirrored,
                    }
                }
            };
            let (a, b) = term.range()?;
            smin = smin.min(a);
            smax = smax.max(b);
            terms.push(term);
        }
        Ok(BodySlab { terms, smin, smax })
    }

    /// Support range of the body boundary along the direction.
    pub fn range(&self) -> (f64, f64) {
        (self.smin, self.smax)
    }

    /// Boundary measure of {lo ≤ v·y ≤ hi}.
    pub fn measure(&self, lo: f64, hi: f64) -> Result<f64> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Parameter(format!("bad slab interval [{lo}, {hi}]")));
        }
        let mut total = 0.0;
        for term in &self.terms {
            total += term.measure(lo, hi)?;
        }
        Ok(total)
    }
}

/// Suggested dyadic depth so that 2^{j_max}/t covers a height range.
pub fn dyadic_j_max(range: f64, t: f64) -> u32 {
    if !(range > 0.0 && t > 0.0) {
        return 1;
    }
    ((range * t).log2().ceil() as i64 + 1).clamp(1, 200) as u32
}

/// Head slab m([s, s+1/t]) and the dyadic tail Σ 2^{−j} m([s+2^{j−1}/t,
/// s+2^j/t]); `j_max` must be deep enough for the last band to clear the
/// patch height range.
pub fn dyadic_rhs_from(profile: &SlabProfile, t: f64, j_max: u32) -> Result<(f64, f64)> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Parameter(format!("frequency must be positive, got {t}")));
    }
    if j_max == 0 {
        return Err(Error::Parameter("dyadic depth must be at least 1".into()));
    }
    let (s, smax) = profile.range();
    if 2f64.powi(j_max as i32) / t < smax - s {
        return Err(Error::Parameter(format!(
            "dyadic depth {j_max} stops short of the height range {:.3e} at t={t}",
            smax - s
        )));
    }
    let head = profile.measure(s, s + 1.0 / t)?;
    let mut tail = 0.0;
    for j in 1..=j_max {
        let lo = s + 2f64.powi(j as i32 - 1) / t;
        let hi = s + 2f64.powi(j as i32) / t;
        tail += 2f64.powi(-(j as i32)) * profile.measure(lo, hi)?;
    }
    Ok((head, tail))
}

/// One-shot form of [`dyadic_rhs_from`].
pub fn dyadic_rhs(patch: &ConvexPatch, v: &Direction, t: f64, j_max: u32) -> Result<(f64, f64)> {
    dyadic_rhs_from(&SlabProfile::new(patch, v)?, t, j_max)
}

/// a(v, t): the largest boundary measure among slabs of width 1/t, located
/// by a coarse sweep (tangent slabs included) plus golden refinement.
pub fn max_slab(body: &ClosedBody, v: &Direction, t: f64) -> Result<f64> {
    let slab = BodySlab::new(body, v)?;
    max_slab_from(&slab, t)
}

/// [`max_slab`] against a prebuilt body profile.
pub fn max_slab_from(slab: &BodySlab, t: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Parameter(format!("frequency must be positive, got {t}")));
    }
    let w = 1.0 / t;
    let (smin, smax) = slab.range();
    if w >= smax - smin {
        return slab.measure(smin, smax);
    }
    let span = (smax - smin) - w;
    let m = 256;
    let mut best = 0.0f64;
    let mut best_i = 0usize;
    for i in 0..m {
        let s = smin + span * i as f64 / (m - 1) as f64;
        let val = slab.measure(s, s + w)?;
        if val > best {
            best = val;
            best_i = i;
        }
    }
    let lo = smin + span * (best_i.saturating_sub(1)) as f64 / (m - 1) as f64;
    let hi = smin + span * ((best_i + 1).min(m - 1)) as f64 / (m - 1) as f64;
    let neg = |s: f64| -> f64 { -slab.measure(s, s + w).unwrap_or(0.0) };
    let (_, refined_neg) = golden_min(&neg, lo, hi);
    Ok(best.max(-refined_neg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::catalog::{make_catalog_patch, PatchConfig};

    fn named(name: &str, p: Option<f64>, r0: f64) -> ConvexPatch {
        make_catalog_patch(&PatchConfig {
            name: name.into(),
            p,
            r0: Some(r0),
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn parabola_support_matches_closed_form() {
        // Φ = -x/2 + (√3/2)x²: minimum at x = 1/(2√3), s = -1/(8√3).
        let patch = named("power", Some(2.0), 1.0);
        let v = Direction::new(&[-0.5, 3f64.sqrt() / 2.0]).unwrap();
        let out = support_min(&patch, &v).unwrap();
        assert!((out.s + 1.0 / (8.0 * 3f64.sqrt())).abs() < 1e-12);
        assert!((out.x0[0] - 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-7);
        assert!(!out.at_boundary);

        // Steep tilt pushes the argmin onto the rim.
        let v = Direction::new(&[-0.95, 0.05]).unwrap();
        let out = support_min(&patch, &v).unwrap();
        assert!(out.at_boundary);
        assert!((out.x0[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn support_is_a_lower_bound_on_sampled_phases() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for name in ["paraboloid", "anisotropic", "sphere_cap"] {
            let patch = named(name, None, if name == "sphere_cap" { 0.83 } else { 1.0 });
            for _ in 0..20 {
                let v = Direction::new(&[
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(0.0..1.0f64).max(1e-3),
                ])
                .unwrap();
                let out = support_min(&patch, &v).unwrap();
                let mut grid_min = f64::INFINITY;
                let g = 300;
                for i in 0..=g {
                    for j in 0..=g {
                        let x = [
                            -patch.r0() + 2.0 * patch.r0() * i as f64 / g as f64,
                            -patch.r0() + 2.0 * patch.r0() * j as f64 / g as f64,
                        ];
                        if x[0] * x[0] + x[1] * x[1] <= patch.r0() * patch.r0() {
                            grid_min = grid_min.min(patch.phase(x, v.raw()));
                        }
                    }
                }
                assert!(
                    out.s <= grid_min + 1e-6,
                    "{name}: solver {} vs grid {grid_min}",
                    out.s
                );
            }
        }
    }

    #[test]
    fn parabola_slab_matches_closed_form() {
        // ∫ √(1+4x²) dx over |x| ≤ 0.1 = [x√(1+4x²)/2 + asinh(2x)/4]·2.
        let patch = named("power", Some(2.0), 1.0);
        let v = Direction::new(&[0.0, 1.0]).unwrap();
        let got = slab_measure(&patch, &v, 0.0, 0.01).unwrap();
        let x = 0.1f64;
        let want = 2.0 * (x * (1.0 + 4.0 * x * x).sqrt() / 2.0 + (2.0 * x).asinh() / 4.0);
        assert!((got - want).abs() < 1e-10, "got {got} want {want}");

        // Quartic flat point: width 2·(1e-4)^{1/4} = 0.2 with a negligible
        // arc correction.
        let quartic = named("power", Some(4.0), 1.0);
        let got = slab_measure(&quartic, &v, 0.0, 1e-4).unwrap();
        assert!((got - 0.2).abs() < 1e-5, "got {got}");
    }

    #[test]
    fn circle_cap_slab_is_an_arc() {
        let patch = named("circle_cap", None, 0.83);
        let v = Direction::new(&[0.0, 1.0]).unwrap();
        for t in [50.0, 1e6] {
            let got = slab_measure(&patch, &v, 0.0, 1.0 / t).unwrap();
            // Arc length of the unit circle up to height 1/t: 2·asin(x(t)),
            // x(t)² = 1-(1-1/t)².
            let x = (1.0 - (1.0 - 1.0 / t) * (1.0 - 1.0 / t)).sqrt();
            let want = 2.0 * x.asin();
            assert!(
                (got - want).abs() < 1e-9 * want.max(1.0),
                "t={t}: got {got} want {want}"
            );
        }
    }

    #[test]
    fn slab_is_monotone_and_additive() {
        let patch = named("paraboloid", None, 1.0);
        let v = Direction::new(&[0.3, -0.2, 0.93]).unwrap();
        let profile = SlabProfile::new(&patch, &v).unwrap();
        let (smin, smax) = profile.range();
        let mid = 0.5 * (smin + smax);
        let a = profile.measure(smin, mid).unwrap();
        let b = profile.measure(mid, smax).unwrap();
        let whole = profile.measure(smin, smax).unwrap();
        assert!((a + b - whole).abs() < 1e-9 * whole);
        let shorter = profile.measure(smin, mid - 0.1 * (smax - smin)).unwrap();
        assert!(shorter <= a + 1e-12);
        // Degenerate and out-of-range bands.
        assert_eq!(profile.measure(smax + 1.0, smax + 2.0).unwrap(), 0.0);
        assert!(profile.measure(1.0, 0.0).is_err());
    }

    #[test]
    fn mirrored_direction_reads_the_opposite_band() {
        let patch = named("paraboloid", None, 1.0);
        let up = Direction::new(&[0.2, 0.1, 0.97]).unwrap();
        let down = up.negated();
        let pu = SlabProfile::new(&patch, &up).unwrap();
        let pd = SlabProfile::new(&patch, &down).unwrap();
        let (a, b) = pu.range();
        let (c, d) = pd.range();
        assert!((a + d).abs() < 1e-12 && (b + c).abs() < 1e-12);
        let m1 = pu.measure(a, a + 0.05).unwrap();
        let m2 = pd.measure(-a - 0.05, -a).unwrap();
        assert!((m1 - m2).abs() < 1e-10);
    }

    #[test]
    fn body_slab_recovers_boundary_measures() {
        use crate::surface::body::{make_disk, make_ellipse, make_two_disk_union};
        let v = Direction::new(&[0.3, 0.95]).unwrap();
        let cases = [
            (make_disk().unwrap(), 2.0 * std::f64::consts::PI),
            (make_ellipse(1.0, 0.25).unwrap(), 4.289_210_887_577_662_7),
            // Exposed arcs of the union: 2/3 of each unit circle.
            (
                make_two_disk_union(0.5).unwrap(),
                8.0 * std::f64::consts::PI / 3.0,
            ),
        ];
        for (body, want) in cases {
            let slab = BodySlab::new(&body, &v).unwrap();
            let (a, b) = slab.range();
            let got = slab.measure(a, b).unwrap();
            assert!(
                (got - want).abs() < 1e-5 * want,
                "{}: {got} vs {want}",
                body.name()
            );
        }
    }

    #[test]
    fn max_slab_of_disk_is_the_tangent_cap() {
        use crate::surface::body::make_disk;
        let body = make_disk().unwrap();
        let v = Direction::new(&[0.0, 1.0]).unwrap();
        for t in [50.0, 1e6] {
            let got = max_slab(&body, &v, t).unwrap();
            // Cap of height 1/t on the unit circle.
            let want = 2.0 * (1.0 - 1.0 / t).acos();
            assert!(
                (got - want).abs() < 1e-6 * want,
                "t={t}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn dyadic_depth_is_validated() {
        let patch = named("power", Some(2.0), 1.0);
        let v = Direction::new(&[0.0, 1.0]).unwrap();
        let profile = SlabProfile::new(&patch, &v).unwrap();
        let (s, smax) = profile.range();
        let t = 100.0;
        assert!(dyadic_rhs_from(&profile, t, 1).is_err());
        let j = dyadic_j_max(smax - s, t);
        let (head, tail) = dyadic_rhs_from(&profile, t, j).unwrap();
        assert!(head > 0.0 && tail > 0.0);
        // The first dyadic band with weight 1/2 is bounded by the head band
        // measure scaled by monotonicity of slab widths.
        assert!(head <= profile.measure(s, smax).unwrap());
    }
}
