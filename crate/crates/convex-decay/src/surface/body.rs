//! Closed bodies assembled from placed graph patches.
//!
//! Each body's boundary is covered by patches positioned by a rigid motion,
//! and carries a partition of unity subordinate to that covering: the weight
//! of patch `k` at a boundary point is its bump value divided by the sum of
//! bump values of every patch whose graph passes through the point. A body
//! also knows its volume, and — for the lattice experiments — an exact
//! integer-arithmetic description of its lattice sections.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::linalg::{add3, mat_from_columns, mat_tvec, mat_vec, scale3, sub3, tangent_frame, Mat3, Vec3};
use crate::surface::catalog::{make_catalog_patch, PatchConfig};
use crate::surface::{AmbientFn, ConvexPatch, ScalarFn};
use crate::{Error, Result};

/// A patch positioned in ambient space: `world = frame · local + translation`,
/// where `local = (x, f(x))` padded to three components.
#[derive(Clone)]
pub struct PlacedPatch {
    pub patch: ConvexPatch,
    /// Columns are the local axes in world coordinates (orthogonal, possibly
    /// orientation-reversing). The local height axis points into the body.
    pub frame: Mat3,
    pub translation: Vec3,
}

impl PlacedPatch {
    pub fn world_point(&self, x: [f64; 2]) -> Vec3 {
        add3(mat_vec(&self.frame, self.patch.surface_point(x)), self.translation)
    }

    /// Split a world point into (tangential coordinates, height) in this
    /// patch's chart.
    fn local_split(&self, world: Vec3, n: usize) -> ([f64; 2], f64) {
        let l = mat_tvec(&self.frame, sub3(world, self.translation));
        match n {
            1 => ([l[0], 0.0], l[1]),
            _ => ([l[0], l[1]], l[2]),
        }
    }
}

struct BodyCore {
    n: usize,
    placed: Vec<PlacedPatch>,
    /// Per patch, coordinates where the set of overlapping patches changes;
    /// the partition-of-unity weight loses smoothness there.
    kinks: Vec<Vec<f64>>,
}

impl BodyCore {
    /// Bump value of patch `j` if the world point lies on its graph, else 0.
    fn member_bump(&self, j: usize, world: Vec3) -> f64 {
        let pl = &self.placed[j];
        let (u, h) = pl.local_split(world, self.n);
        if !pl.patch.in_domain(u) {
            return 0.0;
        }
        let hf = pl.patch.height(u);
        if (h - hf).abs() > 1e-9 * (1.0 + hf.abs()) {
            return 0.0;
        }
        pl.patch.cutoff(u)
    }

    fn pou_denominator(&self, world: Vec3) -> f64 {
        (0..self.placed.len())
            .map(|j| self.member_bump(j, world))
            .sum()
    }
}

fn find_kinks(core: &BodyCore) -> Vec<Vec<f64>> {
    if core.n != 1 {
        return vec![Vec::new(); core.placed.len()];
    }
    const PROBES: usize = 512;
    (0..core.placed.len())
        .map(|k| {
            let pl = &core.placed[k];
            let r0 = pl.patch.r0();
            let mask = |x: f64| -> u64 {
                let world = pl.world_point([x, 0.0]);
                let mut m = 0u64;
                for j in 0..core.placed.len() {
                    if j != k && core.member_bump(j, world) > 0.0 {
                        m |= 1 << j;
                    }
                }
                m
            };
            let mut kinks = Vec::new();
            let xs: Vec<f64> = (0..=PROBES)
                .map(|i| -r0 + 2.0 * r0 * i as f64 / PROBES as f64)
                .collect();
            let mut prev = mask(xs[0]);
            for win in xs.windows(2) {
                let cur = mask(win[1]);
                if cur != prev {
                    let (mut lo, mut hi) = (win[0], win[1]);
                    for _ in 0..50 {
                        let mid = 0.5 * (lo + hi);
                        if mask(mid) == prev {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    kinks.push(0.5 * (lo + hi));
                }
                prev = cur;
            }
            kinks
        })
        .collect()
}

/// Exact count of lattice points on one section of the dilated body `kK`:
/// the inclusive range of `y` with `(x, y) ∈ kK` (planar bodies) or of `z`
/// with `(x, y, z) ∈ kK` (solid bodies).
#[derive(Clone)]
pub(crate) enum SectionRule {
    Planar(Arc<dyn Fn(u64, i64) -> Option<(i64, i64)> + Send + Sync>),
    Solid(Arc<dyn Fn(u64, i64, i64) -> Option<(i64, i64)> + Send + Sync>),
}

/// A closed body with a patch covering of its boundary. Cheap to clone.
#[derive(Clone)]
pub struct ClosedBody {
    name: String,
    core: Arc<BodyCore>,
    volume: f64,
    /// Max absolute coordinate over the body (loop bound for lattice scans).
    extent: f64,
    is_union: bool,
    is_control: bool,
    section: Option<SectionRule>,
}

impl ClosedBody {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Base dimension of the boundary patches (1 for plane bodies, 2 for
    /// solids).
    pub fn n(&self) -> usize {
        self.core.n
    }

    pub fn patch_count(&self) -> usize {
        self.core.placed.len()
    }

    pub fn placed(&self, k: usize) -> &PlacedPatch {
        &self.core.placed[k]
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn is_union(&self) -> bool {
        self.is_union
    }

    /// Control bodies take part in lattice counting only; they have no patch
    /// covering and no boundary transforms.
    pub fn is_control(&self) -> bool {
        self.is_control
    }

    pub(crate) fn section_rule(&self) -> Option<&SectionRule> {
        self.section.as_ref()
    }

    /// Patch `k` with its cutoff replaced by the effective boundary density:
    /// partition-of-unity weight × surface measure × an ambient weight.
    /// Carving functions of the placed patch are preserved.
    pub fn effective_patch(&self, k: usize, weight: &AmbientFn) -> ConvexPatch {
        let core = Arc::clone(&self.core);
        let w = Arc::clone(weight);
        let cutoff: ScalarFn = Arc::new(move |x: [f64; 2]| {
            let pl = &core.placed[k];
            let phi = pl.patch.cutoff(x);
            if phi <= 0.0 {
                return 0.0;
            }
            let world = pl.world_point(x);
            let denom = core.pou_denominator(world);
            phi / denom * pl.patch.area_element(x) * w(world)
        });
        self.core.placed[k]
            .patch
            .clone()
            .with_cutoff(cutoff)
            .with_cutoff_kinks(self.core.kinks[k].clone())
    }
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    name: &str,
    n: usize,
    placed: Vec<PlacedPatch>,
    volume: f64,
    extent: f64,
    is_union: bool,
    is_control: bool,
    section: Option<SectionRule>,
) -> ClosedBody {
    let mut core = BodyCore {
        n,
        placed,
        kinks: Vec::new(),
    };
    core.kinks = find_kinks(&core);
    ClosedBody {
        name: name.into(),
        core: Arc::new(core),
        volume,
        extent,
        is_union,
        is_control,
        section,
    }
}

pub(crate) fn isqrt(m: u128) -> u128 {
    if m == 0 {
        return 0;
    }
    let mut x = (m as f64).sqrt() as u128;
    while (x + 1) * (x + 1) <= m {
        x += 1;
    }
    while x * x > m {
        x -= 1;
    }
    x
}

/// Write `x` as `p/q` with `q ≤ 64`, exactly in floating point.
fn as_rational(x: f64) -> Option<(i64, i64)> {
    for q in 1..=64i64 {
        let p = (x * q as f64).round();
        if p.abs() <= 1e6 && p / q as f64 == x {
            return Some((p as i64, q));
        }
    }
    None
}

const CARDINALS: [(f64, f64); 4] = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];

/// Four circle-cap patches covering the unit circle centered at `center`;
/// with `carve_center`, each patch is carved down to the arc outside the unit
/// disk around that point.
fn circle_patches(center: [f64; 2], carve_center: Option<[f64; 2]>) -> Result<Vec<PlacedPatch>> {
    let mut out = Vec::new();
    for (c, s) in CARDINALS {
        let tau = [center[0] + c, center[1] + s, 0.0];
        let t = [-s, c, 0.0];
        let m = [-c, -s, 0.0];
        let mut patch = make_catalog_patch(&PatchConfig {
            name: "circle_cap".into(),
            r0: Some(0.83),
            ..Default::default()
        })?;
        if let Some(cc) = carve_center {
            let g: ScalarFn = Arc::new(move |x: [f64; 2]| {
                let h = 1.0 - (1.0 - x[0] * x[0]).sqrt();
                let dx = tau[0] + x[0] * t[0] + h * m[0] - cc[0];
                let dy = tau[1] + x[0] * t[1] + h * m[1] - cc[1];
                1.0 - (dx * dx + dy * dy)
            });
            patch = patch.with_carving(vec![g]);
        }
        out.push(PlacedPatch {
            patch,
            frame: mat_from_columns(t, m, [0.0, 0.0, 1.0]),
            translation: tau,
        });
    }
    Ok(out)
}

pub fn make_disk() -> Result<ClosedBody> {
    let placed = circle_patches([0.0, 0.0], None)?;
    let section = SectionRule::Planar(Arc::new(|k, x| {
        let k2 = (k as i128) * (k as i128);
        let x2 = (x as i128) * (x as i128);
        if x2 > k2 {
            return None;
        }
        let y = isqrt((k2 - x2) as u128) as i64;
        Some((-y, y))
    }));
    Ok(assemble("disk", 1, placed, PI, 1.0, false, false, Some(section)))
}

fn ellipse_arc(a_height: f64, b_tan: f64, r0: f64) -> Result<ConvexPatch> {
    let (a, b) = (a_height, b_tan);
    ConvexPatch::new(
        1,
        r0,
        "ellipse_arc",
        true,
        Arc::new(move |x: [f64; 2]| a - a * (1.0 - x[0] * x[0] / (b * b)).sqrt()),
        Arc::new(move |x: [f64; 2]| {
            [
                a * x[0] / (b * b * (1.0 - x[0] * x[0] / (b * b)).sqrt()),
                0.0,
            ]
        }),
    )
}

pub fn make_ellipse(a: f64, b: f64) -> Result<ClosedBody> {
    if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0 && a <= 100.0 && b <= 100.0) {
        return Err(Error::Parameter(format!(
            "ellipse semi-axes must be positive and at most 100, got a={a} b={b}"
        )));
    }
    let mut placed = Vec::new();
    for (c, s) in CARDINALS {
        // Patch centered at (±a, 0) or (0, ±b); the tangent semi-axis sets
        // the chart radius so neighbouring charts always overlap.
        let (hgt, tan) = if s == 0.0 { (a, b) } else { (b, a) };
        let tau = [a * c, b * s, 0.0];
        let t = [-s, c, 0.0];
        let m = [-c, -s, 0.0];
        placed.push(PlacedPatch {
            patch: ellipse_arc(hgt, tan, 0.9 * tan)?,
            frame: mat_from_columns(t, m, [0.0, 0.0, 1.0]),
            translation: tau,
        });
    }
    let section = as_rational(a).zip(as_rational(b)).map(|((pa, qa), (pb, qb))| {
        let (pa, qa, pb, qb) = (pa as i128, qa as i128, pb as i128, qb as i128);
        SectionRule::Planar(Arc::new(move |k, x| {
            let m = (k as i128 * pa * pb).pow(2);
            let c = x as i128 * qa * pb;
            if c * c > m {
                return None;
            }
            let y = (isqrt((m - c * c) as u128) as i128 / (qb * pa)) as i64;
            Some((-y, y))
        }))
    });
    Ok(assemble(
        "ellipse",
        1,
        placed,
        PI * a * b,
        a.max(b),
        false,
        false,
        section,
    ))
}

fn root_floor(m: i128, p: u32) -> i128 {
    if m <= 0 {
        return 0;
    }
    let mut y = (m as f64).powf(1.0 / p as f64).floor() as i128;
    y = y.max(0);
    while (y + 1).pow(p) <= m {
        y += 1;
    }
    while y > 0 && y.pow(p) > m {
        y -= 1;
    }
    y
}

fn coverage_exponent(p: f64) -> Result<u32> {
    if p == 2.0 || p == 4.0 {
        Ok(p as u32)
    } else {
        Err(Error::Parameter(format!(
            "the four-chart covering is only valid for p in {{2, 4}}, got {p}"
        )))
    }
}

pub fn make_superellipse(p: f64) -> Result<ClosedBody> {
    let pe = coverage_exponent(p)?;
    let r0 = if pe == 2 { 0.83 } else { 0.9 };
    let mut placed = Vec::new();
    for (c, s) in CARDINALS {
        let tau = [c, s, 0.0];
        let t = [-s, c, 0.0];
        let m = [-c, -s, 0.0];
        placed.push(PlacedPatch {
            patch: make_catalog_patch(&PatchConfig {
                name: "superellipse_cap".into(),
                p: Some(p),
                r0: Some(r0),
            })?,
            frame: mat_from_columns(t, m, [0.0, 0.0, 1.0]),
            translation: tau,
        });
    }
    let area = if pe == 2 { PI } else { 3.708_149_354_602_743_8 };
    let section = SectionRule::Planar(Arc::new(move |k, x| {
        let m = (k as i128).pow(pe) - (x as i128).pow(pe);
        if m < 0 {
            return None;
        }
        let y = root_floor(m, pe) as i64;
        Some((-y, y))
    }));
    Ok(assemble(
        "superellipse",
        1,
        placed,
        area,
        1.0,
        false,
        false,
        Some(section),
    ))
}

pub fn make_two_disk_union(d: f64) -> Result<ClosedBody> {
    if !(d.is_finite() && d > 0.0 && d < 1.0) {
        return Err(Error::Parameter(format!(
            "union offset must lie strictly between 0 and 1, got {d}"
        )));
    }
    let mut placed = circle_patches([d, 0.0], Some([-d, 0.0]))?;
    placed.extend(circle_patches([-d, 0.0], Some([d, 0.0]))?);
    let area = 2.0 * PI - 2.0 * (d.acos() - d * (1.0 - d * d).sqrt());
    let section = as_rational(d).map(|(pd, qd)| {
        let (pd, qd) = (pd as i128, qd as i128);
        SectionRule::Planar(Arc::new(move |k, x| {
            let mut best: Option<i64> = None;
            for sgn in [-1, 1] {
                let c = qd * x as i128 - sgn * pd * k as i128;
                let r = (qd * k as i128).pow(2) - c * c;
                if r >= 0 {
                    let y = (isqrt(r as u128) as i128 / qd) as i64;
                    best = Some(best.map_or(y, |b| b.max(y)));
                }
            }
            best.map(|y| (-y, y))
        }))
    });
    Ok(assemble(
        "two_disk_union",
        1,
        placed,
        area,
        1.0 + d,
        true,
        false,
        section,
    ))
}

const OCTANT_SIGNS: [[f64; 3]; 8] = [
    [1.0, 1.0, 1.0],
    [1.0, 1.0, -1.0],
    [1.0, -1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, 1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [-1.0, -1.0, -1.0],
];

pub fn make_ball() -> Result<ClosedBody> {
    let mut placed = Vec::new();
    for signs in OCTANT_SIGNS {
        let nu = scale3(signs, 1.0 / 3.0_f64.sqrt());
        let m = scale3(nu, -1.0);
        let (t1, t2) = tangent_frame(m);
        placed.push(PlacedPatch {
            patch: make_catalog_patch(&PatchConfig {
                name: "sphere_cap".into(),
                r0: Some(0.9),
                ..Default::default()
            })?,
            frame: mat_from_columns(t1, t2, m),
            translation: nu,
        });
    }
    let section = SectionRule::Solid(Arc::new(|k, x, y| {
        let r = (k as i128) * (k as i128) - (x as i128) * (x as i128) - (y as i128) * (y as i128);
        if r < 0 {
            return None;
        }
        let z = isqrt(r as u128) as i64;
        Some((-z, z))
    }));
    Ok(assemble(
        "ball",
        2,
        placed,
        4.0 * PI / 3.0,
        1.0,
        false,
        false,
        Some(section),
    ))
}

fn superellipsoid_face(p: i32, tau: Vec3, t1: Vec3, t2: Vec3, m: Vec3) -> Result<ConvexPatch> {
    let point = move |u: [f64; 2], h: f64| -> Vec3 {
        add3(
            add3(tau, scale3(t1, u[0])),
            add3(scale3(t2, u[1]), scale3(m, h)),
        )
    };
    let level = move |y: Vec3| y[0].powi(p) + y[1].powi(p) + y[2].powi(p) - 1.0;
    let grad_level = move |y: Vec3| -> Vec3 {
        let q = p as f64;
        [
            q * y[0].powi(p - 1),
            q * y[1].powi(p - 1),
            q * y[2].powi(p - 1),
        ]
    };
    // The tangent plane at tau lies outside the body, so the level value is
    // nonnegative at h = 0 and decreases along the inward ray; bracket the
    // root and polish with safeguarded Newton steps.
    let height = move |u: [f64; 2]| -> f64 {
        let mut lo = 0.0;
        let mut hi = 0.25;
        let mut grow = 0;
        while level(point(u, hi)) > 0.0 && grow < 16 {
            hi *= 1.6;
            grow += 1;
        }
        let mut h = 0.0;
        for _ in 0..80 {
            let y = point(u, h);
            let val = level(y);
            if val > 0.0 {
                lo = h;
            } else {
                hi = h;
            }
            let slope = crate::linalg::dot3(grad_level(y), m);
            let mut next = h - val / slope;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - h).abs() <= 1e-15 * (1.0 + h.abs()) {
                return next;
            }
            h = next;
        }
        h
    };
    let grad = move |u: [f64; 2]| -> [f64; 2] {
        let y = point(u, height(u));
        let g = grad_level(y);
        let den = crate::linalg::dot3(g, m);
        [
            -crate::linalg::dot3(g, t1) / den,
            -crate::linalg::dot3(g, t2) / den,
        ]
    };
    ConvexPatch::new(
        2,
        0.9,
        "superellipsoid_face",
        false,
        Arc::new(height),
        Arc::new(grad),
    )
}

pub fn make_superellipsoid(p: f64) -> Result<ClosedBody> {
    let pe = coverage_exponent(p)?;
    let pi32 = pe as i32;
    let vertex = 3.0_f64.powf(-1.0 / p);
    let mut placed = Vec::new();
    for signs in OCTANT_SIGNS {
        let tau = scale3(signs, vertex);
        let nu = scale3(signs, 1.0 / 3.0_f64.sqrt());
        let m = scale3(nu, -1.0);
        let (t1, t2) = tangent_frame(m);
        placed.push(PlacedPatch {
            patch: superellipsoid_face(pi32, tau, t1, t2, m)?,
            frame: mat_from_columns(t1, t2, m),
            translation: tau,
        });
    }
    let volume = if pe == 2 {
        4.0 * PI / 3.0
    } else {
        6.481_987_351_786_382_4
    };
    let section = SectionRule::Solid(Arc::new(move |k, x, y| {
        let r = (k as i128).pow(pe) - (x as i128).pow(pe) - (y as i128).pow(pe);
        if r < 0 {
            return None;
        }
        let z = root_floor(r, pe) as i64;
        Some((-z, z))
    }));
    Ok(assemble(
        "superellipsoid",
        2,
        placed,
        volume,
        1.0,
        false,
        false,
        Some(section),
    ))
}

/// Control body for the lattice experiments: the square [-1,1]², counted
/// exactly, with no boundary patches.
pub fn make_square() -> ClosedBody {
    let section = SectionRule::Planar(Arc::new(|k, x| {
        let k = k as i64;
        if x.abs() > k {
            None
        } else {
            Some((-k, k))
        }
    }));
    assemble("square", 1, Vec::new(), 4.0, 1.0, false, true, Some(section))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::validate_patch;

    fn bodies_for_test() -> Vec<ClosedBody> {
        vec![
            make_disk().unwrap(),
            make_ellipse(1.0, 0.25).unwrap(),
            make_superellipse(4.0).unwrap(),
            make_two_disk_union(0.5).unwrap(),
            make_ball().unwrap(),
            make_superellipsoid(4.0).unwrap(),
        ]
    }

    #[test]
    fn every_placed_patch_validates() {
        for body in bodies_for_test() {
            for k in 0..body.patch_count() {
                let patch = &body.placed(k).patch;
                let report = validate_patch(patch, 300, 11).unwrap();
                assert!(
                    report.pass(),
                    "{} patch {k}: {:?}",
                    body.name(),
                    report.failed_checks()
                );
            }
        }
    }

    #[test]
    fn plane_bodies_are_fully_covered() {
        // Walk each boundary with an independent parametrization and check
        // that the partition-of-unity denominator stays bounded away from 0.
        let cases: Vec<(ClosedBody, Box<dyn Fn(f64) -> Vec3>)> = vec![
            (
                make_disk().unwrap(),
                Box::new(|psi: f64| [psi.cos(), psi.sin(), 0.0]),
            ),
            (
                make_ellipse(1.0, 0.25).unwrap(),
                Box::new(|psi: f64| [psi.cos(), 0.25 * psi.sin(), 0.0]),
            ),
            (
                make_ellipse(2.0, 1.0).unwrap(),
                Box::new(|psi: f64| [2.0 * psi.cos(), psi.sin(), 0.0]),
            ),
            (
                make_superellipse(4.0).unwrap(),
                Box::new(|psi: f64| {
                    let (c, s) = (psi.cos(), psi.sin());
                    let scale = (c.powi(4) + s.powi(4)).powf(-0.25);
                    [scale * c, scale * s, 0.0]
                }),
            ),
        ];
        for (body, param) in cases {
            let mut worst = f64::INFINITY;
            for i in 0..2000 {
                let world = param(std::f64::consts::TAU * i as f64 / 2000.0);
                worst = worst.min(body.core.pou_denominator(world));
            }
            assert!(worst > 1e-3, "{}: denominator {worst}", body.name());
        }
    }

    #[test]
    fn solid_bodies_are_fully_covered() {
        for body in [make_ball().unwrap(), make_superellipsoid(4.0).unwrap()] {
            let p = if body.name() == "ball" { 2 } else { 4 };
            let mut worst = f64::INFINITY;
            let steps = 60;
            for i in 0..steps {
                for j in 0..(2 * steps) {
                    let th = PI * (i as f64 + 0.5) / steps as f64;
                    let ph = PI * j as f64 / steps as f64;
                    let dir = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
                    let scale =
                        (dir[0].powi(p) + dir[1].powi(p) + dir[2].powi(p)).powf(-1.0 / p as f64);
                    worst = worst.min(body.core.pou_denominator(scale3(dir, scale)));
                }
            }
            assert!(worst > 1e-4, "{}: denominator {worst}", body.name());
        }
    }

    #[test]
    fn pou_measures_recover_known_perimeters() {
        // Σ_k ∫ weight_k · area dx equals the boundary length.
        let cases = [
            (make_disk().unwrap(), 2.0 * PI),
            (make_ellipse(1.0, 0.25).unwrap(), 4.289_210_887_577_662_7),
            (make_superellipse(4.0).unwrap(), 7.017_697_943_563_295_1),
        ];
        let one: AmbientFn = Arc::new(|_| 1.0);
        for (body, perimeter) in cases {
            let mut total = 0.0;
            for k in 0..body.patch_count() {
                let patch = body.effective_patch(k, &one);
                let r0 = patch.r0();
                let steps = 40_000;
                let mut sum = 0.0;
                for i in 0..steps {
                    let x = -r0 + 2.0 * r0 * (i as f64 + 0.5) / steps as f64;
                    sum += patch.cutoff([x, 0.0]);
                }
                total += sum * 2.0 * r0 / steps as f64;
            }
            assert!(
                (total - perimeter).abs() < 1e-5 * perimeter,
                "{}: {total} vs {perimeter}",
                body.name()
            );
        }
    }

    #[test]
    fn sphere_pou_measure_is_surface_area() {
        let body = make_ball().unwrap();
        let one: AmbientFn = Arc::new(|_| 1.0);
        let mut total = 0.0;
        for k in 0..body.patch_count() {
            let patch = body.effective_patch(k, &one);
            let r0 = patch.r0();
            let steps = 400;
            let mut sum = 0.0;
            for i in 0..steps {
                for j in 0..steps {
                    let x = [
                        -r0 + 2.0 * r0 * (i as f64 + 0.5) / steps as f64,
                        -r0 + 2.0 * r0 * (j as f64 + 0.5) / steps as f64,
                    ];
                    if patch.in_domain(x) {
                        sum += patch.cutoff(x);
                    }
                }
            }
            total += sum * (2.0 * r0 / steps as f64).powi(2);
        }
        assert!(
            (total - 4.0 * PI).abs() < 1e-3,
            "surface area {total} vs {}",
            4.0 * PI
        );
    }

    #[test]
    fn disk_kinks_sit_where_neighbor_charts_end() {
        let body = make_disk().unwrap();
        let kinks = body.core.kinks[0].clone();
        // The neighbouring chart's bump turns on where its own coordinate
        // crosses ±r0, i.e. at x = ±√(1 − r0²) in this chart.
        let expect = (1.0 - 0.83_f64 * 0.83).sqrt();
        assert_eq!(kinks.len(), 2, "{kinks:?}");
        assert!((kinks[0] + expect).abs() < 1e-6, "{kinks:?}");
        assert!((kinks[1] - expect).abs() < 1e-6, "{kinks:?}");
    }

    #[test]
    fn effective_weight_is_one_away_from_overlaps() {
        let body = make_disk().unwrap();
        let one: AmbientFn = Arc::new(|_| 1.0);
        let patch = body.effective_patch(0, &one);
        let raw = &body.placed(0).patch;
        // Where no other chart overlaps, the weight is 1 and the density is
        // the bare surface measure.
        for x in [0.0, 0.3] {
            let x = [x, 0.0];
            assert!((patch.cutoff(x) - raw.area_element(x)).abs() < 1e-12);
        }
        // Inside the overlap the weight drops strictly below 1.
        let x = [0.7, 0.0];
        assert!(patch.cutoff(x) < raw.area_element(x));
        assert!(patch.cutoff(x) > 0.0);
    }

    #[test]
    fn union_carving_keeps_exposed_arcs_only() {
        let body = make_two_disk_union(0.5).unwrap();
        // Patch 0 faces away from the other disk: fully exposed near center.
        assert!(body.placed(0).patch.in_carved_domain([0.0, 0.0]));
        // Patch 2 faces the other disk: its center is buried.
        assert!(!body.placed(2).patch.in_carved_domain([0.0, 0.0]));
        // The union area matches the inclusion–exclusion value.
        assert!((body.volume() - 5.054_815_608_570_829_8).abs() < 1e-12);
    }

    #[test]
    fn world_and_local_charts_agree_between_overlapping_patches() {
        for body in bodies_for_test() {
            if body.patch_count() == 0 {
                continue;
            }
            let pl = body.placed(0);
            let x = match body.n() {
                1 => [0.7 * pl.patch.r0(), 0.0],
                _ => [0.6 * pl.patch.r0(), 0.3 * pl.patch.r0()],
            };
            let world = pl.world_point(x);
            for j in 0..body.patch_count() {
                let q = body.placed(j);
                let (u, h) = q.local_split(world, body.n());
                if !q.patch.in_domain(u) {
                    continue;
                }
                if (h - q.patch.height(u)).abs() <= 1e-9 * (1.0 + h.abs()) {
                    // Round-trip through the overlapping chart must land on
                    // the same world point.
                    let back = q.world_point(u);
                    for c in 0..3 {
                        assert!(
                            (back[c] - world[c]).abs() < 1e-9,
                            "{} patch {j}",
                            body.name()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn sections_are_exact_against_float_membership() {
        let disk = make_disk().unwrap();
        let Some(SectionRule::Planar(sec)) = disk.section_rule() else {
            panic!("disk has a planar rule");
        };
        for k in [1u64, 7, 100, 4999] {
            for x in [-(k as i64), -1, 0, 3, k as i64] {
                let got = sec(k, x);
                let kk = (k * k) as i64;
                let want = if x * x > kk {
                    None
                } else {
                    let y = ((kk - x * x) as f64).sqrt().floor() as i64;
                    // float guess corrected exactly
                    let y = if (y + 1) * (y + 1) <= kk - x * x { y + 1 } else { y };
                    let y = if y * y > kk - x * x { y - 1 } else { y };
                    Some((-y, y))
                };
                assert_eq!(got, want, "k={k} x={x}");
            }
        }
    }

    #[test]
    fn rational_detection_covers_catalog_values() {
        assert_eq!(as_rational(0.25), Some((1, 4)));
        assert_eq!(as_rational(2.0), Some((2, 1)));
        assert_eq!(as_rational(0.5), Some((1, 2)));
        assert_eq!(as_rational(1.0), Some((1, 1)));
        assert!(as_rational(std::f64::consts::PI).is_none());
    }

    #[test]
    fn union_rejects_degenerate_offsets() {
        assert!(make_two_disk_union(0.0).is_err());
        assert!(make_two_disk_union(1.0).is_err());
        assert!(make_superellipse(6.0).is_err());
        assert!(make_ellipse(0.0, 1.0).is_err());
    }

    #[test]
    fn isqrt_is_exact_near_squares() {
        for v in [0u128, 1, 2, 3, 4, 8, 9, 15, 16, 24_999_999_999_999_999] {
            let r = isqrt(v);
            assert!(r * r <= v && (r + 1) * (r + 1) > v, "v={v}");
        }
    }
}
