//! Phase-marching Gauss–Legendre panel engine.
//!
//! A monotone segment carries a phase function and a full complex integrand.
//! The segment is subdivided until each panel's phase span fits under
//! `PHASE_CAP`, each panel picks its ladder order from the span, and the same
//! panel evaluated one ladder rung lower provides the embedded error
//! estimate.

use num_complex::Complex64;

use super::gauss;

/// One integration piece with monotone phase. The integrand is the complete
/// complex-valued function (amplitude times oscillatory factor); the phase
/// closure exists only to steer panel sizes.
pub(crate) struct MonotoneSegment<'a> {
    pub a: f64,
    pub b: f64,
    pub phase: &'a dyn Fn(f64) -> f64,
    pub integrand: &'a dyn Fn(f64) -> Complex64,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct PanelSettings {
    pub phase_cap: f64,
    pub min_panels: usize,
    pub min_order: usize,
    pub budget: u64,
}

impl Default for PanelSettings {
    fn default() -> Self {
        PanelSettings {
            phase_cap: gauss::PHASE_CAP,
            min_panels: 4,
            min_order: 16,
            budget: 100_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct PanelOutcome {
    pub value: Complex64,
    pub coarse: Complex64,
    pub evals: u64,
    pub budget_exhausted: bool,
}

impl PanelOutcome {
    pub fn est_error(&self) -> f64 {
        (self.value - self.coarse).norm()
    }
}

struct Panel {
    a: f64,
    b: f64,
    span: f64,
}

/// Split [a, b] until every piece carries at most `cap` phase. Assumes the
/// phase is monotone, so the span of a piece is the endpoint difference.
fn plan_segment(
    phase: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    cap: f64,
    min_panels: usize,
    evals: &mut u64,
    out: &mut Vec<Panel>,
) {
    let fa = phase(a);
    let fb = phase(b);
    *evals += 2;
    // Seed with an even split meeting both the cap and the panel floor.
    let total = (fb - fa).abs();
    let first = ((total / cap).ceil() as usize).max(min_panels).max(1);
    let mut stack: Vec<(f64, f64, f64, f64, u32)> = Vec::new();
    for k in (0..first).rev() {
        let xa = a + (b - a) * k as f64 / first as f64;
        let xb = a + (b - a) * (k + 1) as f64 / first as f64;
        let pa = if k == 0 { fa } else { phase(xa) };
        let pb = if k + 1 == first { fb } else { phase(xb) };
        if k != 0 {
            *evals += 1;
        }
        if k + 1 != first {
            *evals += 1;
        }
        stack.push((xa, xb, pa, pb, 0));
    }
    // Refine: the phase need not be linear, so interior spans can exceed the
    // endpoint estimate only between the probes we add here.
    while let Some((xa, xb, pa, pb, depth)) = stack.pop() {
        let xm = 0.5 * (xa + xb);
        if depth >= 48 || xm <= xa || xm >= xb {
            out.push(Panel {
                a: xa,
                b: xb,
                span: (pb - pa).abs(),
            });
            continue;
        }
        let pm = phase(xm);
        *evals += 1;
        let left = (pm - pa).abs();
        let right = (pb - pm).abs();
        if left + right <= cap {
            out.push(Panel {
                a: xa,
                b: xb,
                span: left + right,
            });
        } else {
            stack.push((xm, xb, pm, pb, depth + 1));
            stack.push((xa, xm, pa, pm, depth + 1));
        }
    }
    // The stack pops left-to-right pieces in order; keep panels sorted by a.
    out.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap());
}

fn gl_panel(integrand: &dyn Fn(f64) -> Complex64, a: f64, b: f64, order: usize) -> Complex64 {
    let (nodes, weights) = gauss::rule(order);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut s = Complex64::new(0.0, 0.0);
    for (x, w) in nodes.iter().zip(weights) {
        s += *w * integrand(mid + half * x);
    }
    s * half
}

/// Integrate a list of monotone segments. Deterministic: segments in the
/// given order, panels left to right, fixed summation order.
pub(crate) fn integrate_segments(
    segments: &[MonotoneSegment<'_>],
    settings: &PanelSettings,
) -> PanelOutcome {
    let mut outcome = PanelOutcome::default();
    let mut panels: Vec<(usize, Panel)> = Vec::new();
    let mut cap = settings.phase_cap;
    loop {
        panels.clear();
        let mut plan_evals = 0;
        for (i, seg) in segments.iter().enumerate() {
            if seg.b <= seg.a {
                continue;
            }
            let mut list = Vec::new();
            plan_segment(
                seg.phase,
                seg.a,
                seg.b,
                cap,
                settings.min_panels,
                &mut plan_evals,
                &mut list,
            );
            panels.extend(list.into_iter().map(|p| (i, p)));
        }
        outcome.evals += plan_evals;
        let projected: u64 = panels
            .iter()
            .map(|(_, p)| {
                let order = gauss::ladder_order(p.span).max(settings.min_order);
                (order + gauss::lower_order(order)) as u64
            })
            .sum();
        if projected <= settings.budget || cap >= 16.0 * settings.phase_cap {
            if projected > settings.budget {
                outcome.budget_exhausted = true;
            }
            break;
        }
        // Over budget: coarsen panels and retry; the embedded estimate keeps
        // the reported error honest about the loss.
        cap *= 2.0;
        outcome.budget_exhausted = true;
    }

    for (i, p) in &panels {
        let order = gauss::ladder_order(p.span).max(settings.min_order);
        let low = gauss::lower_order(order);
        let f = segments[*i].integrand;
        outcome.value += gl_panel(f, p.a, p.b, order);
        outcome.coarse += gl_panel(f, p.a, p.b, low);
        outcome.evals += (order + low) as u64;
    }
    outcome
}
